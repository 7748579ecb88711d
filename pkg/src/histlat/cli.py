"""Command line interface: ``histlat list | run | suite | scan``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, DimensionError, HistlatError, UnknownCheckError
from .suite import emit_results, emit_scan, load_config, run_check, run_suite, scan
from .suite.registry import REGISTRY, get


def _format(path: str) -> str:
    return "csv" if Path(path).suffix.lower() == ".csv" else "json"


def _line(r) -> str:
    worst = f"{r.max_residual():.3e}" if r.residuals else "-"
    tail = f"  {r.error}" if r.error else ""
    return f"{r.status.upper():8s} {r.name}  max_residual={worst}{tail}"


def _cmd_list(args) -> int:
    for name in sorted(REGISTRY):
        entry = REGISTRY[name]
        print(f"{name:28s} {entry.description}  ({len(entry.defaults)} default config(s))")
    return 0


def _cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if cfg.check != args.check:
            raise ConfigError(f"config is for check {cfg.check!r}, not {args.check!r}")
    else:
        entry = get(args.check)
        if not entry.defaults:
            raise ConfigError(f"check {args.check!r} has no default config; pass --config")
        cfg = entry.defaults[0]
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    result = run_check(cfg)
    print(_line(result))
    for k, v in result.residuals.items():
        print(f"  {k} = {v:.6e} (tol {result.tolerances.get(k, float('nan')):.1e})")
    if args.out:
        emit_results([result], _format(args.out), args.out)
    return 0 if result.passed else 1


def _cmd_suite(args) -> int:
    results, summary = run_suite(args.filter, args.jobs)
    for r in results:
        print(_line(r))
    print(f"passed={summary.passed} failed={summary.failed} flagged={summary.flagged}")
    if args.out:
        emit_results(results, _format(args.out), args.out)
    return summary.exit_code


def _cmd_scan(args) -> int:
    cfg = load_config(args.config)
    try:
        values = [float(v) if any(c in v for c in ".eE") else int(v) for v in args.values.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --values: {exc}") from exc
    table = scan(cfg, args.param, values)
    for v, r in table.rows():
        print(f"{args.param}={v}: " + _line(r))
    for key, fit in table.fits.items():
        print(f"fit {key}: {fit}")
    if args.out:
        emit_scan(table, args.out)
    return 0 if all(r.passed for r in table.results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="histlat", description="lattice history-space verification checks")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered checks").set_defaults(func=_cmd_list)
    p = sub.add_parser("run", help="run one check")
    p.add_argument("check")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("suite", help="run the default suite")
    p.add_argument("--filter")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_suite)
    p = sub.add_parser("scan", help="scan one numeric config parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_scan)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownCheckError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HistlatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
