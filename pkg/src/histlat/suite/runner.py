"""Execution engine: single checks, the default suite and parameter scans."""
from __future__ import annotations

import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DimensionError, HistlatError
from ..result import CheckResult
from . import checks  # noqa: F401  (populates the registry)
from .config import CheckConfig
from .registry import default_configs, get


def run_check(config: CheckConfig) -> CheckResult:
    """Run one configured check and return its result.

    Raises ``UnknownCheckError`` for unregistered names, ``ConfigError`` for
    missing seeds or unknown tolerance keys, and ``DimensionError`` (carrying
    the computed dimension) when a Fock space exceeds the safety bound.
    """
    entry = get(config.check)
    if entry.uses_rng and config.seed is None:
        raise ConfigError(f"check {config.check!r} uses randomness and needs a seed")
    start = time.perf_counter()
    result = entry.func(config)
    runtime = 1e3 * (time.perf_counter() - start)
    unknown = set(config.tolerances) - set(result.residuals)
    if unknown:
        raise ConfigError(f"tolerance keys {sorted(unknown)} are not residuals of {config.check!r}")
    result.tolerances = {**result.tolerances, **{k: float(v) for k, v in config.tolerances.items()}}
    result.name = config.name
    result.metadata = {**result.metadata, "check": config.check, "runtime_ms": runtime,
                       "seed": config.seed, "engine": config.engine.kind}
    return result


def _safe_run(config: CheckConfig) -> CheckResult:
    try:
        return run_check(config)
    except (HistlatError, ValueError, np.linalg.LinAlgError) as exc:
        meta = {"check": config.check, "seed": config.seed, "engine": config.engine.kind}
        if isinstance(exc, DimensionError):
            meta["dim"] = exc.dim
        return CheckResult(config.name, {}, {}, metadata=meta, error=f"{type(exc).__name__}: {exc}")


@dataclass
class SuiteSummary:
    passed: int
    failed: int
    flagged: int

    @property
    def exit_code(self) -> int:
        return 0 if self.failed == 0 else 1


def summarize(results: list[CheckResult]) -> SuiteSummary:
    status = [r.status for r in results]
    return SuiteSummary(status.count("pass"), status.count("fail"), status.count("flagged"))


def run_suite(filter: str | None = None, jobs: int = 1,
              configs: list[CheckConfig] | None = None) -> tuple[list[CheckResult], SuiteSummary]:
    """Run every (default) configuration whose name matches ``filter``.

    Results are ordered by name whatever the worker count; per-check errors
    become failed results.
    """
    configs = default_configs() if configs is None else list(configs)
    if filter:
        pat = re.compile(filter)
        configs = [c for c in configs if pat.search(c.name)]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_safe_run, configs))
    else:
        results = [_safe_run(c) for c in configs]
    results.sort(key=lambda r: r.name)
    return results, summarize(results)


@dataclass
class ScanTable:
    param: str
    values: list[float]
    results: list[CheckResult]
    fits: dict[str, dict] = field(default_factory=dict)

    def rows(self) -> list[tuple[float, CheckResult]]:
        return list(zip(self.values, self.results))


def _fit(values, series) -> dict:
    x = np.asarray(values, dtype=float)
    y = np.asarray(series, dtype=float)
    diffs = np.diff(y)
    out = {"decreasing": bool(np.all(diffs < 0)), "increasing": bool(np.all(diffs > 0))}
    if np.all(x > 0) and np.all(y > 0) and len(set(x)) > 1:
        out["loglog_slope"] = float(np.polyfit(np.log(x), np.log(y), 1)[0])
    return out


def scan(config: CheckConfig, param: str, values) -> ScanTable:
    """Re-run ``config`` with the dotted ``param`` set to each value."""
    values = list(values)
    results = []
    for v in values:
        cfg = config.with_value(param, v)
        cfg.name = f"{config.name}[{param}={v}]"
        results.append(run_check(cfg))
    fits = {}
    if len(values) > 1:
        for key in results[0].residuals:
            fits[key] = _fit(values, [r.residuals[key] for r in results])
    return ScanTable(param, values, results, fits)
