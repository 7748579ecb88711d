"""JSON and CSV persistence of check results with bit-exact floats."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from ..errors import InvalidArgumentError
from ..result import CheckResult

FIELDS = ["name", "status", "passed", "expected_nonzero", "max_residual",
          "residuals", "tolerances", "error", "metadata"]


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _json(obj) -> str:
    # floats at 17 significant digits; everything else via the json module
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):
        return _json(obj.item())
    if isinstance(obj, complex):
        return _json([obj.real, obj.imag])
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)) or hasattr(obj, "tolist"):
        seq = obj.tolist() if hasattr(obj, "tolist") else obj
        return "[" + ", ".join(_json(v) for v in seq) + "]"
    return json.dumps(str(obj))


def to_record(r: CheckResult) -> dict:
    return {
        "name": r.name,
        "status": r.status,
        "passed": r.passed,
        "expected_nonzero": r.expected_nonzero,
        "max_residual": float(r.max_residual()),
        "residuals": {k: float(v) for k, v in r.residuals.items()},
        "tolerances": {k: float(v) for k, v in r.tolerances.items()},
        "error": r.error,
        "metadata": r.metadata,
    }


def from_record(rec: dict) -> CheckResult:
    return CheckResult(rec["name"], dict(rec["residuals"]), dict(rec["tolerances"]),
                       bool(rec["expected_nonzero"]), dict(rec.get("metadata") or {}), rec.get("error"))


def _pairs(d: dict) -> str:
    return ";".join(f"{k}={fmt_float(float(v))}" for k, v in d.items())


def _unpairs(s: str) -> dict:
    if not s:
        return {}
    return {k: float(v) for k, v in (item.split("=", 1) for item in s.split(";"))}


def emit_results(results: list[CheckResult], format: str, path: str | Path) -> Path:
    """Write results as ``json`` or ``csv`` (one row per result)."""
    path = Path(path)
    if format == "json":
        body = ",\n  ".join(_json({k: to_record(r)[k] for k in FIELDS}) for r in results)
        text = '{"fields": ' + _json(FIELDS) + ', "results": [' + (f"\n  {body}\n" if body else "") + "]}\n"
    elif format == "csv":
        text = None
    else:
        raise InvalidArgumentError(f"unknown format {format!r}; expected json or csv")
    try:
        if text is not None:
            path.write_text(text)
        else:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(FIELDS)
                for r in results:
                    rec = to_record(r)
                    w.writerow([rec["name"], rec["status"], rec["passed"], rec["expected_nonzero"],
                                fmt_float(rec["max_residual"]), _pairs(rec["residuals"]),
                                _pairs(rec["tolerances"]), rec["error"] or "", _json(rec["metadata"])])
    except OSError as exc:
        raise InvalidArgumentError(f"cannot write {path}: {exc}") from exc
    return path


def read_results(path: str | Path) -> list[CheckResult]:
    path = Path(path)
    if path.suffix == ".csv":
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return [CheckResult(row["name"], _unpairs(row["residuals"]), _unpairs(row["tolerances"]),
                            row["expected_nonzero"] == "True", json.loads(row["metadata"]),
                            row["error"] or None) for row in rows]
    data = json.loads(path.read_text())
    return [from_record(rec) for rec in data["results"]]


def emit_scan(table, path: str | Path) -> Path:
    """CSV with one row per scanned value and one column per residual."""
    path = Path(path)
    keys = list(table.results[0].residuals) if table.results else []
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "value", "name", "status"] + keys)
            for v, r in table.rows():
                w.writerow([table.param, fmt_float(float(v)), r.name, r.status]
                           + [fmt_float(float(r.residuals[k])) for k in keys])
    except OSError as exc:
        raise InvalidArgumentError(f"cannot write {path}: {exc}") from exc
    return path
