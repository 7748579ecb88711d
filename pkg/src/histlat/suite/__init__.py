"""Check registry, configuration, runner and result persistence."""
from .config import CheckConfig, load_config
from .io import emit_results, emit_scan, read_results
from .registry import REGISTRY, default_configs, names
from .runner import ScanTable, SuiteSummary, run_check, run_suite, scan, summarize

__all__ = [
    "CheckConfig", "load_config", "emit_results", "emit_scan", "read_results", "REGISTRY",
    "default_configs", "names", "ScanTable", "SuiteSummary", "run_check", "run_suite", "scan",
    "summarize",
]
