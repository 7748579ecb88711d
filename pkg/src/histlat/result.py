"""Result record produced by every verification routine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckResult:
    """Named residuals with their tolerances and a pass/fail verdict.

    ``passed`` is derived: every residual must be at or below its tolerance,
    unless ``expected_nonzero`` is set, in which case the result is flagged
    instead of failed.
    """

    name: str
    residuals: dict[str, float]
    tolerances: dict[str, float]
    expected_nonzero: bool = False
    metadata: dict[str, Any] = field(default_factory=dict)
    error: str | None = None

    @property
    def within_tolerance(self) -> bool:
        if self.error is not None:
            return False
        for key, value in self.residuals.items():
            tol = self.tolerances.get(key)
            if tol is None:
                continue
            if not value <= tol:
                return False
        return True

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        return self.expected_nonzero or self.within_tolerance

    @property
    def status(self) -> str:
        if self.error is not None or not self.passed:
            return "fail"
        if self.expected_nonzero:
            return "flagged"
        return "pass"

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)
