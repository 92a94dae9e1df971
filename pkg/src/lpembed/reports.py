from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Result of a property check: pass flag, worst residual and the offending items."""

    name: str
    tol: float
    worst_residual: float = 0.0
    checked: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def record(self, residual: float, **where) -> None:
        self.checked += 1
        residual = float(residual)
        if residual > self.worst_residual:
            self.worst_residual = residual
        if not residual <= self.tol:
            self.failures.append({"residual": residual, **where})

    def fail(self, reason: str, **where) -> None:
        self.failures.append({"reason": reason, **where})

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "tol": self.tol,
            "worst_residual": self.worst_residual,
            "checked": self.checked,
            "failures": self.failures,
            "details": self.details,
        }
