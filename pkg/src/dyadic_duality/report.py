from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Check:
    name: str
    passed: bool
    worst_margin: float
    location: Any = None
    tolerance: float = 0.0
    first_violation: Any = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "location": _plain(self.location),
            "tolerance": self.tolerance,
            "first_violation": _plain(self.first_violation),
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def first_violation(self):
        """Earliest violating node across all failed checks (generation, then index)."""
        nodes = [c.first_violation for c in self.checks if not c.passed and c.first_violation is not None]
        return min(nodes) if nodes else None

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "first_violation": _plain(self.first_violation()),
            "checks": [c.to_dict() for c in self.checks],
            "info": {k: _plain(v) for k, v in self.info.items()},
        }


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, list):
        return [_plain(x) for x in v]
    return v
