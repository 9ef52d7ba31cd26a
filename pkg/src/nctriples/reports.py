"""Shared report container for verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    """Per-check status (True, False or None for undecided) with witnesses and numbers."""

    status: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    safe_core: dict = field(default_factory=dict)  # check -> margin actually used

    @property
    def passed(self) -> bool:
        return all(v is True for v in self.status.values())

    def __getitem__(self, key):
        return self.status[key]

    def fail(self, name: str, witness) -> None:
        self.status[name] = False
        self.witnesses[name] = witness

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        for attr in ("status", "witnesses", "values", "safe_core"):
            for k, v in getattr(other, attr).items():
                getattr(self, attr)[prefix + k] = v
        return self
