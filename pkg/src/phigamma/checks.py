from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named verification."""

    name: str
    passed: bool
    witness: str | None = None

    def as_dict(self) -> dict:
        d = {"name": self.name, "status": "pass" if self.passed else "fail"}
        if self.witness is not None:
            d["witness"] = self.witness
        return d
