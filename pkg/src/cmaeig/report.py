"""Named pass/fail rows shared by the verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    tag: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "tag": self.tag, "status": "pass" if self.passed else "fail",
                "detail": self.detail}


@dataclass
class Verdict:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> str | None:
        for c in self.checks:
            if not c.passed:
                return c.name
        return None

    def __bool__(self):
        return self.ok

    def add(self, name: str, tag: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, tag, bool(passed), detail))
        return bool(passed)

    def extend(self, other: "Verdict") -> "Verdict":
        self.checks.extend(other.checks)
        return self

    def as_list(self) -> list[dict]:
        return [c.as_dict() for c in self.checks]
