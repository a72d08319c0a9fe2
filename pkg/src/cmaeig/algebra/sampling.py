"""Exact rational sampling of the minimal-rank-3 matrix and its block minors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .forms import R3, fexprs
from .identities import block_A1, block_A2, build_matrix_A, reduce_A

MINORS = ("P1(A1)", "P2(A1)", "P1(A2)", "P2(A2)", "P3(A2)")


@dataclass
class SampleReport:
    seed: int
    requested: int
    accepted: int = 0
    rejected: int = 0
    violations: dict = field(default_factory=lambda: {m: 0 for m in MINORS})
    reduced_minor_violations: int = 0
    min_values: dict = field(default_factory=dict)
    first_violation: dict | None = None

    @property
    def ok(self) -> bool:
        return not any(self.violations.values()) and self.reduced_minor_violations == 0

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "requested": self.requested,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "violations": dict(self.violations),
            "reduced_minor_violations": self.reduced_minor_violations,
            "min_values": {k: float(v) for k, v in sorted(self.min_values.items())},
            "first_violation": self.first_violation,
            "ok": self.ok,
        }


def sample_point(seed: int, index: int) -> dict:
    """Rational (v, diag) draw; a pure function of (seed, index).

    v_k in [-2, 2] and v_ii in [1/4, 4], both on a 1/64 lattice; v44 = 0.
    """
    rng = np.random.default_rng([seed, index])
    grad = [Fraction(int(k), 64) for k in rng.integers(-128, 129, size=4)]
    diag = [Fraction(int(k), 64) for k in rng.integers(16, 257, size=3)]
    point = dict(zip(("v1", "v2", "v3", "v4"), grad))
    point.update(d1=diag[0], d2=diag[1], d3=diag[2], d4=Fraction(0))
    point["lam"] = R3.substitution["lam"].eval(point)
    return point


def _det(M) -> Fraction:
    # fraction-exact Gaussian elimination
    M = [list(r) for r in M]
    n = len(M)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            out = -out
        out *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return out


def _leading(M, k):
    return _det([row[:k] for row in M[:k]])


class _Tables:
    def __init__(self):
        F = fexprs()
        self.A1 = block_A1(F)
        self.A2 = block_A2(F)
        self.Ared = reduce_A(F, build_matrix_A(F))

    @staticmethod
    def at(M, point):
        return [[e.eval(point) for e in row] for row in M]


def evaluate_minors(point: dict, tables: "_Tables | None" = None) -> dict:
    """Exact leading minors of A1, A2 and of the reduced matrix A' at one sample."""
    tables = tables or _Tables()
    A1 = tables.at(tables.A1, point)
    A2 = tables.at(tables.A2, point)
    Ared = tables.at(tables.Ared, point)
    return {
        "P1(A1)": _leading(A1, 1),
        "P2(A1)": _leading(A1, 2),
        "P1(A2)": _leading(A2, 1),
        "P2(A2)": _leading(A2, 2),
        "P3(A2)": _leading(A2, 3),
        "reduced": [_leading(Ared, k) for k in range(1, 6)],
    }


def _violated(name: str, val) -> bool:
    return val < 0 if name == "P3(A2)" else val <= 0


def positivity_sample_suite(count: int = 1000, seed: int = 42) -> SampleReport:
    """Collect ``count`` admissible samples (lam > 0) and test the minor signs exactly."""
    if count < 1:
        raise ValueError("count must be at least 1")
    tables = _Tables()
    F = fexprs()
    report = SampleReport(seed=seed, requested=count)
    index = 0
    while report.accepted < count:
        point = sample_point(seed, index)
        index += 1
        if point["lam"] <= 0:
            report.rejected += 1
            continue
        report.accepted += 1
        values = evaluate_minors(point, tables)
        bad = [name for name in MINORS if _violated(name, values[name])]
        if F.F11.eval(point) <= 0 or F.F22.eval(point) <= 0:
            bad.append("F11, F22 > 0")
        for name in MINORS:
            prev = report.min_values.get(name)
            report.min_values[name] = values[name] if prev is None else min(prev, values[name])
        if any(m < 0 for m in values["reduced"]):
            report.reduced_minor_violations += 1
            bad.append("reduced minors")
        for name in bad:
            report.violations[name] = report.violations.get(name, 0) + 1
        if bad and report.first_violation is None:
            report.first_violation = {
                "index": index - 1,
                "failed": bad,
                "point": {k: str(v) for k, v in sorted(point.items())},
            }
    return report
