"""Symbols, regimes and quadratic forms used by the identity catalog."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from ..cmaop import F_second_partial
from .poly import Poly, RatExpr, variables

v1, v2, v3, v4, d1, d2, d3, d4, lam = variables(
    "v1", "v2", "v3", "v4", "d1", "d2", "d3", "d4", "lam"
)
D = {1: d1, 2: d2, 3: d3, 4: d4}


@dataclass(frozen=True)
class Regime:
    """A minimal-rank regime: bad diagonal entries vanish and lam is forced by F = 0."""

    tag: str
    substitution: Mapping[str, Poly]

    def __call__(self, p):
        return normalize(p, self)


def _sq13():
    return v1**2 + v3**2


def _sq24():
    return v2**2 + v4**2


R2 = Regime(
    "R2",
    {"d3": Poly(), "d4": Poly(), "lam": d1 * d2 - _sq13() * d2 - _sq24() * d1},
)
R3 = Regime(
    "R3",
    {"d4": Poly(), "lam": (d1 + d3) * d2 - _sq24() * (d1 + d3) - _sq13() * d2},
)


def normalize(p, regime: Regime):
    """Apply the regime's substitutions; ``p ~ q`` iff ``normalize(p - q) == 0``."""
    if isinstance(p, RatExpr):
        return p.map(lambda x: x.subs(regime.substitution))
    if isinstance(p, Poly):
        return p.subs(regime.substitution)
    return p


def similar(lhs, rhs, regime: Regime | None) -> bool:
    """Exact equality (regime None) or equality modulo the regime, by cross-multiplication."""
    lhs = RatExpr.lift(lhs)
    rhs = RatExpr.lift(rhs)
    diff = lhs.num * rhs.den - rhs.num * lhs.den
    if regime is not None:
        diff = normalize(diff, regime)
    return diff.is_zero()


@dataclass(frozen=True)
class FExprs:
    """First derivatives of F at a diagonal-Hessian state, as polynomials."""

    F11: Poly
    F22: Poly
    F33: Poly
    F44: Poly
    F12: Poly
    F23: Poly
    a: Poly  # v1^2 + v3^2
    b: Poly  # v2^2 + v4^2

    def matrix(self) -> list[list[Poly]]:
        z = Poly()
        return [
            [self.F11, self.F12, z, -self.F23],
            [self.F12, self.F22, self.F23, z],
            [z, self.F23, self.F33, self.F12],
            [-self.F23, z, self.F12, self.F44],
        ]

    def mutated(self, **changes) -> "FExprs":
        return replace(self, **changes)


def fexprs() -> FExprs:
    a = _sq13()
    b = _sq24()
    F11 = d2 + d4 - b
    F22 = d1 + d3 - a
    return FExprs(
        F11=F11,
        F22=F22,
        F33=F11,
        F44=F22,
        F12=v1 * v2 + v3 * v4,
        F23=-(v1 * v4 - v2 * v3),
        a=a,
        b=b,
    )


def F_diagonal() -> Poly:
    """F at a diagonal Hessian (off-diagonal entries zero), constant lam included."""
    a, b = _sq13(), _sq24()
    return (d1 + d3) * (d2 + d4) - a * (d2 + d4) - b * (d1 + d3) - lam


def third(*idx: int) -> str:
    """Name of the symmetric third derivative v_{ijk}, e.g. third(4, 1, 1) -> 'v114'."""
    return "v" + "".join(str(i) for i in sorted(idx))


@dataclass
class QuadForm:
    """Symmetric quadratic form sum_{m,n} Q[m][n] x_m x_n with RatExpr entries."""

    names: tuple[str, ...]
    Q: list[list[RatExpr]] = field(default=None)

    def __post_init__(self):
        self.names = tuple(self.names)
        if self.Q is None:
            n = len(self.names)
            self.Q = [[RatExpr(0) for _ in range(n)] for _ in range(n)]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def add_term(self, coef, x: str, y: str) -> None:
        """Add ``coef * x * y``."""
        i, j = self.index(x), self.index(y)
        coef = RatExpr.lift(coef)
        if i == j:
            self.Q[i][i] = self.Q[i][i] + coef
        else:
            half = coef * RatExpr(1, 2)
            self.Q[i][j] = self.Q[i][j] + half
            self.Q[j][i] = self.Q[j][i] + half

    def coef(self, x: str, y: str) -> RatExpr:
        """Coefficient of x^2, or of 2xy for x != y (the symmetric matrix entry)."""
        return self.Q[self.index(x)][self.index(y)]

    def scaled(self, c) -> "QuadForm":
        c = RatExpr.lift(c)
        return QuadForm(self.names, [[e * c for e in row] for row in self.Q])

    def substitute(self, name: str, combo: Mapping[str, RatExpr]) -> "QuadForm":
        """Eliminate ``name`` via name = sum_k combo[k] * x_k (k among the other names)."""
        keep = tuple(n for n in self.names if n != name)
        n_old = len(self.names)
        # T maps new coordinates to old ones: x_old = T x_new
        T = [[RatExpr(0) for _ in keep] for _ in range(n_old)]
        for r, old in enumerate(self.names):
            if old == name:
                for c, new in enumerate(keep):
                    if new in combo:
                        T[r][c] = RatExpr.lift(combo[new])
            else:
                T[r][keep.index(old)] = RatExpr(1)
        return QuadForm(keep, congruence(self.Q, T))

    def reordered(self, names: Sequence[str]) -> "QuadForm":
        idx = [self.index(n) for n in names]
        return QuadForm(tuple(names), [[self.Q[i][j] for j in idx] for i in idx])

    def value(self, point: Mapping[str, object]):
        total = RatExpr(0)
        for i, x in enumerate(self.names):
            for j, y in enumerate(self.names):
                total = total + self.Q[i][j] * RatExpr(point[x]) * RatExpr(point[y])
        return total

    def map(self, fn: Callable) -> "QuadForm":
        return QuadForm(self.names, [[e.map(fn) for e in row] for row in self.Q])


def congruence(Q: list[list[RatExpr]], T: list[list[RatExpr]]) -> list[list[RatExpr]]:
    """T^T Q T, skipping structural zeros."""
    n_old = len(Q)
    n_new = len(T[0])
    QT = [[_dot((Q[r][k] for k in range(n_old)), (T[k][c] for k in range(n_old)))
           for c in range(n_new)] for r in range(n_old)]
    return [[_dot((T[k][r] for k in range(n_old)), (QT[k][c] for k in range(n_old)))
             for c in range(n_new)] for r in range(n_new)]


def _dot(xs: Iterable[RatExpr], ys: Iterable[RatExpr]) -> RatExpr:
    total = RatExpr(0)
    for x, y in zip(xs, ys):
        if x.is_zero() or y.is_zero():
            continue
        total = total + x * y
    return total


def third_derivative_form(good: Sequence[int], alpha: int, F: FExprs) -> QuadForm:
    """The third-derivative quadratic form

        sum_{i,j,k,l in G} F^{ij,kl} v_{ij alpha} v_{kl alpha}
          + 2 sum_{beta in G} (1/v_{beta beta}) sum_{i,j in G} F^{ij} v_{alpha beta i} v_{beta alpha j}

    with third derivatives as formal symbols v_{ijk} (fully symmetric).
    Terms carrying v_{alpha alpha i} with alpha bad are dropped (they are ~ 0).
    """
    names = sorted({third(i, j, alpha) for i in good for j in good})
    form = QuadForm(tuple(names))
    for i in good:
        for j in good:
            for k in good:
                for l in good:
                    c = F_second_partial((i, j), (k, l))
                    if c:
                        form.add_term(c, third(i, j, alpha), third(k, l, alpha))
    Fm = F.matrix()
    for beta in good:
        w = RatExpr(2) / D[beta]
        for i in good:
            for j in good:
                fij = Fm[i - 1][j - 1]
                if fij.is_zero():
                    continue
                form.add_term(w * fij, third(alpha, beta, i), third(beta, alpha, j))
    return form


def mat_from(entries, n: int) -> list[list[RatExpr]]:
    return [[RatExpr.lift(entries[i][j]) for j in range(n)] for i in range(n)]


def det(M: list[list[RatExpr]]) -> RatExpr:
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = RatExpr(0)
    for c in range(n):
        if M[0][c].is_zero():
            continue
        minor = [row[:c] + row[c + 1:] for row in M[1:]]
        term = M[0][c] * det(minor)
        total = total + term if c % 2 == 0 else total - term
    return total


def leading_minor(M, k: int) -> RatExpr:
    return det([row[:k] for row in M[:k]])
