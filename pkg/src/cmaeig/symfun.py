"""Elementary symmetric functions of 4x4 (diagonal) Hessians.

Everything here is specialised to n = 4. Diagonal arguments are plain
length-4 sequences and keep their index order: index ``i`` (1-based, as in
the formulas) refers to ``diag[i - 1]``. Only :class:`Spectrum` sorts.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod
from typing import Iterable, Sequence

import numpy as np

N = 4


class InvalidOrderError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a symmetric 4x4 matrix, sorted descending."""

    values: tuple[float, float, float, float]

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        if len(vals) != N:
            raise ValueError(f"a spectrum has exactly {N} entries, got {len(vals)}")
        object.__setattr__(self, "values", tuple(sorted(vals, reverse=True)))

    @classmethod
    def from_matrix(cls, m) -> "Spectrum":
        return cls(tuple(np.linalg.eigvalsh(np.asarray(m, dtype=float))))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return N

    def __getitem__(self, i):
        return self.values[i]


def _entries(diag) -> tuple:
    vals = tuple(diag)
    if len(vals) != N:
        raise ValueError(f"expected {N} diagonal entries, got {len(vals)}")
    return vals


def _check_index(*idx: int) -> None:
    for i in idx:
        if not 1 <= i <= N:
            raise IndexError(f"index {i} outside 1..{N}")


def _sigma_raw(vals: Sequence, k: int):
    if k < -1 or k > N + 1:
        raise InvalidOrderError(f"order k={k} outside -1..{N + 1}")
    if k == 0:
        return 1
    if k < 0 or k > len(vals):
        return 0
    return sum(prod(c) for c in combinations(vals, k))


def sigma(spec, k: int):
    """k-th elementary symmetric function, with sigma_0 = 1 and sigma_{-1} = sigma_5 = 0.

    Works for floats and for exact types (``Fraction``) alike.
    """
    return _sigma_raw(_entries(spec), k)


def sigma_excluding(spec, k: int, excluded: Iterable[int]):
    """sigma_k with the eigenvalues at the (1-based) ``excluded`` indices set to zero."""
    excluded = set(excluded)
    if len(excluded) > 2:
        raise ValueError("at most two excluded indices are supported")
    _check_index(*excluded)
    vals = _entries(spec)
    kept = [x for i, x in enumerate(vals, start=1) if i not in excluded]
    return _sigma_raw(kept, k)


def dsigma(diag, k: int, i: int, j: int):
    """d sigma_k / d A_ij at the diagonal matrix with diagonal ``diag``."""
    _check_index(i, j)
    if i != j:
        return 0
    return sigma_excluding(diag, k - 1, {i})


def d2sigma(diag, k: int, i: int, j: int, p: int, q: int):
    """Second derivative d^2 sigma_k / dA_ij dA_pq at a diagonal matrix."""
    _check_index(i, j, p, q)
    if i == j and p == q and i != p:
        return sigma_excluding(diag, k - 2, {i, p})
    if i == q and j == p and i != p:
        return -sigma_excluding(diag, k - 2, {i, p})
    return 0


def _check_l(l: int) -> None:
    if l not in (2, 3):
        raise ValueError(f"l must be 2 or 3, got {l}")


def q_value(diag, l: int):
    """sigma_{l+2} / sigma_{l+1}, or exactly 0 where sigma_{l+1} vanishes."""
    _check_l(l)
    lower = sigma(diag, l + 1)
    if lower < 0:
        raise DomainError(f"sigma_{l + 1} = {lower} < 0: not a convex state")
    if lower == 0:
        return 0
    return sigma(diag, l + 2) / lower


def phi_value(diag, l: int):
    """The quotient auxiliary function sigma_{l+1} + q."""
    return sigma(diag, l + 1) + q_value(diag, l)


def dq_exact(diag, l: int, i: int):
    """Exact d q / d v_ii at a diagonal state by the quotient rule.

    Undefined where sigma_{l+1} = 0 (the q = 0 branch); that raises.
    """
    _check_l(l)
    _check_index(i)
    lower = sigma(diag, l + 1)
    if lower == 0:
        raise DomainError(f"dq undefined: sigma_{l + 1} = 0")
    if lower < 0:
        raise DomainError(f"sigma_{l + 1} = {lower} < 0: not a convex state")
    upper = sigma(diag, l + 2)
    d_upper = dsigma(diag, l + 2, i, i)
    d_lower = dsigma(diag, l + 1, i, i)
    return (d_upper * lower - upper * d_lower) / lower**2


def dq_leading(bad, i_local: int):
    """Leading-order bad-index derivative (s1(B|i)^2 - s2(B|i)) / s1(B)^2.

    ``bad`` are the bad eigenvalues (any count up to 4) and ``i_local`` the
    0-based position of the differentiated one inside ``bad``.
    """
    bad = list(bad)
    rest = bad[:i_local] + bad[i_local + 1:]
    s1_rest = sum(rest)
    s2_rest = sum(a * b for a, b in combinations(rest, 2))
    return (s1_rest**2 - s2_rest) / sum(bad) ** 2
