"""Real form of the 2D complex Monge-Ampere operator and the log-transformed operator F.

Coordinate order is fixed everywhere as (x1, x2, y1, y2), so that
v_1 = dv/dx1, v_2 = dv/dx2, v_3 = dv/dy1, v_4 = dv/dy2.

The eigenvalue parameter of F is ``Lambda = 16 * lambda``: substituting
u = -4 exp(-v) into ``det(u_{i bar j}) = lambda (-u)^2`` leaves 16 lambda on the
constant side.

Derivatives of F with respect to Hessian entries use the joint-perturbation
convention: ``F_ij(state)[i, j]`` is defined so that, for a symmetric
perturbation ``dH``, ``dF = sum_ij F^{ij} dH_ij`` over the full index grid.
At diagonal Hessians this reproduces the familiar matrix

    [[F11,  F12,  0,   -F23],
     [F12,  F22,  F23,  0  ],
     [0,    F23,  F11,  F12],
     [-F23, 0,    F12,  F22]].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np


class DomainError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FullState:
    """Gradient and symmetric Hessian of v (or u) at a point of R^4."""

    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grad, dtype=float).reshape(4)
        h = np.asarray(self.hess, dtype=float).reshape(4, 4)
        # single storage of the upper triangle
        upper = np.triu(h)
        h = upper + np.triu(h, 1).T
        object.__setattr__(self, "grad", _frozen(g))
        object.__setattr__(self, "hess", _frozen(h))

    @classmethod
    def diagonal(cls, grad, diag) -> "FullState":
        return cls(grad, np.diag(np.asarray(diag, dtype=float)))


def _bracket(h: np.ndarray) -> float:
    # (h11 + h33)(h22 + h44) - (h12 + h34)(h21 + h43) - (h14 - h32)(h41 - h23), 0-based below
    return (
        (h[0, 0] + h[2, 2]) * (h[1, 1] + h[3, 3])
        - (h[0, 1] + h[2, 3]) * (h[1, 0] + h[3, 2])
        - (h[0, 3] - h[2, 1]) * (h[3, 0] - h[1, 2])
    )


def complex_det_real(u_state: FullState) -> float:
    """det(u_{i bar j}) written through the real 4x4 Hessian of u."""
    return _bracket(u_state.hess) / 16.0


def F_eval(state: FullState, Lambda: float) -> float:
    """The transformed operator F(Hess v, grad v) with constant ``Lambda`` (= 16 lambda)."""
    g, h = state.grad, state.hess
    v1, v2, v3, v4 = g
    return (
        _bracket(h)
        - (v1**2 + v3**2) * (h[1, 1] + h[3, 3])
        - (v2**2 + v4**2) * (h[0, 0] + h[2, 2])
        + (v1 * v2 + v3 * v4) * (h[0, 1] + h[1, 0] + h[2, 3] + h[3, 2])
        + (v1 * v4 - v2 * v3) * (h[0, 3] - h[2, 1] + h[3, 0] - h[1, 2])
        - Lambda
    )


def F_ij(state: FullState) -> np.ndarray:
    """Symmetric matrix of derivatives of F in the Hessian entries."""
    v1, v2, v3, v4 = state.grad
    h = state.hess
    a = v1**2 + v3**2
    b = v2**2 + v4**2
    c = v1 * v2 + v3 * v4
    e = v1 * v4 - v2 * v3
    f11 = h[1, 1] + h[3, 3] - b
    f22 = h[0, 0] + h[2, 2] - a
    f12 = c - (h[0, 1] + h[2, 3])
    f23 = (h[0, 3] - h[1, 2]) - e
    return np.array(
        [
            [f11, f12, 0.0, -f23],
            [f12, f22, f23, 0.0],
            [0.0, f23, f11, f12],
            [-f23, 0.0, f12, f22],
        ]
    )


def F_vk(state: FullState) -> np.ndarray:
    """Gradient of F with respect to (v1, v2, v3, v4)."""
    v1, v2, v3, v4 = state.grad
    h = state.hess
    s11 = h[0, 0] + h[2, 2]
    s22 = h[1, 1] + h[3, 3]
    cc = 2.0 * (h[0, 1] + h[2, 3])
    ee = 2.0 * (h[0, 3] - h[1, 2])
    return np.array(
        [
            -2 * v1 * s22 + v2 * cc + v4 * ee,
            -2 * v2 * s11 + v1 * cc - v3 * ee,
            -2 * v3 * s22 + v4 * cc - v2 * ee,
            -2 * v4 * s11 + v3 * cc + v1 * ee,
        ]
    )


def _second_partial_table() -> dict[tuple[tuple[int, int], tuple[int, int]], int]:
    # F is quadratic in the Hessian entries only through the bracket:
    #   (M11 + M33)(M22 + M44) - (M12 + M34)(M21 + M43) - (M14 - M32)(M41 - M23)
    # with every entry treated as an independent symbol (1-based pairs).
    products = [
        # (coefficient, entry, entry)
        (1, (1, 1), (2, 2)), (1, (1, 1), (4, 4)), (1, (3, 3), (2, 2)), (1, (3, 3), (4, 4)),
        (-1, (1, 2), (2, 1)), (-1, (1, 2), (4, 3)), (-1, (3, 4), (2, 1)), (-1, (3, 4), (4, 3)),
        (-1, (1, 4), (4, 1)), (1, (1, 4), (2, 3)), (1, (3, 2), (4, 1)), (-1, (3, 2), (2, 3)),
    ]
    table = {}
    for coef, p, q in products:
        table[(p, q)] = table.get((p, q), 0) + coef
        table[(q, p)] = table.get((q, p), 0) + coef
    return table


_SECOND_PARTIALS = _second_partial_table()


def F_second_partials() -> Mapping[tuple[tuple[int, int], tuple[int, int]], int]:
    """Constant table of d^2F / dv_ij dv_kl (independent-entry convention, 1-based).

    Keys are ``((i, j), (k, l))``; entries absent from the table are zero.
    """
    return dict(_SECOND_PARTIALS)


def F_second_partial(ij: tuple[int, int], kl: tuple[int, int]) -> int:
    return _SECOND_PARTIALS.get((tuple(ij), tuple(kl)), 0)


def log_transform_u_to_v(u: float, grad_u, hess_u) -> tuple[float, FullState]:
    """v = -log(-u/4) together with its gradient and Hessian."""
    if u >= 0:
        raise DomainError(f"log transform needs u < 0, got {u}")
    grad_u = np.asarray(grad_u, dtype=float)
    hess_u = np.asarray(hess_u, dtype=float)
    v = -np.log(-u / 4.0)
    gv = grad_u / (-u)
    hv = hess_u / (-u) + np.outer(gv, gv)
    return float(v), FullState(gv, hv)


def log_transform_v_to_u(v: float, state: FullState) -> tuple[float, np.ndarray, np.ndarray]:
    """Inverse map: u = -4 exp(-v), u_i = 4 exp(-v) v_i, u_ij = 4 exp(-v)(v_ij - v_i v_j)."""
    scale = 4.0 * np.exp(-v)
    g = state.grad
    return -scale, scale * g, scale * (state.hess - np.outer(g, g))


def ellipticity_min_eig(state: FullState) -> float:
    return float(np.linalg.eigvalsh(F_ij(state))[0])
