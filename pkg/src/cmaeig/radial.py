"""Radial eigenpairs on balls B_R in C^2.

For u = u(r), r = |z|, the equation det(u_{i bar j}) = lambda (-u)^2 becomes

    16 lambda u^2 = 2 u' u'' / r + 2 (u')^2 / r^2,

and v = -log(-u/4) satisfies r v' v'' - r (v')^3 + (v')^2 = 8 lambda r^2.
Both forms are integrated here with classical RK4 from a series launch
off r = 0. The u-form is shot to u(R) = 0; the v-form, written in q = 1/v'
once v' is large, is shot to q(R) = 0. They share no code past the launch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson


class IntegrationBreakdown(ArithmeticError):
    pass


class BracketNotFound(RuntimeError):
    pass


DEFAULT_STEPS = 4096
LAUNCH = 1e-4
BLOWUP = 1e8


def ode_rhs_u(r: float, u: float, uprime: float, lam: float) -> float:
    """u'' solved from the radial equation."""
    if uprime <= 0.0:
        raise IntegrationBreakdown(f"u' = {uprime} <= 0 at r = {r}")
    return (16.0 * lam * u * u - 2.0 * uprime * uprime / (r * r)) * r / (2.0 * uprime)


def residual_u(r, u, uprime, u2, lam):
    """16 lam u^2 - (2 u' u''/r + 2 u'^2/r^2); vectorised."""
    return 16.0 * lam * u**2 - (2.0 * uprime * u2 / r + 2.0 * uprime**2 / r**2)


def launch_u(lam: float, delta: float, u0: float = -1.0) -> tuple[float, float]:
    """Series start u = u0 + sqrt(lam)|u0| r^2 at r = delta."""
    a = math.sqrt(lam) * abs(u0)
    return u0 + a * delta * delta, 2.0 * a * delta


def _rk4_u(lam, R, n, u0, keep):
    delta = LAUNCH * R
    h = (R - delta) / n
    r = delta
    u, p = launch_u(lam, delta, u0)
    rs, us, ps = ([0.0, r], [u0, u], [0.0, p]) if keep else (None, None, None)
    f = ode_rhs_u
    for _ in range(n):
        k1u, k1p = p, f(r, u, p, lam)
        k2u = p + 0.5 * h * k1p
        k2p = f(r + 0.5 * h, u + 0.5 * h * k1u, k2u, lam)
        k3u = p + 0.5 * h * k2p
        k3p = f(r + 0.5 * h, u + 0.5 * h * k2u, k3u, lam)
        k4u = p + h * k3p
        k4p = f(r + h, u + h * k3u, k4u, lam)
        u += h * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
        p += h * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0
        r += h
        if keep:
            rs.append(r)
            us.append(u)
            ps.append(p)
        elif u > BLOWUP * abs(u0):
            # far past the boundary; only the sign matters to the caller
            return u, None
    return u, (rs, us, ps)


def _steps(R: float, step: float | None) -> int:
    if step is None:
        return DEFAULT_STEPS
    if step <= 0:
        raise ValueError("step must be positive")
    return max(1, int(round(R / step)))


def shoot(lam: float, R: float = 1.0, step: float | None = None, u0: float = -1.0) -> float:
    """u(R) for the trajectory launched with u(0) = u0 < 0 and eigenvalue lam."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if lam == 0:
        return u0
    return _rk4_u(lam, R, _steps(R, step), u0, keep=False)[0]


@dataclass(frozen=True, eq=False)
class RadialSolution:
    R: float
    lam: float
    grid: np.ndarray
    u: np.ndarray
    uprime: np.ndarray

    @property
    def Lambda(self) -> float:
        return 16.0 * self.lam

    def u_second(self) -> np.ndarray:
        """u'' from the equation (series value at r = 0)."""
        out = np.empty_like(self.u)
        out[0] = 2.0 * math.sqrt(self.lam) * abs(self.u[0])
        r = self.grid[1:]
        out[1:] = (16.0 * self.lam * self.u[1:] ** 2 - 2.0 * self.uprime[1:] ** 2 / r**2) * r / (
            2.0 * self.uprime[1:]
        )
        return out


def trajectory(lam: float, R: float = 1.0, step: float | None = None, u0: float = -1.0) -> RadialSolution:
    _, (rs, us, ps) = _rk4_u(lam, R, _steps(R, step), u0, keep=True)
    return RadialSolution(R, lam, np.array(rs), np.array(us), np.array(ps))


def _bisect(fn, lo, hi, rel_tol, value_tol=None, max_iter=200):
    """Bisect an increasing fn on [lo, hi] with fn(lo) < 0 < fn(hi)."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = fn(mid)
        if val < 0:
            lo = mid
        else:
            hi = mid
        small = value_tol is None or abs(val) <= value_tol
        if (hi - lo) <= rel_tol * hi and small:
            break
        if hi - lo <= 4 * math.ulp(hi):
            break
    return 0.5 * (lo + hi)


def _bracket(fn, guess, factor=4.0, cap=60):
    lo = hi = guess
    for _ in range(cap):
        if fn(lo) < 0:
            break
        lo /= factor
    else:
        raise BracketNotFound("no lower bracket for lambda")
    for _ in range(cap):
        if fn(hi) > 0:
            break
        hi *= factor
    else:
        raise BracketNotFound("no upper bracket for lambda")
    return lo, hi


def solve_lambda(R: float = 1.0, tol: float = 1e-10, step: float | None = None,
                 u0: float = -1.0, rel_tol: float = 1e-12, guess: float | None = None):
    """Eigenvalue of B_R by bisection on u(R; lam) = 0; returns (lam, RadialSolution)."""
    if R <= 0:
        raise ValueError("R must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if u0 >= 0:
        raise ValueError("u0 must be negative")

    def fn(lam):
        return shoot(lam, R, step, u0) / abs(u0)

    lo, hi = _bracket(fn, guess or 1.0 / R**4)
    lam = _bisect(fn, lo, hi, rel_tol, value_tol=tol)
    return lam, trajectory(lam, R, step, u0)


# v-form -------------------------------------------------------------------

def vform_boundary_value(lam: float, R: float = 1.0, step: float | None = None,
                         switch: float = 1.0) -> float:
    """q(R) for q = 1/v', integrating p = v' until p > switch and q afterwards.

    Positive when v stays finite on [0, R] (lam too small); negative when
    v blows up inside (lam too large). The eigenvalue is the root.
    """
    n = _steps(R, step)
    delta = LAUNCH * R
    h = (R - delta) / n
    r = delta
    p = 2.0 * math.sqrt(lam) * delta  # v''(0) = 2 sqrt(lam)

    def fp(r, p):
        return (8.0 * lam * r * r + r * p**3 - p * p) / (r * p)

    def fq(r, q):
        return -1.0 + q / r - 8.0 * lam * r * q**3

    k = 0
    while k < n and p <= switch:
        k1 = fp(r, p)
        k2 = fp(r + 0.5 * h, p + 0.5 * h * k1)
        k3 = fp(r + 0.5 * h, p + 0.5 * h * k2)
        k4 = fp(r + h, p + h * k3)
        p += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        r += h
        k += 1
    q = 1.0 / p
    while k < n:
        k1 = fq(r, q)
        k2 = fq(r + 0.5 * h, q + 0.5 * h * k1)
        k3 = fq(r + 0.5 * h, q + 0.5 * h * k2)
        k4 = fq(r + h, q + h * k3)
        q += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        r += h
        k += 1
        if q < -R:
            break
    return q


def solve_lambda_vform(R: float = 1.0, step: float | None = None, rel_tol: float = 1e-12,
                       guess: float | None = None) -> float:
    def fn(lam):
        # decreasing in lam; flip the sign for the bisection helper
        return -vform_boundary_value(lam, R, step)

    lo, hi = _bracket(fn, guess or 1.0 / R**4)
    return _bisect(fn, lo, hi, rel_tol)


# derived quantities ------------------------------------------------------

def v_profile(sol: RadialSolution):
    """(v, v', v'') of v = -log(-u/4); inf where u >= 0."""
    u = sol.u
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(u < 0, -u, np.nan)
        v = np.where(u < 0, -np.log(neg / 4.0), np.inf)
        v1 = sol.uprime / neg
        v2 = sol.u_second() / neg + v1**2
    return v, v1, v2


def v_equation_residual(sol: RadialSolution, upto: float | None = None) -> np.ndarray:
    """r v' v'' - r v'^3 + v'^2 - 8 lam r^2, scaled by the largest term at each r."""
    _, v1, v2 = v_profile(sol)
    r = sol.grid
    mask = r <= (upto if upto is not None else 0.99 * sol.R)
    r, v1, v2 = r[mask], v1[mask], v2[mask]
    terms = np.abs(np.stack([r * v1 * v2, r * v1**3, v1**2, 8 * sol.lam * r**2]))
    scale = np.maximum(terms.max(axis=0), 1e-300)
    res = r * v1 * v2 - r * v1**3 + v1**2 - 8.0 * sol.lam * r**2
    return np.where(terms.max(axis=0) > 0, res / scale, 0.0)


def conserved_form_residual(sol: RadialSolution) -> float:
    """max |r^2 u'^2 - 16 lam int_0^r u^2 s^3 ds| relative to max r^2 u'^2."""
    r = sol.grid
    lhs = r**2 * sol.uprime**2
    integral = cumulative_simpson(16.0 * sol.lam * sol.u**2 * r**3, x=r, initial=0.0)
    return float(np.max(np.abs(lhs - integral)) / np.max(np.abs(lhs)))


def step_halving_ratio(lam: float, R: float = 1.0, coarse_steps: int = 32) -> float:
    """|u_h - u_{h/2}| / |u_{h/2} - u_{h/4}| at r = R (16 for a 4th-order method)."""
    a = shoot(lam, R, R / coarse_steps)
    b = shoot(lam, R, R / (2 * coarse_steps))
    c = shoot(lam, R, R / (4 * coarse_steps))
    return abs(a - b) / abs(b - c)


def rescale(sol: RadialSolution, R_new: float) -> RadialSolution:
    """Dilate a ball solution: u_R(r) = u(r R / R_new), lam_R = lam (R / R_new)^4."""
    s = R_new / sol.R
    return RadialSolution(R_new, sol.lam / s**4, sol.grid * s, sol.u.copy(), sol.uprime / s)


@dataclass(frozen=True)
class ConvexityCertificate:
    ok: bool
    min_vpp: float
    min_hessian_eig: float
    points: int


def certify_convexity(sol: RadialSolution, margin_radius: float | None = None) -> ConvexityCertificate:
    """v'' > 0 on [0, margin] and the lifted 4D Hessian {v'', v'/r (x3)} positive."""
    margin = 0.99 * sol.R if margin_radius is None else margin_radius
    if margin >= sol.R:
        raise ValueError("margin_radius must be below R")
    _, v1, v2 = v_profile(sol)
    mask = sol.grid <= margin
    r = sol.grid[mask]
    vpp = v2[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.where(r > 0, v1[mask] / np.where(r > 0, r, 1.0), vpp)
    eig = np.minimum(vpp, tangential)
    min_vpp = float(np.min(vpp))
    min_eig = float(np.min(eig))
    return ConvexityCertificate(bool(min_vpp > 0 and min_eig > 0), min_vpp, min_eig, int(mask.sum()))
