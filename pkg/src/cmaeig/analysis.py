"""Convexity and rank certification of computed eigenfunctions.

All checks work on v = -log(-u/4) through the 4D Hessian of its lift to C^2,
evaluated node by node. The interior region Omega_eps keeps the nodes whose
distance to the boundary exceeds eps (default two grid cells).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmaop import FullState, F_ij
from .domain import DeformationPath, ReinhardtProfile, boundary_distance
from .solver2d import Grid2DSolution, NonConvergenceError, inverse_iteration, lift_v_hessian_all
from .symfun import DomainError, phi_value

log = logging.getLogger(__name__)

TAU_RANK = 1e-6
SCALE_FLOOR = 1e-12


class ConfigurationError(ValueError):
    pass


def rank_of(eigs: np.ndarray, tau_rank: float = TAU_RANK, floor: float = SCALE_FLOOR) -> np.ndarray:
    """Count of eigenvalues above tau * max(largest eigenvalue, floor), row by row."""
    eigs = np.atleast_2d(eigs)
    scale = np.maximum(eigs.max(axis=1), floor)
    return (eigs > tau_rank * scale[:, None]).sum(axis=1)


@dataclass
class SpectralReport:
    r1: np.ndarray
    r2: np.ndarray
    eigs: np.ndarray  # (m, 4), descending
    rank: np.ndarray
    eps: float
    tau_rank: float
    strip_ok: bool | None = None
    t: float | None = None

    @property
    def min_eig(self) -> np.ndarray:
        return self.eigs[:, -1]

    @property
    def count(self) -> int:
        return int(self.rank.size)

    @property
    def interior_min_eig(self) -> float:
        return float(self.min_eig.min())

    @property
    def min_rank(self) -> int:
        return int(self.rank.min())

    @property
    def max_rank(self) -> int:
        return int(self.rank.max())

    @property
    def log_concave(self) -> bool:
        return bool(np.all(np.isfinite(self.eigs)) and self.interior_min_eig > 0)

    def summary(self) -> dict:
        return {
            "nodes": self.count,
            "eps": self.eps,
            "tau_rank": self.tau_rank,
            "interior_min_eig": self.interior_min_eig,
            "min_rank": self.min_rank,
            "max_rank": self.max_rank,
            "log_concave": self.log_concave,
            "strip_ok": self.strip_ok,
        }

    def rows(self):
        t = self.t if self.t is not None else 0.0
        for k in range(self.count):
            e = self.eigs[k]
            yield [t, self.r1[k], self.r2[k], e[0], e[1], e[2], e[3], int(self.rank[k]), e[3]]


CSV_COLUMNS = ["t", "r1", "r2", "eig1", "eig2", "eig3", "eig4", "rank", "min_eig"]


def _distances(sol: Grid2DSolution) -> np.ndarray:
    I, J = sol.mesh.nodes
    return boundary_distance(sol.profile, sol.mesh.r1[I, J], sol.mesh.r2[I, J])


def _eps(sol, eps):
    return 2.0 * sol.mesh.h if eps is None else float(eps)


def spectral_scan(sol: Grid2DSolution, eps: float | None = None, tau_rank: float = TAU_RANK,
                  with_strip: bool = True) -> SpectralReport:
    eps = _eps(sol, eps)
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    if not 0 < tau_rank < 1:
        raise ConfigurationError("tau_rank must lie in (0, 1)")
    lifted = lift_v_hessian_all(sol)
    keep = _distances(sol) > eps
    if not np.any(keep):
        raise ConfigurationError(f"no grid nodes deeper than eps = {eps:g}; refine the grid")
    I, J = sol.mesh.nodes
    eigs = lifted.eigs[keep]
    report = SpectralReport(
        sol.mesh.r1[I, J][keep], sol.mesh.r2[I, J][keep], eigs, rank_of(eigs, tau_rank),
        eps, tau_rank,
    )
    if with_strip:
        report.strip_ok = strip_check(sol, eps, tau_rank)
    return report


def strip_check(sol: Grid2DSolution, eps: float | None = None, tau_rank: float = TAU_RANK) -> bool:
    """Full rank and positive Hessian of v at every strip node with a usable stencil."""
    eps = _eps(sol, eps)
    eigs = lift_v_hessian_all(sol).eigs
    strip = _distances(sol) <= eps
    if eps >= inradius(sol):
        strip = np.ones_like(strip)
    usable = strip & np.all(np.isfinite(eigs), axis=1)
    if not np.any(usable):
        return True
    e = eigs[usable]
    return bool(np.all(e[:, -1] > 0) and np.all(rank_of(e, tau_rank) == 4))


def inradius(sol: Grid2DSolution) -> float:
    return float(boundary_distance(sol.profile, 0.0, 0.0))


def ray_monotonicity(sol: Grid2DSolution, rays: int = 16, samples: int = 64) -> bool:
    """u has its minimum inside and increases outward along rays from the origin."""
    from scipy.interpolate import RegularGridInterpolator

    ax = np.arange(sol.mesh.n) * sol.mesh.h
    interp = RegularGridInterpolator((ax, ax), sol.u_grid, bounds_error=False, fill_value=0.0)
    ok = True
    for ang in np.linspace(0.0, 0.5 * math.pi, rays):
        d = np.array([math.cos(ang), math.sin(ang)])
        reach = float(sol.profile.support(np.array([ang]))[0])
        s = np.linspace(0.0, reach, samples)
        vals = interp(np.stack([s * d[0], s * d[1]], axis=1))
        ok &= bool(np.all(np.diff(vals) >= -1e-12))
    I, J = sol.mesh.nodes
    k = int(np.argmin(sol.u))
    return ok and sol.mesh.index[I[k], J[k]] >= 0


# --------------------------------------------------------------------------
# phi diagnostics
# --------------------------------------------------------------------------

def _grid_derivatives(mesh, field_grid):
    """Centred first and second differences with even reflection at the axes; NaN near the boundary."""
    h = mesh.h
    f = np.pad(field_grid, 1, mode="constant", constant_values=np.nan)
    f[0, 1:-1] = field_grid[1, :]
    f[1:-1, 0] = field_grid[:, 1]
    f[0, 0] = field_grid[1, 1]
    c = f[1:-1, 1:-1]
    fxp, fxm = f[2:, 1:-1], f[:-2, 1:-1]
    fyp, fym = f[1:-1, 2:], f[1:-1, :-2]
    d1 = (fxp - fxm) / (2 * h)
    d2 = (fyp - fym) / (2 * h)
    d11 = (fxp - 2 * c + fxm) / h**2
    d22 = (fyp - 2 * c + fym) / h**2
    d12 = (f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]) / (4 * h * h)
    return d1, d2, d11, d22, d12


def _lifted_state(g1, g2, h11, h22, h12, r1, r2) -> FullState:
    # coordinate order (x1, x2, y1, y2) at the lifted point (r1, r2, 0, 0)
    t1 = g1 / r1 if r1 > 0 else h11
    t2 = g2 / r2 if r2 > 0 else h22
    hess = np.array([
        [h11, h12, 0.0, 0.0],
        [h12, h22, 0.0, 0.0],
        [0.0, 0.0, t1, 0.0],
        [0.0, 0.0, 0.0, t2],
    ])
    return FullState([g1, g2, 0.0, 0.0], hess)


@dataclass
class PhiField:
    l: int
    phi: np.ndarray  # grid, NaN outside
    grad_norm: np.ndarray
    combination: np.ndarray
    ratio: np.ndarray
    floor: float

    def summary(self) -> dict:
        fin = np.isfinite(self.phi)
        rfin = np.isfinite(self.ratio)
        return {
            "l": self.l,
            "phi_min": float(np.nanmin(self.phi)) if fin.any() else None,
            "phi_max": float(np.nanmax(self.phi)) if fin.any() else None,
            "ratio_max": float(np.nanmax(self.ratio)) if rfin.any() else None,
            "binding": bool(rfin.any() and np.nanmax(self.ratio) > 0),
        }


def _safe_phi(e, l):
    try:
        return float(phi_value(e, l))
    except DomainError:
        return float("nan")


def phi_field(sol: Grid2DSolution, l: int, tau_rank: float = TAU_RANK, floor: float = 1e-8) -> PhiField:
    """phi = sigma_{l+1} + sigma_{l+2}/sigma_{l+1} of the Hessian of v, with |grad phi|
    and sum F^{ij} phi_ij. Diagnostic only."""
    if l not in (2, 3):
        raise ConfigurationError("l must be 2 or 3")
    mesh = sol.mesh
    eigs = lift_v_hessian_all(sol).eigs
    scale = np.maximum(eigs[:, :1], SCALE_FLOOR)
    eigs = np.where(np.abs(eigs) <= tau_rank * scale, 0.0, eigs)
    phi_nodes = np.array([_safe_phi(e, l) for e in eigs])
    phi = mesh.scatter(phi_nodes, fill=np.nan)
    d1, d2, d11, d22, d12 = _grid_derivatives(mesh, phi)
    grad = np.hypot(d1, d2)

    u = mesh.scatter(sol.u, fill=np.nan)
    u1, u2, u11, u22, u12 = _grid_derivatives(mesh, u)
    comb = np.full_like(phi, np.nan)
    I, J = mesh.nodes
    for i, j in zip(I, J):
        if not np.isfinite(d11[i, j] + d22[i, j] + d12[i, j] + u11[i, j] + u22[i, j] + u12[i, j]):
            continue
        neg = -u[i, j]
        g1, g2 = u1[i, j] / neg, u2[i, j] / neg
        v_state = _lifted_state(g1, g2, u11[i, j] / neg + g1 * g1, u22[i, j] / neg + g2 * g2,
                                u12[i, j] / neg + g1 * g2, mesh.r1[i, j], mesh.r2[i, j])
        p_state = _lifted_state(d1[i, j], d2[i, j], d11[i, j], d22[i, j], d12[i, j],
                                mesh.r1[i, j], mesh.r2[i, j])
        comb[i, j] = float(np.sum(F_ij(v_state) * p_state.hess))
    denom = phi + grad
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(denom > floor, comb / denom, np.nan)
    return PhiField(l, phi, grad, comb, ratio, floor)


# --------------------------------------------------------------------------
# deformation scan
# --------------------------------------------------------------------------

@dataclass
class ScanStep:
    t: float
    converged: bool
    lam: float | None = None
    report: SpectralReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        r = self.report
        return bool(self.converged and r is not None and r.min_rank == 4 and r.log_concave
                     and r.strip_ok is not False)

    def summary(self) -> dict:
        out = {"t": self.t, "converged": self.converged, "ok": self.ok, "lambda": self.lam,
               "error": self.error}
        if self.report is not None:
            out.update(self.report.summary())
        return out


@dataclass
class DeformationResult:
    steps: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.steps) and all(s.ok for s in self.steps)

    @property
    def first_failure(self) -> float | None:
        for s in self.steps:
            if not s.ok:
                return s.t
        return None


def _default_solver(profile: ReinhardtProfile, grid_n: int, lam_guess: float | None, tol: float):
    return inverse_iteration(profile, grid_n, tol=tol, lam_guess=lam_guess)


def deformation_scan(path: DeformationPath, steps: int = 5, grid_n: int = 65,
                     eps: float | None = None, tau_rank: float = TAU_RANK, tol: float = 1e-8,
                     solver: Callable | None = None) -> DeformationResult:
    """Solve on Omega_t for t on a uniform grid of [0, 1] and scan each solution.

    Each solve is seeded with the previous eigenvalue. ``solver`` may replace
    the eigen-solver (signature ``(profile, grid_n, lam_guess, tol)``).
    """
    if steps < 2:
        raise ConfigurationError("steps must be at least 2")
    solver = solver or _default_solver
    out = DeformationResult()
    lam_guess = None
    for t in np.linspace(0.0, 1.0, steps):
        t = float(t)
        prof = path.at(t)
        try:
            sol = solver(prof, grid_n, lam_guess, tol)
        except NonConvergenceError as exc:
            out.steps.append(ScanStep(t, False, error=str(exc)))
            log.warning("t=%.3f: %s", t, exc)
            continue
        report = spectral_scan(sol, eps, tau_rank)
        report.t = t
        if np.isfinite(sol.lam):
            lam_guess = sol.lam
        out.steps.append(ScanStep(t, True, sol.lam, report))
        log.info("t=%.3f lambda=%.8g min_eig=%.4g rank=%d", t, sol.lam,
                 report.interior_min_eig, report.min_rank)
    return out
