"""Eigenpairs of the complex Monge-Ampere operator on Reinhardt domains.

For u = u(r1, r2) with r1 = |z1|, r2 = |z2| the complex Hessian is unitarily
equivalent to (1/4) [[u11 + u1/r1, u12], [u12, u22 + u2/r2]], so

    det(u_{i bar j}) = ((u11 + u1/r1)(u22 + u2/r2) - u12^2) / 16.

The quarter-plane [0, L]^2 is discretised on a uniform grid. Derivatives use
three-point Shortley-Weller stencils along the two axes and the two
diagonals (u12 = (u_xixi - u_etaeta) / 2), with even reflection across the
axes and cut-cell distances to the curved boundary where u = 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .domain import ReinhardtProfile

log = logging.getLogger(__name__)


class NonConvergenceError(RuntimeError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class StencilError(ValueError):
    pass


def reduced_det(u11, u22, u12, u1, u2, r1, r2):
    """det(u_{i bar j}) of u(|z1|, |z2|); u_r/r is replaced by u_rr on an axis."""
    u11, u22, u12, u1, u2, r1, r2 = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (u11, u22, u12, u1, u2, r1, r2))
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        a11 = u11 + np.where(r1 > 0, u1 / np.where(r1 > 0, r1, 1.0), u11)
        a22 = u22 + np.where(r2 > 0, u2 / np.where(r2 > 0, r2, 1.0), u22)
    out = (a11 * a22 - u12 * u12) / 16.0
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# mesh and stencils
# --------------------------------------------------------------------------

SNAP_GAP = 0.02

DIRECTIONS = {"x": (1, 0), "y": (0, 1), "xi": (1, 1), "eta": (1, -1)}


@dataclass(eq=False)
class Mesh:
    profile: ReinhardtProfile
    n: int
    L: float
    h: float
    r1: np.ndarray  # (n, n), axis 0 is the r1 index
    r2: np.ndarray
    gauge: np.ndarray
    interior: np.ndarray  # bool (n, n)
    index: np.ndarray  # unknown number or -1
    ops: dict = field(default_factory=dict)
    # per unknown: shortest distance (in cells) to a boundary crossing of any stencil
    boundary_gap: np.ndarray | None = None

    @property
    def size(self) -> int:
        return int(self.interior.sum())

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.nonzero(self.interior)

    def scatter(self, values, fill=0.0) -> np.ndarray:
        grid = np.full((self.n, self.n), fill, dtype=float)
        grid[self.interior] = values
        return grid


def _crossing(profile, px, py, dx, dy, hi, iters=48):
    """Largest s in (0, hi] with gauge(P + s d) < 1 ... bisected to the boundary."""
    lo = np.zeros_like(px)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = profile.gauge(np.abs(px + mid * dx), np.abs(py + mid * dy)) < 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def build_mesh(profile: ReinhardtProfile, grid_n: int) -> Mesh:
    if grid_n < 5:
        raise ValueError("grid_n too small")
    L = profile.extent() * (1.0 + 1e-9)
    h = L / (grid_n - 1)
    ax = np.arange(grid_n) * h
    r1, r2 = np.meshgrid(ax, ax, indexing="ij")
    gauge = profile.gauge(r1, r2)
    interior = gauge < 1.0
    mesh = _mesh_with(profile, grid_n, L, h, r1, r2, gauge, interior)
    # nodes almost on the boundary make the cut stencils blow up like 1/gap;
    # treat them as boundary nodes (u = 0 there is within SNAP_GAP * h of exact)
    near = mesh.boundary_gap < SNAP_GAP
    if np.any(near):
        I, J = mesh.nodes
        interior = interior.copy()
        interior[I[near], J[near]] = False
        mesh = _mesh_with(profile, grid_n, L, h, r1, r2, gauge, interior)
    return mesh


def _mesh_with(profile, grid_n, L, h, r1, r2, gauge, interior) -> Mesh:
    index = np.full((grid_n, grid_n), -1, dtype=np.int64)
    index[interior] = np.arange(interior.sum())
    mesh = Mesh(profile, grid_n, L, h, r1, r2, gauge, interior, index)
    _build_operators(mesh)
    return mesh


def _neighbour(mesh, I, J, di, dj, sign):
    """Mirror-reduced neighbour indices and whether it is an unknown."""
    n = mesh.n
    ni = np.abs(I + sign * di)
    nj = np.abs(J + sign * dj)
    inside_box = (ni < n) & (nj < n)
    ni_c = np.minimum(ni, n - 1)
    nj_c = np.minimum(nj, n - 1)
    unknown = inside_box & mesh.interior[ni_c, nj_c]
    col = np.where(unknown, mesh.index[ni_c, nj_c], -1)
    return col, unknown


def _arm(mesh, I, J, di, dj, sign):
    """Arm length (in units of the stencil step) and column for one side."""
    col, unknown = _neighbour(mesh, I, J, di, dj, sign)
    s = np.ones(I.shape)
    cut = ~unknown
    if np.any(cut):
        px = mesh.r1[I[cut], J[cut]]
        py = mesh.r2[I[cut], J[cut]]
        # a snapped neighbour still lies inside: the true cut is past it
        ni = np.minimum(np.abs(I[cut] + sign * di), mesh.n - 1)
        nj = np.minimum(np.abs(J[cut] + sign * dj), mesh.n - 1)
        reach = np.where(mesh.gauge[ni, nj] < 1.0, 1.0 + SNAP_GAP, 1.0)
        s[cut] = _crossing(mesh.profile, px, py, sign * di * mesh.h, sign * dj * mesh.h, reach)
        s[cut] = np.maximum(s[cut], 1e-12)
    return s, col


def _build_operators(mesh: Mesh) -> None:
    I, J = mesh.nodes
    rows = mesh.index[I, J]
    m = rows.size
    gap = np.full(m, np.inf)
    for name, (di, dj) in DIRECTIONS.items():
        step = mesh.h * math.hypot(di, dj)
        sr, cr = _arm(mesh, I, J, di, dj, +1)
        sl, cl = _arm(mesh, I, J, di, dj, -1)
        gap = np.minimum(gap, np.where(cr < 0, sr, np.inf))
        gap = np.minimum(gap, np.where(cl < 0, sl, np.inf))
        hr, hl = sr * step, sl * step
        # second derivative
        c_r = 2.0 / (hr * (hl + hr))
        c_l = 2.0 / (hl * (hl + hr))
        c_p = -2.0 / (hl * hr)
        mesh.ops["d2_" + name] = _assemble(m, rows, cr, cl, c_r, c_l, c_p)
        if name in ("x", "y"):
            denom = hl * hr * (hl + hr)
            mesh.ops["d1_" + name] = _assemble(
                m, rows, cr, cl, hl**2 / denom, -(hr**2) / denom, (hr**2 - hl**2) / denom
            )
    mesh.boundary_gap = gap
    r1 = mesh.r1[I, J]
    r2 = mesh.r2[I, J]
    on1 = r1 == 0
    on2 = r2 == 0
    inv1 = sp.diags(np.where(on1, 0.0, 1.0 / np.where(on1, 1.0, r1)))
    inv2 = sp.diags(np.where(on2, 0.0, 1.0 / np.where(on2, 1.0, r2)))
    ax1 = sp.diags(on1.astype(float))
    ax2 = sp.diags(on2.astype(float))
    mesh.ops["A11"] = (mesh.ops["d2_x"] + inv1 @ mesh.ops["d1_x"] + ax1 @ mesh.ops["d2_x"]).tocsr()
    mesh.ops["A22"] = (mesh.ops["d2_y"] + inv2 @ mesh.ops["d1_y"] + ax2 @ mesh.ops["d2_y"]).tocsr()
    mesh.ops["A12"] = (0.5 * (mesh.ops["d2_xi"] - mesh.ops["d2_eta"])).tocsr()
    mesh.ops["d12"] = mesh.ops["A12"]


def _assemble(m, rows, cr, cl, c_r, c_l, c_p):
    r = [rows]
    c = [rows]
    v = [c_p]
    for col, coef in ((cr, c_r), (cl, c_l)):
        ok = col >= 0
        r.append(rows[ok])
        c.append(col[ok])
        v.append(coef[ok])
    return sp.csr_matrix((np.concatenate(v), (np.concatenate(r), np.concatenate(c))), shape=(m, m))


# --------------------------------------------------------------------------
# discrete operator and Newton
# --------------------------------------------------------------------------

def complex_hessian_entries(mesh: Mesh, u: np.ndarray):
    ops = mesh.ops
    return ops["A11"] @ u, ops["A22"] @ u, ops["A12"] @ u


def discrete_det(mesh: Mesh, u: np.ndarray) -> np.ndarray:
    a11, a22, a12 = complex_hessian_entries(mesh, u)
    return (a11 * a22 - a12 * a12) / 16.0


def is_reduced_psh(mesh: Mesh, u: np.ndarray) -> bool:
    a11, a22, a12 = complex_hessian_entries(mesh, u)
    return bool(np.all(a11 > 0) and np.all(a22 > 0) and np.all(a11 * a22 - a12 * a12 > 0))


def _jacobian(mesh: Mesh, u: np.ndarray):
    ops = mesh.ops
    a11, a22, a12 = complex_hessian_entries(mesh, u)
    J = sp.diags(a22) @ ops["A11"] + sp.diags(a11) @ ops["A22"] - 2.0 * sp.diags(a12) @ ops["A12"]
    return (J / 16.0).tocsc()


@dataclass
class NewtonResult:
    u: np.ndarray
    residual: float
    iterations: int
    last_step: float


class _Stall(Exception):
    pass


def _newton_core(mesh, rhs, u, tol, max_iter, max_halvings, stall_step=None):
    res = discrete_det(mesh, u) - rhs
    norm = float(np.max(np.abs(res)))
    last = 0.0
    short = 0
    for it in range(max_iter + 1):
        if norm <= tol:
            return NewtonResult(u, norm, it, last)
        if it == max_iter:
            break
        du = spsolve(_jacobian(mesh, u), -res)
        t = 1.0
        for _ in range(max_halvings):
            cand = u + t * du
            if is_reduced_psh(mesh, cand):
                cres = discrete_det(mesh, cand) - rhs
                cnorm = float(np.max(np.abs(cres)))
                if cnorm < norm:
                    break
            t *= 0.5
        else:
            raise NonConvergenceError(
                f"line search failed at Newton iteration {it} (residual {norm:.3e})", [norm]
            )
        short = short + 1 if t < 0.25 else 0
        if stall_step is not None and short >= stall_step:
            raise _Stall(norm)
        u, res, norm = cand, cres, cnorm
        last = t * float(np.max(np.abs(du)))
    raise NonConvergenceError(f"Newton did not reach {tol:.1e} (residual {norm:.3e})", [norm])


def newton_dirichlet_solve(mesh: Mesh, rhs: np.ndarray, u_init: np.ndarray, tol: float = 1e-10,
                           max_iter: int = 60, max_halvings: int = 40,
                           max_stages: int = 64) -> NewtonResult:
    """Damped Newton for discrete det(u) = rhs with u = 0 on the boundary.

    The line search halves the step until the iterate stays strictly reduced
    plurisubharmonic and the max-norm residual decreases. Near the boundary
    the solution is close to degenerate, so full steps towards a distant rhs
    can be blocked; Newton then falls back to continuation along
    rhs_s = (1 - s) det(u_init) + s rhs, which stays positive.
    """
    rhs = np.asarray(rhs, dtype=float)
    if np.any(rhs <= 0):
        raise ValueError("rhs must be positive at every interior node")
    u = np.array(u_init, dtype=float)
    if not is_reduced_psh(mesh, u):
        raise ValueError("initial guess is not strictly reduced plurisubharmonic")
    try:
        return _newton_core(mesh, rhs, u, tol, max_iter, max_halvings, stall_step=3)
    except (_Stall, NonConvergenceError):
        pass
    base = discrete_det(mesh, u)
    s, ds = 0.0, 0.25
    total = 0
    for _ in range(max_stages):
        target = min(1.0, s + ds)
        stage_rhs = (1.0 - target) * base + target * rhs
        final = target == 1.0
        try:
            res = _newton_core(mesh, stage_rhs, u, tol if final else max(tol, 1e-9), max_iter,
                               max_halvings, stall_step=None if final else 4)
        except (_Stall, NonConvergenceError):
            ds *= 0.5
            if ds < 1e-6:
                break
            continue
        u, s = res.u, target
        total += res.iterations
        if final:
            return NewtonResult(u, res.residual, total, res.last_step)
        ds = min(2.0 * ds, 1.0)
    raise NonConvergenceError(f"rhs continuation stalled at s = {s:.3g}", [s])


# --------------------------------------------------------------------------
# eigenpair
# --------------------------------------------------------------------------

@dataclass(eq=False)
class Grid2DSolution:
    profile: ReinhardtProfile
    mesh: Mesh
    u: np.ndarray  # interior unknowns, sup(-u) = 1
    lam: float
    residual_inf: float
    iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def Lambda(self) -> float:
        return 16.0 * self.lam

    @property
    def u_grid(self) -> np.ndarray:
        return self.mesh.scatter(self.u)

    @classmethod
    def from_field(cls, profile, grid_n: int, u_func, lam: float = float("nan")):
        """Wrap an analytic u(r1, r2) as a solution (used by the detector checks)."""
        mesh = build_mesh(profile, grid_n)
        I, J = mesh.nodes
        u = np.asarray(u_func(mesh.r1[I, J], mesh.r2[I, J]), dtype=float)
        return cls(profile, mesh, u, lam, float("nan"))


def initial_guess(mesh: Mesh) -> np.ndarray:
    """g^2 - 1 with g the gauge of the profile body (sup of -u is 1)."""
    I, J = mesh.nodes
    u = mesh.gauge[I, J] ** 2 - 1.0
    return u / np.max(-u)


def eigen_residual(mesh: Mesh, u: np.ndarray, lam: float) -> float:
    return float(np.max(np.abs(discrete_det(mesh, u) - lam * u * u)))


def inverse_iteration(profile: ReinhardtProfile, grid_n: int = 65, tol: float = 1e-8,
                      inner_tol: float = 1e-10, max_outer: int = 200,
                      u_init: np.ndarray | None = None, mesh: Mesh | None = None,
                      lam_guess: float | None = None) -> Grid2DSolution:
    """Solve det(w) = (-u_k)^2, set m = sup(-w), u_{k+1} = w / m, lam = 1 / m^2."""
    if grid_n < 17:
        raise ValueError("grid_n must be at least 17")
    if tol <= 0:
        raise ValueError("tol must be positive")
    mesh = mesh or build_mesh(profile, grid_n)
    u = initial_guess(mesh) if u_init is None else np.array(u_init, dtype=float)
    u = u / np.max(-u)
    m_prev = 1.0 / math.sqrt(lam_guess) if lam_guess else 1.0
    lam_prev = None
    history = []
    for k in range(1, max_outer + 1):
        # loose inner solves early, tight once lambda settles
        change = history[-1]["change"] if history else 1.0
        inner = max(inner_tol, min(1e-6, 1e-2 * change))
        res = newton_dirichlet_solve(mesh, u * u, m_prev * u, tol=inner)
        m = float(np.max(-res.u))
        u = res.u / m
        lam = 1.0 / m**2
        resid = eigen_residual(mesh, u, lam)
        change = abs(lam - lam_prev) / lam if lam_prev else 1.0
        history.append({"iteration": k, "lambda": lam, "change": change, "residual": resid,
                        "newton": res.iterations})
        log.debug("outer %d: lambda=%.12g change=%.2e residual=%.2e", k, lam, change, resid)
        if lam_prev is not None and change <= tol and resid <= tol:
            return Grid2DSolution(profile, mesh, u, lam, resid, k, history)
        lam_prev, m_prev = lam, m
    raise NonConvergenceError(f"inverse iteration did not converge in {max_outer} steps", history)


# --------------------------------------------------------------------------
# Hessian of v at lifted points
# --------------------------------------------------------------------------

@dataclass
class LiftedHessian:
    """Per-node eigenvalues (descending) of the 4D Hessian of v = -log(-u/4)."""

    eigs: np.ndarray  # (m, 4)
    v: np.ndarray
    gap: np.ndarray  # distance (cells) from the node to the nearest cut in its stencil


def lift_v_hessian_all(sol: Grid2DSolution) -> LiftedHessian:
    mesh, u = sol.mesh, sol.u
    ops = mesh.ops
    I, J = mesh.nodes
    r1 = mesh.r1[I, J]
    r2 = mesh.r2[I, J]
    neg = -u
    with np.errstate(divide="ignore", invalid="ignore"):
        v1 = (ops["d1_x"] @ u) / neg
        v2 = (ops["d1_y"] @ u) / neg
        v11 = (ops["d2_x"] @ u) / neg + v1 * v1
        v22 = (ops["d2_y"] @ u) / neg + v2 * v2
        v12 = (ops["d12"] @ u) / neg + v1 * v2
        t1 = np.where(r1 > 0, v1 / np.where(r1 > 0, r1, 1.0), v11)
        t2 = np.where(r2 > 0, v2 / np.where(r2 > 0, r2, 1.0), v22)
    mean = 0.5 * (v11 + v22)
    rad = np.sqrt(0.25 * (v11 - v22) ** 2 + v12 * v12)
    eigs = np.stack([mean + rad, mean - rad, t1, t2], axis=1)
    eigs = -np.sort(-eigs, axis=1)
    return LiftedHessian(eigs, -np.log(neg / 4.0), mesh.boundary_gap)


def lift_v_hessian(sol: Grid2DSolution, node: tuple[int, int], strict: bool = True) -> np.ndarray:
    """Four eigenvalues (descending) of the Hessian of v at the lift of grid node (i, j)."""
    i, j = node
    k = int(sol.mesh.index[i, j])
    if k < 0:
        raise StencilError(f"node {node} is not interior")
    if strict and np.isfinite(sol.mesh.boundary_gap[k]):
        raise StencilError(f"stencil at node {node} reaches the boundary")
    return lift_v_hessian_all(sol).eigs[k]
