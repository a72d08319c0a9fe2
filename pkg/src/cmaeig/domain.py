"""Profile bodies of convex Reinhardt domains in C^2.

A complete Reinhardt domain is {(z1, z2) : (|z1|, |z2|) in D} for a body D
in the closed quarter-plane; it is convex exactly when D, reflected across
both axes, is convex. Profiles are stored through their support function on
[0, pi/2] together with a vectorised gauge (Minkowski functional) of D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline


class DomainError(ValueError):
    pass


HALF_PI = 0.5 * math.pi


def _angle_table(n: int = 4097) -> np.ndarray:
    return np.linspace(0.0, HALF_PI, n)


@dataclass(frozen=True, eq=False)
class ReinhardtProfile:
    """Convex profile body D with support h(theta) and gauge g(r1, r2).

    ``support`` and ``gauge`` are vectorised callables; ``strictly_convex``
    records what the constructor guarantees (checked again by ``curvature_ok``).
    """

    name: str
    support: Callable[[np.ndarray], np.ndarray]
    gauge: Callable[[np.ndarray, np.ndarray], np.ndarray]
    strictly_convex: bool = True
    params: dict = field(default_factory=dict)

    def contains(self, r1, r2) -> np.ndarray:
        return self.gauge(np.abs(np.asarray(r1, float)), np.abs(np.asarray(r2, float))) <= 1.0

    def extent(self) -> float:
        """Largest coordinate reached by D (the support value on the axes)."""
        return float(max(self.support(np.array([0.0]))[0], self.support(np.array([HALF_PI]))[0]))

    def curvature_radius(self, theta=None) -> np.ndarray:
        """h + h'' on a theta grid, by centred differences of the support function."""
        theta = _angle_table(1025) if theta is None else np.asarray(theta, float)
        d = 1e-3
        h0 = self.support(theta)
        hp = self.support(np.clip(theta + d, 0.0, HALF_PI))
        hm = self.support(np.clip(theta - d, 0.0, HALF_PI))
        # reflective symmetry makes h even about 0 and pi/2
        hp = np.where(theta + d > HALF_PI, self.support(np.clip(math.pi - theta - d, 0, HALF_PI)), hp)
        hm = np.where(theta - d < 0.0, self.support(np.abs(theta - d)), hm)
        return h0 + (hp - 2 * h0 + hm) / (d * d)

    def curvature_ok(self) -> bool:
        h = self.support(_angle_table(1025))
        return bool(np.all(h > 0) and np.all(self.curvature_radius() > 0))


def _normals(theta):
    return np.cos(theta), np.sin(theta)


def gauge_from_support(support: Callable, n_table: int = 4097) -> Callable:
    """g(x) = max_theta x.n(theta) / h(theta) for x in the quarter-plane.

    A dense table locates the maximiser; a parabola through the three
    neighbouring samples refines it.
    """
    theta = _angle_table(n_table)
    c, s = _normals(theta)
    h = support(theta)
    step = theta[1] - theta[0]

    def gauge(r1, r2):
        r1 = np.asarray(r1, float)
        r2 = np.asarray(r2, float)
        shape = np.broadcast(r1, r2).shape
        x = np.broadcast_to(r1, shape).reshape(-1)
        y = np.broadcast_to(r2, shape).reshape(-1)
        out = np.empty(x.size)
        for lo in range(0, x.size, 2048):
            xs, ys = x[lo:lo + 2048, None], y[lo:lo + 2048, None]
            vals = (xs * c + ys * s) / h
            k = np.clip(np.argmax(vals, axis=1), 1, theta.size - 2)
            rows = np.arange(vals.shape[0])
            fm, f0, fp = vals[rows, k - 1], vals[rows, k], vals[rows, k + 1]
            denom = fm - 2 * f0 + fp
            with np.errstate(divide="ignore", invalid="ignore"):
                off = np.where(denom < 0, 0.5 * (fm - fp) / denom, 0.0)
            off = np.clip(off, -1.0, 1.0)
            t = theta[k] + off * step
            ct, st = np.cos(t), np.sin(t)
            refined = (xs[:, 0] * ct + ys[:, 0] * st) / support(t)
            out[lo:lo + 2048] = np.maximum(np.max(vals, axis=1), refined)
        return out.reshape(shape)

    return gauge


def profile_ball(R: float = 1.0) -> ReinhardtProfile:
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")

    def support(theta):
        return np.full(np.shape(theta), float(R))

    def gauge(r1, r2):
        return np.hypot(r1, r2) / R

    return ReinhardtProfile(f"ball(R={R})", support, gauge, True, {"type": "ball", "R": R})


def _radial_superellipse(phi, p: float, mu: float, iters: int = 60) -> np.ndarray:
    """rho(phi) with rho^p (|cos|^p + |sin|^p) + mu rho^2 = 1 + mu (unit scale)."""
    a = np.abs(np.cos(phi)) ** p + np.abs(np.sin(phi)) ** p
    rho = np.full(np.shape(phi), 2.0)
    for _ in range(iters):
        f = a * rho**p + mu * rho**2 - (1.0 + mu)
        df = p * a * rho ** (p - 1) + 2.0 * mu * rho
        new = rho - f / df
        if np.all(np.abs(new - rho) <= 1e-15 * rho):  # round-off stalls near one ulp
            rho = new
            break
        rho = new
    return rho


def profile_superellipse(R: float = 1.0, p: float = 4.0, smoothing: float = 0.1) -> ReinhardtProfile:
    """{(r1/R)^p + (r2/R)^p + mu((r1/R)^2 + (r2/R)^2) <= 1 + mu}, mu = ``smoothing``.

    The quadratic term keeps the body strictly convex at the axis points,
    where the plain p > 2 superellipse is flat; p = 2 gives the ball.
    """
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    if p < 2:
        raise DomainError(f"exponent p={p} < 2 is not admissible")
    if smoothing <= 0 and p > 2:
        raise DomainError("p > 2 needs a positive smoothing weight")
    mu = float(smoothing)

    def gauge(r1, r2):
        r1 = np.asarray(r1, float)
        r2 = np.asarray(r2, float)
        return np.hypot(r1, r2) / (R * _radial_superellipse(np.arctan2(r2, r1), p, mu))

    def boundary_point(phi):
        rho = _radial_superellipse(phi, p, mu)
        return rho * np.cos(phi), rho * np.sin(phi)

    def normal_angle(phi):
        x, y = boundary_point(phi)
        gx = p * x ** (p - 1) + 2 * mu * x
        gy = p * y ** (p - 1) + 2 * mu * y
        return np.arctan2(gy, gx)

    def support(theta):
        theta = np.asarray(theta, float)
        if p == 2:
            return np.full(theta.shape, float(R))
        # normal angle is increasing in the polar angle of the boundary point
        lo = np.zeros(theta.shape)
        hi = np.full(theta.shape, HALF_PI)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = normal_angle(mid) < theta
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x, y = boundary_point(0.5 * (lo + hi))
        return R * (x * np.cos(theta) + y * np.sin(theta))

    return ReinhardtProfile(
        f"superellipse(R={R}, p={p})", support, gauge, True,
        {"type": "superellipse", "R": R, "p": p, "smoothing": mu},
    )


def profile_from_samples(theta, h) -> ReinhardtProfile:
    theta = np.asarray(theta, float)
    h = np.asarray(h, float)
    if theta.shape != h.shape or theta.size < 4:
        raise DomainError("support samples need matching theta/h arrays of length >= 4")
    if np.any(np.diff(theta) <= 0) or theta[0] > 0 or theta[-1] < HALF_PI:
        raise DomainError("theta must increase and cover [0, pi/2]")
    if np.any(h <= 0):
        raise DomainError("support values must be positive")
    # even about both ends, matching the reflection symmetry of the body
    spline = CubicSpline(theta, h, bc_type=((1, 0.0), (1, 0.0)))

    def support(t):
        return spline(np.clip(t, 0.0, HALF_PI))

    prof = ReinhardtProfile("support_samples", support, gauge_from_support(support), True,
                            {"type": "support_samples"})
    return prof


@dataclass(frozen=True, eq=False)
class DeformationPath:
    """h_t = (1 - t) h_start + t h_end."""

    end: ReinhardtProfile
    start: ReinhardtProfile = field(default_factory=profile_ball)

    def at(self, t: float) -> ReinhardtProfile:
        return minkowski_interpolate(self, t)


def minkowski_interpolate(path: DeformationPath, t: float) -> ReinhardtProfile:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    if t == 0.0:
        return path.start
    if t == 1.0:
        return path.end
    hs, he = path.start.support, path.end.support

    def support(theta):
        return (1.0 - t) * hs(theta) + t * he(theta)

    return ReinhardtProfile(
        f"minkowski(t={t})", support, gauge_from_support(support),
        path.start.strictly_convex and path.end.strictly_convex,
        {"type": "minkowski", "t": t},
    )


def boundary_distance(prof: ReinhardtProfile, r1, r2, n_table: int = 2049) -> np.ndarray:
    """Signed distance to the boundary of D (positive inside): min_theta h - x.n."""
    theta = _angle_table(n_table)
    c, s = _normals(theta)
    h = prof.support(theta)
    r1 = np.abs(np.asarray(r1, float))
    r2 = np.abs(np.asarray(r2, float))
    shape = np.broadcast(r1, r2).shape
    x = np.broadcast_to(r1, shape).reshape(-1)
    y = np.broadcast_to(r2, shape).reshape(-1)
    out = np.empty(x.size)
    for lo in range(0, x.size, 2048):
        vals = h - (x[lo:lo + 2048, None] * c + y[lo:lo + 2048, None] * s)
        out[lo:lo + 2048] = vals.min(axis=1)
    return out.reshape(shape)


def profile_from_config(spec: dict) -> ReinhardtProfile:
    kind = spec.get("type")
    if kind == "ball":
        return profile_ball(float(spec.get("R", 1.0)))
    if kind == "superellipse":
        return profile_superellipse(float(spec.get("R", 1.0)), float(spec.get("p", 4.0)),
                                    float(spec.get("smoothing", 0.1)))
    if kind == "support_samples":
        return profile_from_samples(spec["theta"], spec["h"])
    raise DomainError(f"unknown profile type {kind!r}")
