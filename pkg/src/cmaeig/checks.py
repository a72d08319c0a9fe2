"""Numeric validation suites: finite differences, transform maps, 2D reduction."""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from .cmaop import (
    FullState,
    F_eval,
    F_ij,
    F_vk,
    _bracket,
    complex_det_real,
    log_transform_u_to_v,
    log_transform_v_to_u,
)
from .report import Verdict
from .solver2d import reduced_det
from .symfun import d2sigma, dq_exact, dsigma, q_value

FD_STEP = 1e-4


def _rel(fd, exact) -> float:
    # relative to the exact value, with unit floor so exact zeros are not divided by
    return abs(fd - exact) / max(abs(exact), 1.0)


def random_state(rng: np.random.Generator) -> FullState:
    g = rng.uniform(-1.0, 1.0, 4)
    a = rng.uniform(-1.0, 1.0, (4, 4))
    return FullState(g, a + a.T)


def random_diag(rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.2, 2.0, 4)


def _sigma_general(A, k):
    # char poly coefficients of a general matrix: c_k = (-1)^k sigma_k
    if k < 0 or k > 4:
        return 0.0
    return float((-1) ** k * np.poly(A)[k])


def _check_F_ij(state, Lambda, eps):
    exact = F_ij(state)
    worst = 0.0
    for i in range(4):
        for j in range(i, 4):
            e = np.zeros((4, 4))
            e[i, j] = e[j, i] = 1.0
            plus = F_eval(FullState(state.grad, state.hess + eps * e), Lambda)
            minus = F_eval(FullState(state.grad, state.hess - eps * e), Lambda)
            fd = (plus - minus) / (2 * eps)
            # a joint (i, j), (j, i) perturbation sees both entries
            want = exact[i, i] if i == j else exact[i, j] + exact[j, i]
            worst = max(worst, _rel(fd, want))
    return worst


def _check_F_vk(state, Lambda, eps):
    exact = F_vk(state)
    worst = 0.0
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        fd = (F_eval(FullState(state.grad + eps * e, state.hess), Lambda)
              - F_eval(FullState(state.grad - eps * e, state.hess), Lambda)) / (2 * eps)
        worst = max(worst, _rel(fd, exact[k]))
    return worst


def _check_dsigma(diag, eps):
    worst = 0.0
    base = np.diag(diag)
    for k in range(0, 5):
        for i, j in product(range(1, 5), repeat=2):
            e = np.zeros((4, 4))
            e[i - 1, j - 1] = 1.0
            fd = (_sigma_general(base + eps * e, k) - _sigma_general(base - eps * e, k)) / (2 * eps)
            worst = max(worst, _rel(fd, dsigma(diag, k, i, j)))
    return worst


def _check_d2sigma(diag, eps):
    worst = 0.0
    base = np.diag(diag)
    for k in range(2, 5):
        for i, j, p, q in product(range(1, 5), repeat=4):
            e1 = np.zeros((4, 4))
            e1[i - 1, j - 1] = 1.0
            e2 = np.zeros((4, 4))
            e2[p - 1, q - 1] = 1.0
            f = [_sigma_general(base + a * eps * e1 + b * eps * e2, k)
                 for a, b in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
            fd = (f[0] - f[1] - f[2] + f[3]) / (4 * eps * eps)
            worst = max(worst, _rel(fd, d2sigma(diag, k, i, j, p, q)))
    return worst


def _check_dq(diag, eps):
    worst = 0.0
    for l in (2, 3):
        for i in range(1, 5):
            up = np.array(diag, dtype=float)
            dn = np.array(diag, dtype=float)
            up[i - 1] += eps
            dn[i - 1] -= eps
            fd = (q_value(up, l) - q_value(dn, l)) / (2 * eps)
            worst = max(worst, _rel(fd, dq_exact(diag, l, i)))
    return worst


def _pattern_ok(rng) -> bool:
    for _ in range(20):
        s = FullState.diagonal(rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4))
        m = F_ij(s)
        ok = (m[0, 2] == 0 and m[1, 3] == 0 and m[2, 2] == m[0, 0] and m[3, 3] == m[1, 1]
              and m[2, 3] == m[0, 1] and m[0, 3] == -m[1, 2])
        if not ok:
            return False
    return True


def derivative_checks(count: int = 100, seed: int = 0, rtol: float = 1e-6,
                      eps: float = FD_STEP) -> tuple[Verdict, dict]:
    """Central differences against the closed forms on ``count`` random states."""
    rng = np.random.default_rng(seed)
    worst = {"F_ij": 0.0, "F_vk": 0.0, "dsigma": 0.0, "d2sigma": 0.0, "dq_exact": 0.0}
    for _ in range(count):
        state = random_state(rng)
        Lambda = float(rng.uniform(0.5, 50.0))
        diag = random_diag(rng)
        worst["F_ij"] = max(worst["F_ij"], _check_F_ij(state, Lambda, eps))
        worst["F_vk"] = max(worst["F_vk"], _check_F_vk(state, Lambda, eps))
        worst["dsigma"] = max(worst["dsigma"], _check_dsigma(diag, eps))
        worst["d2sigma"] = max(worst["d2sigma"], _check_d2sigma(diag, eps))
        worst["dq_exact"] = max(worst["dq_exact"], _check_dq(diag, eps))
    out = Verdict()
    tags = {"F_ij": "Eq3.32.Fij", "F_vk": "Eq3.24.Fvk", "dsigma": "Lemma2.1.dsigma",
            "d2sigma": "Lemma2.1.d2sigma", "dq_exact": "Lemma2.2.dq"}
    for name, err in worst.items():
        out.add(f"{name} vs central differences", tags[name], err <= rtol,
                f"max relative error {err:.3e} (tol {rtol:g})")
    out.add("F_ij pattern at diagonal Hessians", "Eq3.32.pattern", _pattern_ok(rng))
    return out, worst


def transform_checks(count: int = 100, seed: int = 0, rtol: float = 1e-10,
                     round_trip_tol: float = 1e-12) -> tuple[Verdict, dict]:
    """E3(u) = 16 exp(-2v) E4(v) with Lambda = 16 lambda, plus u <-> v round trips."""
    rng = np.random.default_rng(seed)
    worst_e = 0.0
    worst_rt = 0.0
    for _ in range(count):
        lam = float(rng.uniform(0.1, 10.0))
        v = float(rng.uniform(-1.0, 2.0))
        state = random_state(rng)
        u, gu, hu = log_transform_v_to_u(v, state)
        e3 = _bracket(np.asarray(hu)) - 16.0 * lam * u * u
        e4 = F_eval(state, 16.0 * lam)
        scale = max(abs(e3), 16.0 * math.exp(-2 * v) * 16.0 * lam)
        worst_e = max(worst_e, abs(e3 - 16.0 * math.exp(-2.0 * v) * e4) / scale)
        v_back, st_back = log_transform_u_to_v(u, gu, hu)
        rt = max(abs(v_back - v), float(np.max(np.abs(st_back.grad - state.grad))),
                 float(np.max(np.abs(st_back.hess - state.hess))))
        worst_rt = max(worst_rt, rt / max(1.0, float(np.max(np.abs(state.hess)))))
    out = Verdict()
    out.add("E3 = 16 exp(-2v) E4 with Lambda = 16 lambda", "Eq2.4.transform", worst_e <= rtol,
            f"max relative error {worst_e:.3e}")
    out.add("u <-> v round trip", "Sec2.2.roundtrip", worst_rt <= round_trip_tol,
            f"max error {worst_rt:.3e}")
    return out, {"transform": worst_e, "round_trip": worst_rt}


def lift_radial_pair(c, r1, r2, th1, th2):
    """4D gradient-free Hessian of U(x) = f(|z1|^2, |z2|^2) for the quadratic-quartic
    f(s, t) = c0 s + c1 t + c2 s^2 + c3 s t + c4 t^2, by the 4D chain rule, together
    with the reduced derivatives (u_11, u_22, u_12, u_1, u_2) in (r1, r2)."""
    c0, c1, c2, c3, c4 = c
    s, t = r1 * r1, r2 * r2
    fs = c0 + 2 * c2 * s + c3 * t
    ft = c1 + c3 * s + 2 * c4 * t
    fss, fst, ftt = 2 * c2, c3, 2 * c4
    # coordinate order (x1, x2, y1, y2)
    x = np.array([r1 * math.cos(th1), r2 * math.cos(th2), r1 * math.sin(th1), r2 * math.sin(th2)])
    grad_s = np.array([2 * x[0], 0.0, 2 * x[2], 0.0])
    grad_t = np.array([0.0, 2 * x[1], 0.0, 2 * x[3]])
    hess_s = np.diag([2.0, 0.0, 2.0, 0.0])
    hess_t = np.diag([0.0, 2.0, 0.0, 2.0])
    H = (fss * np.outer(grad_s, grad_s) + fst * (np.outer(grad_s, grad_t) + np.outer(grad_t, grad_s))
         + ftt * np.outer(grad_t, grad_t) + fs * hess_s + ft * hess_t)
    grad = fs * grad_s + ft * grad_t
    reduced = {
        "u11": 2 * fs + 4 * s * fss,
        "u22": 2 * ft + 4 * t * ftt,
        "u12": 4 * r1 * r2 * fst,
        "u1": 2 * r1 * fs,
        "u2": 2 * r2 * ft,
    }
    return FullState(grad, H), reduced


def reduction_checks(count: int = 1000, seed: int = 0, rtol: float = 1e-12) -> tuple[Verdict, dict]:
    """reduced_det against complex_det_real on random lifted radial-pair states."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        c = rng.uniform(-1.0, 1.0, 5)
        c[0] = abs(c[0]) + 0.1
        c[1] = abs(c[1]) + 0.1
        r1, r2 = rng.uniform(0.0, 1.0, 2)
        th1, th2 = rng.uniform(0.0, 2 * math.pi, 2)
        state, red = lift_radial_pair(c, r1, r2, th1, th2)
        want = complex_det_real(state)
        got = reduced_det(red["u11"], red["u22"], red["u12"], red["u1"], red["u2"], r1, r2)
        scale = max(abs(want), float(np.max(np.abs(state.hess))) ** 2 / 16.0)
        worst = max(worst, abs(got - want) / scale)
    out = Verdict()
    out.add("reduced determinant = complex determinant on lifts", "Eq2.2.reduction",
            worst <= rtol, f"max relative error {worst:.3e}")
    return out, {"reduction": worst}
