import math

import numpy as np
import pytest

from cmaeig.radial import (
    IntegrationBreakdown,
    RadialSolution,
    certify_convexity,
    conserved_form_residual,
    launch_u,
    ode_rhs_u,
    rescale,
    residual_u,
    shoot,
    solve_lambda,
    solve_lambda_vform,
    step_halving_ratio,
    trajectory,
    v_equation_residual,
    v_profile,
)

LAMBDA_B1 = 2.84459805720644  # frozen from the u-form solve; cross-checked by the v-form below


def test_residual_of_quadratic_ansatz():
    # u = r^2 - 1, lam = 1 at r = 1: u = 0, u' = 2, u'' = 2
    assert residual_u(1.0, 0.0, 2.0, 2.0, 1.0) == pytest.approx(-16.0)


def test_series_start_value():
    lam, u0 = 2.0, -3.0
    a = math.sqrt(lam) * abs(u0)
    # 16 lam u0^2 = 16 a^2 is the matching condition of the series
    assert 16 * lam * u0**2 == pytest.approx(16 * a * a)
    u, p = launch_u(lam, 1e-3, u0)
    assert u == pytest.approx(u0 + a * 1e-6)
    assert p == pytest.approx(2 * a * 1e-3)
    r = 1e-4
    u_r, p_r = launch_u(lam, r, u0)
    assert ode_rhs_u(r, u_r, p_r, lam) == pytest.approx(2 * a, rel=1e-6)


def test_zero_eigenvalue_keeps_u_constant():
    assert shoot(0.0, 1.0) == -1.0
    with pytest.raises(ValueError):
        shoot(-1.0)


def test_breakdown_on_nonpositive_slope():
    with pytest.raises(IntegrationBreakdown):
        ode_rhs_u(0.5, -1.0, 0.0, 1.0)


def test_shoot_monotone_in_lambda():
    values = [shoot(lam, 1.0, 1 / 512) for lam in (1.0, 2.0, 2.8, 2.9, 4.0)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[2] < 0 < values[3]


def test_unit_ball_eigenvalue(radial_unit):
    lam, sol = radial_unit
    assert lam == pytest.approx(LAMBDA_B1, rel=1e-10)
    assert sol.u[0] == -1.0 and sol.uprime[0] == 0.0
    assert abs(sol.u[-1]) <= 1e-10
    assert np.all(np.diff(sol.u) > 0)
    assert np.all(sol.u[:-1] < 0)
    assert sol.Lambda == pytest.approx(16 * lam)


def test_vform_agrees_with_uform(radial_unit):
    lam, _ = radial_unit
    lam_v = solve_lambda_vform(1.0)
    assert abs(lam_v - lam) / lam <= 1e-6


def test_forms_are_independent_routes():
    # at coarse resolution the two discretisations disagree, so they do not share a code path
    coarse_u, _ = solve_lambda(1.0, step=1 / 64)
    coarse_v = solve_lambda_vform(1.0, step=1 / 64)
    assert abs(coarse_u - coarse_v) / coarse_u > 1e-10


def test_step_halving_ratio():
    assert 12 <= step_halving_ratio(LAMBDA_B1) <= 20


def test_conserved_form(radial_unit):
    assert conserved_form_residual(radial_unit[1]) <= 1e-10


def test_v_profile_values(radial_unit):
    _, sol = radial_unit
    v, v1, v2 = v_profile(sol)
    assert v[0] == pytest.approx(2 * math.log(2))
    assert v1[0] == 0.0
    assert v2[0] == pytest.approx(-sol.u_second()[0] / sol.u[0])
    assert v2[0] > 0
    assert np.max(np.abs(v_equation_residual(sol))) <= 1e-8


def test_scaling_law(radial_unit):
    lam1, sol1 = radial_unit
    for R in (0.5, 2.0):
        lam_R, _ = solve_lambda(R)
        assert abs(lam_R * R**4 - lam1) / lam1 <= 1e-6
    dilated = rescale(sol1, 2.0)
    assert dilated.lam == pytest.approx(lam1 / 16)
    # the dilated trajectory satisfies the radius-2 equation
    res = residual_u(dilated.grid[1:], dilated.u[1:], dilated.uprime[1:], dilated.u_second()[1:], dilated.lam)
    scale = 16 * dilated.lam * dilated.u[1:] ** 2 + 2 * dilated.uprime[1:] ** 2 / dilated.grid[1:] ** 2
    assert np.max(np.abs(res) / scale) <= 1e-12


def test_eigenfunction_scale_invariance():
    lam_a, sol_a = solve_lambda(1.0, u0=-1.0)
    lam_b, sol_b = solve_lambda(1.0, u0=-3.0)
    assert lam_b == pytest.approx(lam_a, rel=1e-9)
    assert np.allclose(sol_b.u, 3 * sol_a.u, atol=1e-9)
    c = 2.5
    r, u, p = sol_a.grid[1:], sol_a.u[1:], sol_a.uprime[1:]
    u2 = sol_a.u_second()[1:]
    base = residual_u(r, u + 0.01, p, u2, lam_a)
    scaled = residual_u(r, c * (u + 0.01), c * p, c * u2, lam_a)
    assert np.allclose(scaled, c * c * base, rtol=1e-12, atol=1e-12)


def test_convexity_certificate(radial_unit):
    cert = certify_convexity(radial_unit[1])
    assert cert.ok and cert.min_vpp > 0 and cert.min_hessian_eig > 0
    assert cert.min_vpp == pytest.approx(3.3731872, rel=1e-6)
    with pytest.raises(ValueError):
        certify_convexity(radial_unit[1], margin_radius=1.0)


def test_certificate_rejects_non_solution():
    r = np.linspace(0, 1, 401)
    # u = -cos(pi r / 2)^4 is flat at the centre and has v'' < 0 somewhere
    u = -np.cos(0.5 * math.pi * r) ** 4
    up = 2 * math.pi * np.cos(0.5 * math.pi * r) ** 3 * np.sin(0.5 * math.pi * r)
    fake = RadialSolution(1.0, 1.0, r, u, up)
    _, v1, v2 = v_profile(fake)
    assert np.nanmin(v2[r <= 0.99]) < 0
    assert not certify_convexity(fake).ok


def test_tangential_limit_at_origin(radial_unit):
    _, sol = radial_unit
    _, v1, v2 = v_profile(sol)
    k = 20
    assert v1[k] / sol.grid[k] == pytest.approx(v2[0], rel=1e-3)


def test_trajectory_matches_shoot():
    sol = trajectory(LAMBDA_B1, 1.0, 1 / 256)
    assert sol.u[-1] == pytest.approx(shoot(LAMBDA_B1, 1.0, 1 / 256), abs=1e-15)


def test_bad_arguments():
    with pytest.raises(ValueError):
        solve_lambda(-1.0)
    with pytest.raises(ValueError):
        solve_lambda(1.0, tol=0.0)
    with pytest.raises(ValueError):
        solve_lambda(1.0, u0=1.0)
