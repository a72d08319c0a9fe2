"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from cmaeig.algebra.identities import verify_all
from cmaeig.algebra.sampling import positivity_sample_suite
from cmaeig.analysis import deformation_scan
from cmaeig.checks import derivative_checks, reduction_checks, transform_checks
from cmaeig.domain import DeformationPath, profile_ball, profile_superellipse
from cmaeig.radial import certify_convexity, solve_lambda, solve_lambda_vform, step_halving_ratio
from cmaeig.solver2d import inverse_iteration


@pytest.fixture
def verdict_line(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return emit


def test_criterion_1_exact_algebra(verdict_line):
    t0 = time.perf_counter()
    verdict = verify_all()
    elapsed = time.perf_counter() - t0
    tags = {c.tag for c in verdict.checks}
    bullets = {t for t in tags if t.startswith("Sec3.2.bullet")}
    required = {"Sec3.1.pythagoras", "Eq3.19", "Eq3.31", "Eq3.35", "Eq3.36",
                "Sec3.2.block.congruence", "Claim2.P2", "Claim3.a", "Claim3.b", "Claim3.c", "Claim3.d"}
    ok = (verdict.ok and len(verdict.checks) >= 20 and required <= tags and len(bullets) >= 10
          and elapsed < 10)
    verdict_line(1, ok, f"{len(verdict.checks)} checks, first failure {verdict.first_failure}, {elapsed:.1f} s")
    assert ok


def test_criterion_2_positivity_sampling(verdict_line):
    t0 = time.perf_counter()
    report = positivity_sample_suite(1000, 42)
    elapsed = time.perf_counter() - t0
    ok = report.ok and report.accepted == 1000 and elapsed < 60
    verdict_line(2, ok, f"{report.accepted} samples, violations {report.violations}, {elapsed:.1f} s")
    assert ok


def test_criterion_3_radial_eigenvalue(verdict_line):
    t0 = time.perf_counter()
    lam, _ = solve_lambda(1.0)
    lam_v = solve_lambda_vform(1.0, guess=lam)
    agree = abs(lam_v - lam) / lam
    ratio = step_halving_ratio(lam, 1.0)
    scaling = max(abs(solve_lambda(R)[0] * R**4 - lam) / lam for R in (0.5, 2.0))
    elapsed = time.perf_counter() - t0
    ok = agree <= 1e-6 and 12 <= ratio <= 20 and scaling <= 1e-6 and elapsed < 10
    verdict_line(3, ok, f"lambda {lam:.14g}, u/v agreement {agree:.2e}, halving ratio {ratio:.2f}, "
                        f"scaling {scaling:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_4_radial_convexity_certificate(verdict_line):
    t0 = time.perf_counter()
    certs = [certify_convexity(solve_lambda(R)[1]) for R in (0.5, 1.0, 2.0)]
    elapsed = time.perf_counter() - t0
    min_eig = min(c.min_hessian_eig for c in certs)
    ok = all(c.ok and c.min_vpp > 0 for c in certs) and min_eig > 0 and elapsed < 5
    verdict_line(4, ok, f"min v'' {min(c.min_vpp for c in certs):.6g}, min Hessian eigenvalue {min_eig:.6g}, "
                        f"{elapsed:.1f} s")
    assert ok


def test_criterion_5_reduction_exactness(verdict_line):
    verdict, worst = reduction_checks(1000, seed=0, rtol=1e-12)
    err = max(worst.values())
    ok = verdict.ok and err <= 1e-12
    verdict_line(5, ok, f"worst relative error {err:.2e} over 1000 lifted states")
    assert ok


def test_criterion_6_grid_solver_against_radial(verdict_line, radial_unit, ball_33, ball_65):
    t0 = time.perf_counter()
    lam_radial = radial_unit[0]
    ball_129 = inverse_iteration(profile_ball(1.0), 129)
    elapsed = time.perf_counter() - t0
    errors = [abs(s.lam - lam_radial) / lam_radial for s in (ball_33, ball_65, ball_129)]
    orders = [math.log2(errors[k] / errors[k + 1]) for k in range(2)]
    ok = errors[2] <= 0.02 and min(orders) >= 1.5 and elapsed < 300
    verdict_line(6, ok, "relative errors " + ", ".join(f"{e:.2e}" for e in errors)
                 + f", orders {orders[0]:.2f} {orders[1]:.2f}, 129 solve {elapsed:.0f} s")
    assert ok


@pytest.mark.slow
def test_criterion_7_deformation_scan(verdict_line):
    t0 = time.perf_counter()
    path = DeformationPath(profile_superellipse(1.0, 4.0))
    result = deformation_scan(path, steps=5, grid_n=129)
    elapsed = time.perf_counter() - t0
    steps = result.steps
    ok = (len(steps) == 5 and all(s.converged for s in steps) and result.ok
          and all(s.report.min_rank == 4 and s.report.max_rank == 4 and s.report.interior_min_eig > 0
                  and s.report.strip_ok for s in steps)
          and elapsed < 1800)
    detail = "; ".join(
        f"t={s.t:.2f} " + (f"lambda {s.lam:.6g} rank {s.report.min_rank} min eig {s.report.interior_min_eig:.3g} "
                           f"strip {s.report.strip_ok}" if s.report else f"failed: {s.error}")
        for s in steps)
    verdict_line(7, ok, f"{detail}; {elapsed:.0f} s")
    assert ok


def test_criterion_8_derivative_validation(verdict_line):
    verdict, worst = derivative_checks(100, seed=0, rtol=1e-6)
    pattern = [c for c in verdict.checks if c.tag == "Eq3.32.pattern"]
    ok = verdict.ok and bool(pattern) and all(c.passed for c in pattern)
    verdict_line(8, ok, ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items())))
    assert ok


def test_criterion_9_transform_consistency(verdict_line):
    verdict, worst = transform_checks(100, seed=0, rtol=1e-10, round_trip_tol=1e-12)
    ok = verdict.ok
    verdict_line(9, ok, ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items())))
    assert ok
