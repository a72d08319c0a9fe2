import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmaeig.checks import derivative_checks, lift_radial_pair, reduction_checks, transform_checks


def test_derivative_checks_pass():
    verdict, worst = derivative_checks(count=20, seed=1)
    assert verdict.ok, verdict.first_failure
    assert all(v < 1e-6 for v in worst.values())
    assert {"Eq3.32.Fij", "Eq3.24.Fvk", "Lemma2.1.dsigma", "Lemma2.1.d2sigma", "Lemma2.2.dq"} <= {
        c.tag for c in verdict.checks}


def test_derivative_checks_deterministic():
    a = derivative_checks(count=5, seed=7)[1]
    b = derivative_checks(count=5, seed=7)[1]
    assert a == b


def test_too_tight_tolerance_fails():
    verdict, _ = derivative_checks(count=5, seed=0, rtol=1e-14)
    assert not verdict.ok
    assert verdict.first_failure is not None


def test_transform_and_round_trip():
    verdict, worst = transform_checks(count=50, seed=2)
    assert verdict.ok, verdict.first_failure
    assert max(worst.values()) <= 1e-10


def test_reduction_checks():
    verdict, worst = reduction_checks(count=200, seed=3)
    assert verdict.ok, verdict.first_failure
    assert max(worst.values()) <= 1e-12


def test_lift_radial_pair_round_field():
    # U = s + t = |z|^2: Hessian 2 I, reduced u11 = u22 = 2
    state, red = lift_radial_pair([1, 1, 0, 0, 0], 0.6, 0.3, 0.4, 1.1)
    assert np.allclose(state.hess, 2 * np.eye(4))
    assert red["u11"] == pytest.approx(2.0)
    assert red["u22"] == pytest.approx(2.0)
    assert red["u12"] == pytest.approx(0.0)
    assert red["u1"] == pytest.approx(1.2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=5, max_size=5), st.floats(0.05, 1), st.floats(0.05, 1),
       st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_lift_is_rotation_invariant(c, r1, r2, th1, th2):
    a, _ = lift_radial_pair(c, r1, r2, th1, th2)
    b, _ = lift_radial_pair(c, r1, r2, 0.0, 0.0)
    ea = np.linalg.eigvalsh(a.hess)
    eb = np.linalg.eigvalsh(b.hess)
    assert np.allclose(ea, eb, atol=1e-9 * max(1.0, np.max(np.abs(eb))))
