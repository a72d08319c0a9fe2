from fractions import Fraction
from itertools import combinations
from math import prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmaeig.symfun import (
    DomainError,
    InvalidOrderError,
    Spectrum,
    d2sigma,
    dq_exact,
    dq_leading,
    dsigma,
    phi_value,
    q_value,
    sigma,
    sigma_excluding,
)

entry = st.floats(-2.0, 2.0, allow_nan=False)
diag4 = st.tuples(entry, entry, entry, entry)
nonneg4 = st.tuples(*[st.floats(0.0, 3.0)] * 4)


def sigma_general(matrix, k):
    # characteristic polynomial coefficients of a general 4x4 matrix
    return (-1) ** k * np.poly(matrix)[k]


def test_sigma_examples():
    assert sigma((1, 2, 3, 0), 2) == 11
    assert sigma((1, 1, 1, 1), 4) == 1
    assert sigma((3, 2, 1, 0), 3) == 6


def test_sigma_boundary_orders():
    assert sigma((1, 2, 3, 4), 0) == 1
    assert sigma((1, 2, 3, 4), -1) == 0
    assert sigma((1, 2, 3, 4), 5) == 0
    with pytest.raises(InvalidOrderError):
        sigma((1, 2, 3, 4), 6)
    with pytest.raises(InvalidOrderError):
        sigma((1, 2, 3, 4), -2)


def test_sigma_is_exact_on_fractions():
    vals = (Fraction(1, 3), Fraction(2, 5), Fraction(-1, 7), Fraction(3))
    want = sum(prod(c) for c in combinations(vals, 2))
    assert sigma(vals, 2) == want
    assert isinstance(sigma(vals, 2), Fraction)


def test_spectrum_sorts_descending():
    s = Spectrum((1.0, 4.0, -2.0, 3.0))
    assert s.values == (4.0, 3.0, 1.0, -2.0)
    assert sigma(s, 1) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        Spectrum((1.0, 2.0, 3.0))


def test_spectrum_from_matrix():
    m = np.array([[2.0, 1.0, 0, 0], [1.0, 2.0, 0, 0], [0, 0, 5.0, 0], [0, 0, 0, -1.0]])
    assert Spectrum.from_matrix(m).values == pytest.approx((5.0, 3.0, 1.0, -1.0))


def test_sigma_excluding_examples():
    assert sigma_excluding((1, 2, 3, 4), 2, {1}) == 26
    assert sigma_excluding((1, 2, 3, 4), 1, {1, 2}) == 7
    assert sigma_excluding((5, 0, 0, 0), 1, {1}) == 0
    with pytest.raises(ValueError):
        sigma_excluding((1, 2, 3, 4), 1, {1, 2, 3})
    with pytest.raises(IndexError):
        sigma_excluding((1, 2, 3, 4), 1, {5})


def test_dsigma_examples():
    assert dsigma((1, 2, 3, 4), 3, 1, 1) == 26
    assert dsigma((1, 2, 3, 4), 3, 1, 2) == 0
    assert dsigma((1, 1, 1, 1), 1, 2, 2) == 1


def test_d2sigma_examples():
    assert d2sigma((1, 2, 3, 4), 3, 1, 1, 2, 2) == 7
    assert d2sigma((1, 2, 3, 4), 3, 1, 2, 2, 1) == -7
    assert d2sigma((1, 2, 3, 4), 3, 1, 1, 1, 1) == 0


def test_q_and_phi_examples():
    assert q_value((3, 2, 1, 1), 2) == pytest.approx(6 / 17)
    assert q_value((3, 2, 0, 0), 2) == 0
    assert q_value((1, 1, 1, 0), 3) == 0
    assert phi_value((3, 2, 1, 1), 2) == pytest.approx(17 + 6 / 17)
    assert phi_value((3, 2, 0, 0), 2) == 0
    assert phi_value((1, 1, 1, 1), 3) == 1


def test_q_value_exact_branch_with_fractions():
    assert q_value((Fraction(3), Fraction(2), Fraction(1), Fraction(1)), 2) == Fraction(6, 17)


def test_q_rejects_bad_order_and_nonconvex_state():
    with pytest.raises(ValueError):
        q_value((1, 1, 1, 1), 1)
    with pytest.raises(DomainError):
        q_value((1, 1, 1, -5), 2)


def test_dq_exact_examples():
    assert dq_exact((1, 1, 1, 1), 3, 1) == 0
    diag = np.array([2.0, 2.0, 1.0, 1.0])
    step = 1e-6
    up, dn = diag.copy(), diag.copy()
    up[2] += step
    dn[2] -= step
    fd = (q_value(up, 2) - q_value(dn, 2)) / (2 * step)
    assert dq_exact(diag, 2, 3) == pytest.approx(fd, rel=1e-8)


def test_dq_undefined_where_q_branch_is_zero():
    with pytest.raises(DomainError):
        dq_exact((3, 2, 0, 0), 2, 1)


def test_dq_exact_tends_to_leading_term():
    # diag(2, 2, e, e): exact derivative is 1/(4 (1 + e/2)^2), leading term 1/4
    errors = []
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        exact = dq_exact((2.0, 2.0, eps, eps), 2, 3)
        lead = dq_leading((eps, eps), 0)
        assert lead == pytest.approx(0.25)
        assert exact == pytest.approx(0.25 / (1 + eps / 2) ** 2, rel=1e-12)
        errors.append(abs(exact - lead))
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-4


def test_q_continuity_at_vanishing_sigma():
    good = (2.0, 1.5)
    pattern = (1.0, 0.5)
    prev = None
    for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        q = q_value(good + tuple(eps * p for p in pattern), 2)
        assert q > 0
        if prev is not None:
            assert q < prev
        prev = q
    assert prev < 1e-5


@settings(max_examples=200, deadline=None)
@given(diag4, st.integers(1, 4), st.integers(1, 4))
def test_sigma_recurrence(vals, k, i):
    lhs = sigma(vals, k)
    rhs = sigma_excluding(vals, k, {i}) + vals[i - 1] * sigma_excluding(vals, k - 1, {i})
    assert lhs == pytest.approx(rhs, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(diag4, st.integers(1, 4))
def test_sigma_matches_char_poly(vals, k):
    assert sigma(vals, k) == pytest.approx(sigma_general(np.diag(vals), k), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(diag4, st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_dsigma_matches_finite_differences(vals, k, i, j):
    step = 1e-5
    e = np.zeros((4, 4))
    e[i - 1, j - 1] = 1.0
    base = np.diag(vals)
    fd = (sigma_general(base + step * e, k) - sigma_general(base - step * e, k)) / (2 * step)
    exact = dsigma(vals, k, i, j)
    assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1.0)


@settings(max_examples=60, deadline=None)
@given(diag4, st.integers(2, 4), st.tuples(*[st.integers(1, 4)] * 4))
def test_d2sigma_matches_finite_differences(vals, k, idx):
    i, j, p, q = idx
    step = 1e-4
    e1 = np.zeros((4, 4))
    e1[i - 1, j - 1] = 1.0
    e2 = np.zeros((4, 4))
    e2[p - 1, q - 1] = 1.0
    base = np.diag(vals)
    f = [sigma_general(base + a * step * e1 + b * step * e2, k) for a, b in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    fd = (f[0] - f[1] - f[2] + f[3]) / (4 * step * step)
    exact = d2sigma(vals, k, i, j, p, q)
    assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1.0)


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.floats(0.05, 3.0)] * 4), st.sampled_from([2, 3]), st.integers(1, 4))
def test_dq_exact_matches_finite_differences(vals, l, i):
    if sigma(vals, l + 1) <= 1e-3:
        return
    step = 1e-6
    up, dn = list(vals), list(vals)
    up[i - 1] += step
    dn[i - 1] -= step
    fd = (q_value(up, l) - q_value(dn, l)) / (2 * step)
    exact = dq_exact(vals, l, i)
    assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1.0)


@settings(max_examples=200, deadline=None)
@given(nonneg4, st.sampled_from([2, 3]))
def test_phi_nonnegative_on_nonnegative_spectra(vals, l):
    assert phi_value(vals, l) >= 0
