import time
from fractions import Fraction

import pytest

from cmaeig.algebra.forms import R3, fexprs, similar
from cmaeig.algebra.identities import (
    block_A2,
    build_matrix_A,
    congruence_S,
    reduce_A,
    verify_all,
    verify_block_reduction,
    verify_claim1_quadratic,
    verify_claim2,
    verify_claim3,
    verify_coefficient_bullets,
    verify_fexprs,
    verify_quadratic_form,
    X5,
)
from cmaeig.algebra.poly import RatExpr, variables
from cmaeig.algebra.sampling import _Tables, sample_point

v1, v2, v3, v4, d1, d2, d3, d4, lam = variables("v1", "v2", "v3", "v4", "d1", "d2", "d3", "d4", "lam")
b = v2**2 + v4**2


@pytest.fixture(scope="module")
def full_report():
    start = time.perf_counter()
    verdict = verify_all()
    return verdict, time.perf_counter() - start


def test_full_suite_passes(full_report):
    verdict, elapsed = full_report
    assert verdict.ok, verdict.first_failure
    assert len(verdict.checks) >= 20
    assert len({c.name for c in verdict.checks}) == len(verdict.checks)
    assert all(c.tag for c in verdict.checks)


def test_each_group_passes():
    for fn in (verify_fexprs, verify_claim1_quadratic, verify_quadratic_form, verify_coefficient_bullets,
               verify_block_reduction, verify_claim2, verify_claim3):
        assert fn().ok, fn.__name__


def test_matrix_A_entries():
    F = fexprs()
    A = build_matrix_A(F)
    assert similar(A[0][0], RatExpr(F.F11 * (b * d3 + lam)) / (F.F22 * d2 * d1), None)
    assert A[0][2].is_zero() and A[1][2].is_zero()
    assert similar(A[2][3], RatExpr(F.F23, d1), None)
    assert similar(A[2][4], RatExpr(F.F12, d3), None)
    assert all(similar(A[i][j], A[j][i], None) for i in range(5) for j in range(5))


def test_reduced_entries():
    F = fexprs()
    Ared = reduce_A(F)
    assert similar(Ared[0][3], 0, R3)
    want = RatExpr((F.F11 * F.F22 - F.F12**2) * (b * d3 + lam)) / (F.F11 * d1 * F.F22 * d2)
    assert similar(Ared[3][3], want, R3)


def test_congruence_preserves_form_values():
    # X^T A X at random rational X, before and after the change of variables
    F = fexprs()
    A = build_matrix_A(F)
    Ared = reduce_A(F, A)
    S = congruence_S(F)
    tables = _Tables()
    import numpy as np

    rng = np.random.default_rng(5)
    checked = 0
    index = 0
    while checked < 100:
        point = sample_point(11, index)
        index += 1
        if point["lam"] <= 0:
            continue
        Y = [Fraction(int(k), 7) for k in rng.integers(-20, 21, size=5)]
        Sn = [[e.eval(point) for e in row] for row in S]
        X = [sum(Sn[i][j] * Y[j] for j in range(5)) for i in range(5)]
        An = tables.at(A, point)
        Rn = [[e.eval(point) for e in row] for row in Ared]
        lhs = sum(X[i] * An[i][j] * X[j] for i in range(5) for j in range(5))
        rhs = sum(Y[i] * Rn[i][j] * Y[j] for i in range(5) for j in range(5))
        assert lhs == rhs
        checked += 1


def test_variable_order():
    assert X5 == ("v114", "v334", "v134", "v124", "v234")


@pytest.mark.parametrize("change", [
    {"F12": "neg"},
    {"F23": "plus_v1"},
    {"F22": "double"},
    {"b": "plus_one"},
])
def test_mutations_are_detected(change):
    F = fexprs()
    key, how = next(iter(change.items()))
    old = getattr(F, key)
    new = {"neg": -old, "plus_d1": old + d1, "plus_v1": old + v1, "double": old * 2, "plus_one": old + 1}[how]
    assert not verify_all(F.mutated(**{key: new})).ok


def test_claim1_detects_F12_sign_flip():
    F = fexprs()
    assert not verify_claim1_quadratic(F.mutated(F12=-F.F12)).ok


def test_bullet_mutation_detected():
    F = fexprs()
    k22 = RatExpr(F.F22) * d2
    # the v124^2 bullet without its -v11 v22 term
    wrong = (k22 + RatExpr(F.F11) * d1) / (d1 * d2)
    verdict = verify_coefficient_bullets(F, middle_overrides={3: wrong})
    assert not verdict.ok
    assert verdict.first_failure.startswith("bullet 3")


def test_claim3_step_a_mutation():
    F = fexprs()
    verdict = verify_claim3(F.mutated(F33=F.F22))
    failed = {c.tag for c in verdict.checks if not c.passed}
    assert "Claim3.a" in failed


def test_claim3_step_c_needs_no_regime():
    F = fexprs()
    A_, B_, C_ = F.F11 * F.F22, F.F12**2, F.F23**2
    assert (A_ * (A_ - B_ - C_) + B_ * C_ - (A_ - B_) * (F.F22 * F.F33 - C_)).is_zero()


def test_rank2_chain_specialises_at_a_equals_b_zero():
    F = fexprs()
    zero = {"v1": 0, "v2": 0, "v3": 0, "v4": 0}
    assert F.F12.subs(zero).is_zero() and F.F23.subs(zero).is_zero()


def test_block_A2_symmetric():
    A2 = block_A2(fexprs())
    assert all(similar(A2[i][j], A2[j][i], None) for i in range(3) for j in range(3))
