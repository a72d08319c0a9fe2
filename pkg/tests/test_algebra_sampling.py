from fractions import Fraction

import pytest

from cmaeig.algebra.forms import R3, fexprs
from cmaeig.algebra.sampling import MINORS, _Tables, evaluate_minors, positivity_sample_suite, sample_point


def _point(v, d):
    point = dict(zip(("v1", "v2", "v3", "v4"), map(Fraction, v)))
    point.update(d1=Fraction(d[0]), d2=Fraction(d[1]), d3=Fraction(d[2]), d4=Fraction(0))
    point["lam"] = R3.substitution["lam"].eval(point)
    return point


def test_sample_point_deterministic_and_in_box():
    a = sample_point(42, 7)
    assert a == sample_point(42, 7)
    assert a != sample_point(43, 7)
    for k in ("v1", "v2", "v3", "v4"):
        assert -2 <= a[k] <= 2 and (a[k] * 64).denominator == 1
    for k in ("d1", "d2", "d3"):
        assert Fraction(1, 4) <= a[k] <= 4
    assert a["d4"] == 0


def test_worked_sample():
    point = _point((Fraction(1, 2), Fraction(1, 2), 0, 0), (2, 2, 2))
    assert point["lam"] == Fraction(13, 2)
    values = evaluate_minors(point)
    assert all(values[m] > 0 for m in MINORS)
    assert all(m >= 0 for m in values["reduced"])


def test_vanishing_b_gives_zero_lower_bound():
    point = _point((1, 0, Fraction(1, 3), 0), (3, 2, 1))
    assert point["lam"] > 0
    assert evaluate_minors(point)["P3(A2)"] >= 0


def test_P2_A1_vanishes_with_lam():
    F = fexprs()
    tables = _Tables()
    values = []
    # move d2 down toward the point where lam = 0 (v = (1/2, 1/2, 0, 0), d1 = d3 = 1)
    # lam = 2 d2 - 1/2 - d2/4 = (7/4) d2 - 1/2, zero at d2 = 2/7
    for k in (1, 2, 4, 8, 16, 32):
        point = _point((Fraction(1, 2), Fraction(1, 2), 0, 0), (1, Fraction(2, 7) + Fraction(1, 10 * k), 1))
        assert point["lam"] > 0 and F.F11.eval(point) > 0
        values.append(evaluate_minors(point, tables)["P2(A1)"])
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < Fraction(1, 20)


def test_small_suite_counts_admissible_samples():
    report = positivity_sample_suite(count=25, seed=3)
    assert report.accepted == 25
    assert report.ok
    assert report.as_dict()["violations"] == {m: 0 for m in MINORS}
    with pytest.raises(ValueError):
        positivity_sample_suite(count=0)


def test_suite_is_deterministic():
    assert positivity_sample_suite(10, 9).as_dict() == positivity_sample_suite(10, 9).as_dict()
