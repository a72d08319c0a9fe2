"""Exact verification of the constant-rank algebra (minimal ranks 2 and 3).

Every check compares two rational expressions either exactly or modulo a
regime (R2 for minimal rank 2, R3 for minimal rank 3) and records a row with
a short reference tag. Success always means a literally zero polynomial.
"""

from __future__ import annotations

from fractions import Fraction

from ..cmaop import F_second_partial
from ..report import Check, Verdict
from .forms import (
    R2,
    R3,
    FExprs,
    QuadForm,
    Regime,
    d1,
    d2,
    d3,
    det,
    fexprs,
    F_diagonal,
    lam,
    leading_minor,
    normalize,
    similar,
    third,
    third_derivative_form,
)
from .poly import Poly, RatExpr


def _R(x) -> RatExpr:
    return RatExpr.lift(x)


# --------------------------------------------------------------------------
# F expressions and their identities
# --------------------------------------------------------------------------

def _operator_agreement(F: FExprs, samples: int = 6) -> bool:
    """Compare the polynomial F-derivatives with the numeric operator at rational points."""
    import numpy as np

    from ..cmaop import FullState, F_ij

    rng = np.random.default_rng(7)
    for _ in range(samples):
        g = [Fraction(int(k), 8) for k in rng.integers(-16, 17, size=4)]
        dg = [Fraction(int(k), 8) for k in rng.integers(1, 33, size=4)]
        point = dict(zip(("v1", "v2", "v3", "v4", "d1", "d2", "d3", "d4"), g + dg))
        point["lam"] = 0
        got = np.array([[float(e.eval(point)) for e in row] for row in F.matrix()])
        want = F_ij(FullState.diagonal([float(x) for x in g], [float(x) for x in dg]))
        if not np.allclose(got, want, rtol=0, atol=1e-12):
            return False
    return True


def verify_fexprs(F: FExprs | None = None) -> Verdict:
    F = F or fexprs()
    out = Verdict()
    out.add("F derivatives agree with the operator", "Eq3.32.operator", _operator_agreement(F))
    out.add("pythagoras", "Sec3.1.pythagoras",
            similar(F.F12**2 + F.F23**2, F.a * F.b, None))
    out.add("F33 = F11", "Eq3.32.F33", similar(F.F33, F.F11, None))
    out.add("F44 = F22", "Eq3.32.F44", similar(F.F44, F.F22, None))
    out.add("equation under R2", "Eq3.5.R2", similar(F_diagonal(), 0, R2))
    out.add("F11F22 = lam + F12^2 + F23^2 under R2", "Eq3.19",
            similar(F.F11 * F.F22, lam + F.F12**2 + F.F23**2, R2))
    out.add("equation under R3", "Eq3.31", similar(F_diagonal(), 0, R3))
    out.add("F11 ~ v22 - (v2^2 + v4^2)", "Eq3.33", similar(F.F11, d2 - F.b, R3))
    out.add("F22 v22 ~ (v2^2+v4^2)(v11+v33) + lam", "Eq3.35",
            similar(F.F22 * d2, F.b * (d1 + d3) + lam, R3))
    out.add("F11F22 - F12^2 - F23^2 ~ lam", "Eq3.36",
            similar(F.F11 * F.F22 - F.F12**2 - F.F23**2, lam, R3))
    return out


def verify_second_partials() -> Verdict:
    out = Verdict()
    ones = [((1, 1), (2, 2)), ((2, 2), (1, 1)), ((2, 2), (3, 3)), ((3, 3), (2, 2))]
    minus = [((1, 2), (2, 1)), ((2, 1), (1, 2)), ((2, 3), (3, 2)), ((3, 2), (2, 3))]
    ok = all(F_second_partial(p, q) == 1 for p, q in ones)
    ok &= all(F_second_partial(p, q) == -1 for p, q in minus)
    ok &= F_second_partial((1, 1), (3, 3)) == 0
    out.add("second partials of F", "Sec3.2.Fsecond", ok)
    return out


# --------------------------------------------------------------------------
# Minimal rank 2
# --------------------------------------------------------------------------

def rank2_display_form(F: FExprs, alpha: int) -> QuadForm:
    a, b, c = third(1, 1, alpha), third(1, 2, alpha), third(2, 2, alpha)
    q = QuadForm((a, b, c))
    mix = F.F11 * d1 + F.F22 * d2 - d1 * d2
    q.add_term(_R(2 * F.F11) / d1, a, a)
    q.add_term(_R(2 * mix) / (d1 * d2), b, b)
    q.add_term(_R(2 * F.F22) / d2, c, c)
    q.add_term(_R(4 * F.F12) / d1, a, b)
    q.add_term(_R(2), a, c)
    q.add_term(_R(4 * F.F12) / d2, b, c)
    return q


def verify_claim1_quadratic(F: FExprs | None = None) -> Verdict:
    """Rank-2 chain for both bad indices alpha = 3, 4 under regime R2.

    The left-hand sides are always rebuilt from the true derivatives of F;
    ``F`` only feeds the displayed right-hand sides, so a wrong entry fails.
    """
    F = F or fexprs()
    truth = fexprs()
    out = Verdict()
    mix = F.F11 * d1 + F.F22 * d2 - d1 * d2
    for alpha in (3, 4):
        a, b, c = third(1, 1, alpha), third(1, 2, alpha), third(2, 2, alpha)
        raw = third_derivative_form((1, 2), alpha, truth)
        shown = rank2_display_form(F, alpha)
        out.add(f"rank-2 form from F tables, alpha={alpha}", f"Eq3.15.a{alpha}",
                _forms_equal(raw, shown, None))

        # linearised equation: F11 v11a + 2 F12 v12a + F22 v22a ~ 0
        combo = {a: -_R(truth.F11) / truth.F22, b: -_R(2 * truth.F12) / truth.F22}
        shown_ratio = {a: -(_R(F.F11) / F.F22), b: -(_R(2) * F.F12 / F.F22)}
        out.add(f"bad third-derivative substitution, alpha={alpha}", f"Eq3.16.a{alpha}",
                all(similar(combo[k], shown_ratio[k], None) for k in combo))

        reduced = raw.substitute(c, combo)
        shown_reduced = QuadForm((a, b))
        shown_reduced.add_term(_R(2 * F.F11) / (d1 * F.F22 * d2) * mix, a, a)
        shown_reduced.add_term(_R(4 * F.F12) / (d1 * F.F22 * d2) * mix, a, b)
        shown_reduced.add_term(_R(2 * mix) / (d1 * d2), b, b)
        out.add(f"reduced form after substitution, alpha={alpha}", f"Eq3.17.a{alpha}",
                _forms_equal(reduced, shown_reduced, None))

        out.add(f"F11 v11 + F22 v22 - v11 v22 ~ lam, alpha={alpha}", f"Claim1.lam.a{alpha}",
                similar(mix, lam, R2))

        pref = _R(2 * lam) / (d1 * F.F22 * d2)
        shown_square = QuadForm((a, b))
        shown_square.add_term(pref * F.F11, a, a)
        shown_square.add_term(pref * 2 * F.F12, a, b)
        shown_square.add_term(pref * F.F22, b, b)
        out.add(f"form modulo the equation, alpha={alpha}", f"Eq3.18.a{alpha}",
                _forms_equal(reduced, shown_square, R2))

        # completed square, multiplied through by F11 to stay polynomial
        lhs = QuadForm((a, b))
        lhs.add_term(F.F11 * F.F11, a, a)
        lhs.add_term(F.F11 * 2 * F.F12, a, b)
        lhs.add_term(F.F11 * F.F22, b, b)
        rhs = QuadForm((a, b))
        rhs.add_term(F.F11**2, a, a)
        rhs.add_term(2 * F.F11 * F.F12, a, b)
        rhs.add_term(F.F12**2, b, b)
        rhs.add_term(F.F11 * F.F22 - F.F12**2, b, b)
        out.add(f"square completion identity, alpha={alpha}", f"Eq3.18.square.a{alpha}",
                _forms_equal(lhs, rhs, None))

        final = QuadForm((a, b))
        sq = pref / F.F11
        final.add_term(sq * F.F11**2, a, a)
        final.add_term(sq * 2 * F.F11 * F.F12, a, b)
        final.add_term(sq * F.F12**2, b, b)
        final.add_term(_R(2 * lam) / (F.F11 * d1 * F.F22 * d2) * (lam + F.F23**2), b, b)
        out.add(f"rank-2 sum of squares, alpha={alpha}", f"Claim1.final.a{alpha}",
                _forms_equal(reduced, final, R2))
    out.add("pythagoras inside the rank-2 chain", "Sec3.1.pythagoras",
            similar(F.F12**2 + F.F23**2, F.a * F.b, None))
    out.add("F11F22 = lam + F12^2 + F23^2 inside the rank-2 chain", "Eq3.19",
            similar(F.F11 * F.F22, lam + F.F12**2 + F.F23**2, R2))
    return out


def _forms_equal(p: QuadForm, q: QuadForm, regime: Regime | None) -> bool:
    if set(p.names) != set(q.names):
        return False
    q = q.reordered(p.names)
    n = len(p.names)
    return all(similar(p.Q[i][j], q.Q[i][j], regime) for i in range(n) for j in range(i, n))


# --------------------------------------------------------------------------
# Minimal rank 3: the quadratic form, the matrix A and its block reduction
# --------------------------------------------------------------------------

X5 = ("v114", "v334", "v134", "v124", "v234")


def display_full_form(F: FExprs) -> QuadForm:
    q = QuadForm(("v114", "v124", "v134", "v224", "v234", "v334"))
    two = _R(2)
    q.add_term(two * F.F11 / d1, "v114", "v114")
    q.add_term(two * F.F22 / d2, "v224", "v224")
    q.add_term(two * F.F33 / d3, "v334", "v334")
    q.add_term(two * F.F33 / d1 + two * F.F11 / d3, "v134", "v134")
    q.add_term(-two + two * F.F22 / d1 + two * F.F11 / d2, "v124", "v124")
    q.add_term(-two + two * F.F33 / d2 + two * F.F22 / d3, "v234", "v234")
    q.add_term(two, "v114", "v224")
    q.add_term(_R(4 * F.F12) / d1, "v114", "v124")
    q.add_term(two, "v224", "v334")
    q.add_term(_R(4 * F.F12) / d2, "v224", "v124")
    q.add_term(_R(4 * F.F23) / d2, "v224", "v234")
    q.add_term(_R(4 * F.F23) / d3, "v334", "v234")
    q.add_term(_R(4 * F.F23) / d1, "v134", "v124")
    q.add_term(_R(4 * F.F12) / d3, "v134", "v234")
    return q


def displayed_substitution(F: FExprs) -> dict[str, RatExpr]:
    return {
        "v114": -_R(F.F11) / F.F22,
        "v334": -_R(F.F33) / F.F22,
        "v124": -_R(2 * F.F12) / F.F22,
        "v234": -_R(2 * F.F23) / F.F22,
    }


def derived_substitution(F: FExprs) -> dict[str, RatExpr]:
    """Solve sum_{i,j in G} F^{ij} v_{ij4} = 0 for v224."""
    Fm = F.matrix()
    lin: dict[str, Poly] = {}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            name = third(i, j, 4)
            lin[name] = lin.get(name, Poly()) + Fm[i - 1][j - 1]
    pivot = lin.pop("v224")
    return {k: -_R(c) / pivot for k, c in lin.items() if not c.is_zero()}


def display_form5(F: FExprs) -> QuadForm:
    """The displayed five-variable form (half the full form after the substitution)."""
    q = QuadForm(X5)
    F11, F22, F33, F12, F23 = (_R(x) for x in (F.F11, F.F22, F.F33, F.F12, F.F23))
    q.add_term(F11 / d1 + F11 * F11 / (F22 * d2) - F11 / F22, "v114", "v114")
    q.add_term(F33 / d3 + F33 * F33 / (F22 * d2) - F33 / F22, "v334", "v334")
    q.add_term(F33 / d1 + F11 / d3, "v134", "v134")
    q.add_term(_R(-1) + F22 / d1 + F11 / d2, "v124", "v124")
    q.add_term(_R(-1) + F33 / d2 + F22 / d3, "v234", "v234")
    q.add_term(_R(2) * (F11 * F33 / (F22 * d2) - F11 / (F22 * 2) - F33 / (F22 * 2)), "v114", "v334")
    q.add_term(_R(2) * (F12 / d1 + F11 * F12 / (F22 * d2) - F12 / F22), "v114", "v124")
    q.add_term(_R(2) * (F11 * F23 / (F22 * d2) - F23 / F22), "v114", "v234")
    q.add_term(_R(2) * (F12 * F33 / (F22 * d2) - F12 / F22), "v334", "v124")
    q.add_term(_R(2) * (F23 / d3 + F23 * F33 / (F22 * d2) - F23 / F22), "v334", "v234")
    q.add_term(_R(2) * F23 / d1, "v134", "v124")
    q.add_term(_R(2) * F12 / d3, "v134", "v234")
    return q


def derived_form5(F: FExprs) -> QuadForm:
    """Half the full form built from F's tables, with v224 eliminated through the constraint."""
    raw = third_derivative_form((1, 2, 3), 4, F)
    return raw.substitute("v224", derived_substitution(F)).scaled(RatExpr(1, 2)).reordered(X5)


def build_matrix_A(F: FExprs | None = None) -> list[list[RatExpr]]:
    """Symmetric 5x5 matrix of the simplified form, variables ordered as X5."""
    F = F or fexprs()
    F11, F22, F33, F12, F23 = (_R(x) for x in (F.F11, F.F22, F.F33, F.F12, F.F23))
    b = _R(F.b)
    k22 = F22 * d2
    c3 = b * d3 + lam
    c1 = b * d1 + lam
    zero = _R(0)
    upper = {
        (0, 0): F11 * c3 / (k22 * d1),
        (0, 1): -(F11 * b) / k22,
        (0, 2): zero,
        (0, 3): F12 * c3 / (k22 * d1),
        (0, 4): -(F23 * b) / k22,
        (1, 1): F33 * c1 / (k22 * d3),
        (1, 2): zero,
        (1, 3): -(F12 * b) / k22,
        (1, 4): F23 * c1 / (k22 * d3),
        (2, 2): (_R(F.a) * d2 + lam) / (d1 * d3),
        (2, 3): F23 / d1,
        (2, 4): F12 / d3,
        (3, 3): c3 / (d1 * d2),
        (3, 4): zero,
        (4, 4): c1 / (d2 * d3),
    }
    A = [[zero] * 5 for _ in range(5)]
    for (i, j), e in upper.items():
        A[i][j] = e
        A[j][i] = e
    return A


# bullet label, the two variables, the displayed middle expression (or None)
def _bullets(F: FExprs):
    F11, F22, F33, F12, F23 = (_R(x) for x in (F.F11, F.F22, F.F33, F.F12, F.F23))
    k22 = F22 * d2
    return [
        ("v114^2", "v114", "v114", F11 / (k22 * d1) * (k22 + F11 * d1 - d1 * d2)),
        ("v134^2", "v134", "v134", (F33 * d3 + F11 * d1) / (d1 * d3)),
        ("v124^2", "v124", "v124", (-d1 * d2 + F22 * d2 + F11 * d1) / (d1 * d2)),
        ("2 v114 v334", "v114", "v334", F11 * (F11 - d2) / k22),
        ("2 v114 v124", "v114", "v124", F12 / (k22 * d1) * (k22 + F11 * d1 - d1 * d2)),
        ("2 v114 v234", "v114", "v234", F23 * (F11 - d2) / k22),
        ("v334^2", "v334", "v334", None),
        ("v234^2", "v234", "v234", None),
        ("2 v334 v124", "v334", "v124", None),
        ("2 v334 v234", "v334", "v234", None),
        ("2 v114 v134, 2 v334 v134, 2 v134 v124, 2 v134 v234, 2 v124 v234", None, None, None),
    ]


def verify_quadratic_form(F: FExprs | None = None) -> Verdict:
    F = F or fexprs()
    out = Verdict()
    truth = fexprs()
    raw = third_derivative_form((1, 2, 3), 4, truth)
    out.add("five-variable form from F tables", "Eq3.29", _forms_equal(raw, display_full_form(F), None))
    sub = derived_substitution(truth)
    shown = displayed_substitution(F)
    out.add("displayed substitution from the constraint", "Eq3.30",
            set(sub) == set(shown) and all(similar(sub[k], shown[k], None) for k in sub))
    out.add("five-variable form after substitution", "Eq3.30.form",
            _forms_equal(derived_form5(truth), display_form5(F), None))
    return out


def verify_coefficient_bullets(F: FExprs | None = None, A: list | None = None,
                               middle_overrides: dict | None = None) -> Verdict:
    """Each displayed coefficient simplification, raw coefficient vs table entry of A.

    ``middle_overrides`` maps a 1-based bullet number to a replacement for its
    intermediate displayed expression (used for mutation tests).
    """
    F = F or fexprs()
    A = A if A is not None else build_matrix_A(F)
    form = derived_form5(fexprs())
    idx = {n: k for k, n in enumerate(X5)}
    out = Verdict()
    middle_overrides = middle_overrides or {}
    for n, (label, x, y, middle) in enumerate(_bullets(F), start=1):
        middle = middle_overrides.get(n, middle)
        if x is None:
            pairs = [("v114", "v134"), ("v334", "v134"), ("v134", "v124"),
                     ("v134", "v234"), ("v124", "v234")]
            ok = all(similar(form.coef(p, q), A[idx[p]][idx[q]], R3) for p, q in pairs)
        else:
            lhs = form.coef(x, y)
            ok = similar(lhs, A[idx[x]][idx[y]], R3)
            if middle is not None:
                ok &= similar(lhs, middle, None)
        out.add(f"bullet {n}: coefficient of {label}", f"Sec3.2.bullet{n}", ok)
    return out


def congruence_S(F: FExprs) -> list[list[RatExpr]]:
    """S with A' = S^T A S for the two stated row/column operations."""
    S = [[RatExpr(1) if i == j else RatExpr(0) for j in range(5)] for i in range(5)]
    S[0][3] = -_R(F.F12) / F.F11
    S[1][4] = -_R(F.F23) / F.F11
    return S


def _matmul(P, Q):
    n, m, k = len(P), len(Q[0]), len(Q)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            total = RatExpr(0)
            for t in range(k):
                if P[i][t].is_zero() or Q[t][j].is_zero():
                    continue
                total = total + P[i][t] * Q[t][j]
            row.append(total)
        out.append(row)
    return out


def _transpose(P):
    return [list(r) for r in zip(*P)]


def block_A1(F: FExprs) -> list[list[RatExpr]]:
    F11, F22, F33 = (_R(x) for x in (F.F11, F.F22, F.F33))
    b = _R(F.b)
    k22 = F22 * d2
    off = -(F11 * b) / k22
    return [[F11 * (b * d3 + lam) / (k22 * d1), off],
            [off, F33 * (b * d1 + lam) / (k22 * d3)]]


def block_A2(F: FExprs) -> list[list[RatExpr]]:
    F11, F22, F33, F12, F23 = (_R(x) for x in (F.F11, F.F22, F.F33, F.F12, F.F23))
    b = _R(F.b)
    k22 = F22 * d2
    e23 = F12 * F23 * b / (k22 * F11)
    return [
        [(_R(F.a) * d2 + lam) / (d1 * d3), F23 / d1, F12 / d3],
        [F23 / d1, (F11 * F22 - F12 * F12) / (F11 * d1 * k22) * (b * d3 + lam), e23],
        [F12 / d3, e23, (F22 * F33 - F23 * F23) / (k22 * F33 * d3) * (b * d1 + lam)],
    ]


def reduce_A(F: FExprs, A=None):
    A = A if A is not None else build_matrix_A(F)
    S = congruence_S(F)
    return _matmul(_matmul(_transpose(S), A), S)


def verify_block_reduction(F: FExprs | None = None) -> Verdict:
    F = F or fexprs()
    out = Verdict()
    A = build_matrix_A(F)
    reduced = reduce_A(F, A)
    Ared = [[e.map(R3) for e in row] for row in reduced]
    bad = [(i + 1, j + 1) for i in range(2) for j in range(2, 5) if not Ared[i][j].is_zero()]
    out.add("off-block entries vanish", "Sec3.2.block.off", not bad,
            f"nonzero entries {bad}" if bad else "")
    A1 = block_A1(F)
    bad = [(i + 1, j + 1) for i in range(2) for j in range(2)
           if not similar(Ared[i][j], A1[i][j], R3)]
    out.add("upper block is A1", "Sec3.2.block.A1", not bad, f"{bad}" if bad else "")
    A2 = block_A2(F)
    bad = [(i + 3, j + 3) for i in range(3) for j in range(3)
           if not similar(Ared[i + 2][j + 2], A2[i][j], R3)]
    out.add("lower block is A2", "Sec3.2.block.A2", not bad, f"{bad}" if bad else "")
    # S^{-1} = I - E since E^2 = 0; A = S^{-T} A' S^{-1} exactly
    S = congruence_S(F)
    Sinv = [[(RatExpr(1) if i == j else RatExpr(0)) - (S[i][j] if i != j else RatExpr(0))
             for j in range(5)] for i in range(5)]
    back = _matmul(_matmul(_transpose(Sinv), reduced), Sinv)
    out.add("congruence preserves the form", "Sec3.2.block.congruence",
            all(similar(back[i][j], A[i][j], None) for i in range(5) for j in range(5)))
    return out


# --------------------------------------------------------------------------
# Positivity of the blocks
# --------------------------------------------------------------------------

def verify_claim2(F: FExprs | None = None) -> Verdict:
    F = F or fexprs()
    out = Verdict()
    A1 = block_A1(F)
    k22 = _R(F.F22) * d2
    b = F.b
    out.add("P1(A1) closed form", "Claim2.P1",
            similar(A1[0][0], _R(F.F11 * (b * d3 + lam)) / (k22 * d1), None))
    P2 = leading_minor(A1, 2)
    out.add("P2(A1) minor identity", "Claim2.P2.exact",
            similar(P2 * k22 * k22 * d1 * d3, lam * F.F11**2 * (b * (d1 + d3) + lam), R3))
    out.add("P2(A1) ~ lam F11^2 / (F22 v22 v11 v33)", "Claim2.P2",
            similar(P2, _R(lam * F.F11**2) / (k22 * d1 * d3), R3))
    return out


def circled_terms(F: FExprs) -> list[RatExpr]:
    F11, F22, F33, F12, F23 = (_R(x) for x in (F.F11, F.F22, F.F33, F.F12, F.F23))
    a, b = _R(F.a), _R(F.b)
    k11, k22, k33 = F11 * d1, F22 * d2, F33 * d3
    core = F11 * F22 - F12 * F12 - F23 * F23
    head = a * d2 + lam
    t1 = F11 * F22 / (k11 * k22 * k22 * k33) * b * b * head * core
    t2 = _R(lam) / (d1 * d3) * F11 * F22 / (k11 * k22 * k33) * head * core
    t3 = _R(lam) / (d1 * d3) * F12 * F12 * F23 * F23 / (k11 * k22 * k33) * head
    t4 = -(_R(lam) / d3) / (k11 * k22) * (
        F23 * F23 / d1 * (F22 * F33 - F23 * F23) + F12 * F12 / d3 * (F11 * F22 - F12 * F12))
    t5 = -(_R(1) / d3) * (F12 * F12 + F23 * F23) / (k11 * k22) * b * core
    return [t1, t2, t3, t4, t5]


def verify_claim3(F: FExprs | None = None) -> Verdict:
    F = F or fexprs()
    out = Verdict()
    F11, F22, F33, F12, F23 = (_R(x) for x in (F.F11, F.F22, F.F33, F.F12, F.F23))
    a, b = _R(F.a), _R(F.b)
    k11, k22, k33 = F11 * d1, F22 * d2, F33 * d3
    A2 = block_A2(F)

    out.add("P1(A2) closed form", "Claim3.P1",
            similar(A2[0][0], (a * d2 + lam) / (d1 * d3), None))

    out.add("product identity", "Claim3.a",
            similar((a * d2 + lam) * (b * d3 + lam), k22 * k33 + _R(lam) * k11, R3))

    P2 = leading_minor(A2, 2)
    expanded = ((F11 * F22 - F12 * F12) * (a * d2 + lam) * (b * d3 + lam)
                - k22 * k33 * F23 * F23) / (k11 * k22 * d1 * d3)
    out.add("P2(A2) over a common denominator", "Claim3.P2.expand", similar(P2, expanded, None))
    final = (_R(lam) * k22 * k33 / (k11 * k22 * d1 * d3)
             + _R(lam) / (k22 * d1 * d3) * (_R(lam) + F23 * F23))
    out.add("P2(A2) final form", "Claim3.P2", similar(P2, final, R3))

    out.add("(v2^2+v4^2)v33+lam)((v2^2+v4^2)v11+lam) ~ b^2 v11 v33 + lam F22 v22",
            "Claim3.P3.prod",
            similar((b * d3 + lam) * (b * d1 + lam), b * b * d1 * d3 + _R(lam) * k22, R3))

    # row scaling clears every denominator; the product of the scales is the
    # common denominator v11 v33 (F11 v11)(F22 v22)^2 (F33 v33) of the five terms
    terms = circled_terms(F)
    k22p = F.F22 * d2
    rows = [d1 * d3, F.F11 * d1 * k22p, k22p * F.F33 * d3]
    try:
        cleared = [[RatExpr(A2[i][j].times_exact(rows[i])) for j in range(3)] for i in range(3)]
        P3_scaled = det(cleared).num
        common = rows[0] * rows[1] * rows[2]
        total = Poly()
        for t in terms:
            total = total + t.times_exact(common)
        ok, detail = similar(P3_scaled, total, R3), ""
    except ArithmeticError:
        ok, detail = False, "denominators do not clear"
    out.add("P3(A2) = (1)+(2)+(3)+(4)+(5)", "Claim3.b", ok, detail)

    A_, B_, C_ = F11 * F22, F12 * F12, F23 * F23
    out.add("nullity a(a-b-c) + bc - (a-b)(a-c) = 0", "Claim3.c",
            similar(A_ * (A_ - B_ - C_) + B_ * C_ - (A_ - B_) * (F22 * F33 - C_), 0, None))

    core = F11 * F22 - F12 * F12 - F23 * F23
    shown_pair = _R(lam) * F11 * F22 / (k11 * k22 * k22 * k33) * b * b * core
    out.add("circled terms (1) + (5)", "Claim3.d", similar(terms[0] + terms[4], shown_pair, None))

    shown_234 = _R(lam) / (d1 * d3) / (k11 * k22 * k33) * (
        (a * d2 + lam) * F11 * F22 * core
        + (a * d2 + lam) * F12 * F12 * F23 * F23
        - k33 * F23 * F23 * (F22 * F33 - F23 * F23)
        - k11 * F12 * F12 * (F11 * F22 - F12 * F12))
    out.add("(2) + (3) + (4) combined", "Claim3.234",
            similar(terms[1] + terms[2] + terms[3], shown_234, None))

    ok = similar(F11 * F22 - F12 * F12 - F23 * F23, lam, R3)
    ok &= similar(F22 * F33 - F23 * F23 - F12 * F12, lam, R3)
    ok &= similar(k11 + k33, a * d2 + lam, R3)
    out.add("inequality reductions to lam >= 0", "Claim3.ineq", ok)

    out.add("P3 lower bound", "Claim3.final",
            similar(shown_pair, _R(lam) * lam * F11 * F22 / (k11 * k22 * k22 * k33) * b * b, R3))
    return out


def verify_all(F: FExprs | None = None) -> Verdict:
    F = F or fexprs()
    out = Verdict()
    out.extend(verify_fexprs(F))
    out.extend(verify_second_partials())
    out.extend(verify_claim1_quadratic(F))
    out.extend(verify_quadratic_form(F))
    out.extend(verify_coefficient_bullets(F))
    out.extend(verify_block_reduction(F))
    out.extend(verify_claim2(F))
    out.extend(verify_claim3(F))
    return out
