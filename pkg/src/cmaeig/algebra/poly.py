"""Sparse multivariate polynomials and rational-function pairs over Q.

The variable universe is fixed: (v1, v2, v3, v4, d1, d2, d3, d4, lam), where
``di`` stands for the diagonal Hessian entry v_ii and ``lam`` for the
eigenvalue constant. Coefficients are ``fractions.Fraction`` (or ``int``);
zero coefficients are never stored, so equality of term maps is equality of
polynomials.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Union

VARS = ("v1", "v2", "v3", "v4", "d1", "d2", "d3", "d4", "lam")
NVARS = len(VARS)
_INDEX = {name: k for k, name in enumerate(VARS)}
_ZERO_EXP = (0,) * NVARS

Number = Union[int, Fraction]


def _canon(c: Number) -> Number:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Number] | None = None):
        clean = {}
        if terms:
            for exp, c in terms.items():
                if len(exp) != NVARS:
                    raise ValueError(f"exponent vector must have {NVARS} slots")
                if c != 0:
                    clean[tuple(exp)] = _canon(c)
        self.terms: dict[tuple, Number] = clean
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls({_ZERO_EXP: c})

    @classmethod
    def var(cls, name: str) -> "Poly":
        exp = [0] * NVARS
        exp[_INDEX[name]] = 1
        return cls({tuple(exp): 1})

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    # predicates ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = _lift(other)
            if other is NotImplemented:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def variables(self) -> set[str]:
        used = set()
        for e in self.terms:
            used.update(VARS[k] for k, a in enumerate(e) if a)
        return used

    # ring operations -----------------------------------------------------
    def __neg__(self):
        return Poly._raw({e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = _canon(s)
        return Poly._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, RatExpr):
            return NotImplemented
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly._raw({e: _canon(c) for e, c in out.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def leading(self):
        """Lexicographically largest (exponent, coefficient) pair."""
        e = max(self.terms)
        return e, self.terms[e]

    def div_exact(self, other: "Poly") -> "Poly":
        """Quotient of an exact division; raises ArithmeticError on a remainder."""
        other = _lift(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        le, lc = other.leading()
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            e = max(rem)
            shift = tuple(a - b for a, b in zip(e, le))
            if min(shift) < 0:
                raise ArithmeticError("division leaves a remainder")
            c = Fraction(rem[e]) / lc
            quot[shift] = _canon(c)
            for oe, oc in other.terms.items():
                t = tuple(a + b for a, b in zip(oe, shift))
                s = rem.get(t, 0) - c * oc
                if s == 0:
                    rem.pop(t, None)
                else:
                    rem[t] = s
        return Poly._raw(quot)

    def __truediv__(self, other):
        return RatExpr(self) / other

    def __rtruediv__(self, other):
        return RatExpr(_lift(other)) / self

    # evaluation and substitution ----------------------------------------
    def eval(self, point: Mapping[str, Number]) -> Number:
        """Exact value at ``point``; every variable that occurs must be assigned."""
        values = [point.get(name) for name in VARS]
        total: Number = 0
        for e, c in self.terms.items():
            term = c
            for k, a in enumerate(e):
                if a:
                    x = values[k]
                    if x is None:
                        raise KeyError(f"no value for {VARS[k]}")
                    term = term * x**a
            total += term
        return _canon(total)

    def subs(self, mapping: Mapping[str, "Poly | Number"]) -> "Poly":
        """Substitute polynomials for variables (simultaneously)."""
        repl = {_INDEX[name]: _lift(p) for name, p in mapping.items()}
        power_cache: dict = {}

        def power(k, a):
            key = (k, a)
            if key not in power_cache:
                power_cache[key] = repl[k] ** a
            return power_cache[key]

        out = Poly()
        for e, c in self.terms.items():
            kept = tuple(0 if k in repl else a for k, a in enumerate(e))
            term = Poly._raw({kept: c})
            for k, a in enumerate(e):
                if a and k in repl:
                    term = term * power(k, a)
            out = out + term
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                VARS[k] if a == 1 else f"{VARS[k]}^{a}" for k, a in enumerate(e) if a
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def _lift(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    return NotImplemented


def variables(*names: str) -> tuple[Poly, ...]:
    return tuple(Poly.var(n) for n in names)


class RatExpr:
    """Quotient num/den of polynomials; equality by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = _lift(num)
        den = _lift(den)
        if num is NotImplemented or den is NotImplemented:
            raise TypeError("RatExpr parts must be polynomials or exact numbers")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    @staticmethod
    def lift(x) -> "RatExpr":
        return x if isinstance(x, RatExpr) else RatExpr(x)

    def __neg__(self):
        return RatExpr(-self.num, self.den)

    def __add__(self, other):
        other = RatExpr.lift(other)
        if self.den == other.den:
            return RatExpr(self.num + other.num, self.den)
        return RatExpr(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-RatExpr.lift(other))

    def __rsub__(self, other):
        return RatExpr.lift(other) + (-self)

    def __mul__(self, other):
        other = RatExpr.lift(other)
        return RatExpr(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatExpr.lift(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        return RatExpr(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RatExpr.lift(other) / self

    def __pow__(self, n: int):
        return RatExpr(self.num**n, self.den**n)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def equals(self, other) -> bool:
        other = RatExpr.lift(other)
        return (self.num * other.den - other.num * self.den).is_zero()

    def __eq__(self, other):
        if not isinstance(other, (RatExpr, Poly, int, Fraction)):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def times_exact(self, factor: Poly) -> Poly:
        """``self * factor`` as a polynomial, when ``den`` divides ``num * factor``."""
        return (self.num * factor).div_exact(self.den)

    def map(self, fn) -> "RatExpr":
        """Apply a ring homomorphism ``fn`` to numerator and denominator."""
        return RatExpr(fn(self.num), fn(self.den))

    def eval(self, point) -> Fraction:
        den = self.den.eval(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        return Fraction(self.num.eval(point)) / den

    def __repr__(self):
        return f"({self.num!r}) / ({self.den!r})"
