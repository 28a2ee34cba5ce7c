"""Exact Laurent-polynomial arithmetic in q = y^(1/2).

Everything here is exact: coefficients are Python ints, scalars are
``fractions.Fraction``.  A Laurent polynomial in the refinement variable y
with half-integer exponents becomes an honest Laurent polynomial in
q = y^(1/2) with integer exponents; the y-exponent of a monomial q^k is
k/2.

Two representations coexist:

* :class:`QPoly` -- expanded form, a finitely supported map exponent -> int.
* :class:`QProduct` -- a formal scalar * q^m * (product of quantum
  integers) / (product of quantum integers), kept unexpanded so that the
  y -> -1 limit can be evaluated by cancelling vanishing factors instead
  of numerically.

The quantum integer of a >= 1 is

    [a] = (y^(a/2) - y^(-a/2)) / (y^(1/2) - y^(-1/2))
        = q^(-(a-1)) + q^(-(a-3)) + ... + q^(a-1),

a palindromic sum of a monomials.  [a] -> a as y -> 1.  Near y = -1,
[a] = (-1)^((a-1)/2) + o(1) for odd a, while for even a
[a] = (-1)^(a/2-1) * (a/2) * (q + q^-1) + o(q + q^-1), so each even factor
contributes one vanishing order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple


class QPolyError(ValueError):
    """Base class for errors raised by this module."""


class PoleAtMinusOne(QPolyError):
    """The y -> -1 limit of a QProduct is a pole (unbalanced even factors)."""


class NotPolynomial(QPolyError):
    """QProduct expansion left a nonzero remainder."""


class NonRealAtI(QPolyError):
    """Substituting q = i produced a nonzero imaginary part."""


class QPoly:
    """Immutable Laurent polynomial in q with integer coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, int] | Iterable[Tuple[int, int]] = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        c: Dict[int, int] = {}
        for e, v in items:
            if v:
                c[e] = c.get(e, 0) + v
                if not c[e]:
                    del c[e]
        object.__setattr__(self, "_c", c)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("QPoly is immutable")

    @property
    def coeffs(self) -> Dict[int, int]:
        return dict(self._c)

    def coeff(self, exp: int) -> int:
        return self._c.get(exp, 0)

    def is_zero(self) -> bool:
        return not self._c

    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self._c))

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = QPoly({0: other})
        if not isinstance(other, QPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._c.items())))

    def __add__(self, other: "QPoly | int") -> "QPoly":
        if isinstance(other, int):
            other = QPoly({0: other})
        c = dict(self._c)
        for e, v in other._c.items():
            c[e] = c.get(e, 0) + v
            if not c[e]:
                del c[e]
        return QPoly(c)

    __radd__ = __add__

    def __neg__(self) -> "QPoly":
        return QPoly({e: -v for e, v in self._c.items()})

    def __sub__(self, other: "QPoly | int") -> "QPoly":
        return self + (-(other if isinstance(other, QPoly) else QPoly({0: other})))

    def __mul__(self, other: "QPoly | int") -> "QPoly":
        if isinstance(other, int):
            return QPoly({e: v * other for e, v in self._c.items()})
        c: Dict[int, int] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                e = e1 + e2
                c[e] = c.get(e, 0) + v1 * v2
        return QPoly(c)

    __rmul__ = __mul__

    def shift(self, k: int) -> "QPoly":
        """Multiply by q^k."""
        return QPoly({e + k: v for e, v in self._c.items()})

    def is_palindromic(self) -> bool:
        return all(self._c.get(-e) == v for e, v in self._c.items())

    def __repr__(self) -> str:
        if not self._c:
            return "QPoly(0)"
        terms = []
        for e in sorted(self._c):
            v = self._c[e]
            if e == 0:
                terms.append(f"{v}")
            elif e == 1:
                terms.append(f"{v}*q" if v != 1 else "q")
            else:
                terms.append(f"{v}*q^{e}" if v != 1 else f"q^{e}")
        return "QPoly(" + " + ".join(terms) + ")"

    def to_json(self) -> dict:
        """Serialization schema shared with the CLI."""
        return {
            "variable": "q",
            "meaning": "q = y^(1/2)",
            "coefficients": [
                {"exp": e, "coeff": str(self._c[e])} for e in sorted(self._c)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QPoly":
        return cls({int(t["exp"]): int(t["coeff"]) for t in obj["coefficients"]})


QPoly.zero = QPoly()
QPoly.one = QPoly({0: 1})


def qint(a: int) -> QPoly:
    """Quantum integer [a] = q^-(a-1) + q^-(a-3) + ... + q^(a-1), a >= 1."""
    if a < 1:
        raise QPolyError(f"quantum integer needs a >= 1, got {a}")
    return QPoly({k: 1 for k in range(-(a - 1), a, 2)})


def _sorted_tuple(values: Iterable[int]) -> Tuple[int, ...]:
    return tuple(sorted(values))


class QProduct:
    """scalar * q^monomial_exp * prod [a] over numerator / prod [a] over denominator.

    Entries equal to 1 are dropped on construction ([1] = 1) and common
    entries are cancelled, so equality is equality of canonical forms.
    """

    __slots__ = ("scalar", "monomial_exp", "numerator", "denominator")

    def __init__(
        self,
        scalar: Fraction | int = 1,
        numerator: Iterable[int] = (),
        denominator: Iterable[int] = (),
        monomial_exp: int = 0,
    ):
        num = [int(a) for a in numerator]
        den = [int(a) for a in denominator]
        for a in num + den:
            if a < 1:
                raise QPolyError(f"quantum-integer factors must be >= 1, got {a}")
        num = [a for a in num if a != 1]
        den = [a for a in den if a != 1]
        # cancel common factors
        den_left = list(den)
        kept_num = []
        for a in num:
            if a in den_left:
                den_left.remove(a)
            else:
                kept_num.append(a)
        object.__setattr__(self, "scalar", Fraction(scalar))
        object.__setattr__(self, "monomial_exp", int(monomial_exp))
        object.__setattr__(self, "numerator", _sorted_tuple(kept_num))
        object.__setattr__(self, "denominator", _sorted_tuple(den_left))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("QProduct is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, QProduct):
            return NotImplemented
        return (
            self.scalar == other.scalar
            and self.monomial_exp == other.monomial_exp
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self) -> int:
        return hash((self.scalar, self.monomial_exp, self.numerator, self.denominator))

    def __mul__(self, other: "QProduct") -> "QProduct":
        if not isinstance(other, QProduct):
            return NotImplemented
        return QProduct(
            self.scalar * other.scalar,
            self.numerator + other.numerator,
            self.denominator + other.denominator,
            self.monomial_exp + other.monomial_exp,
        )

    def __repr__(self) -> str:
        num = "".join(f"[{a}]" for a in self.numerator) or "1"
        den = "".join(f"[{a}]" for a in self.denominator)
        mono = f"*q^{self.monomial_exp}" if self.monomial_exp else ""
        s = f"{self.scalar}*" if self.scalar != 1 else ""
        return f"QProduct({s}{num}{'/' + den if den else ''}{mono})"


QProduct.one = QProduct()


def eval_y1(p: QProduct) -> Fraction:
    """Value at y = 1, using [a] -> a (the monomial evaluates to 1)."""
    value = p.scalar
    for a in p.numerator:
        value *= a
    for a in p.denominator:
        value /= a
    return value


def _monomial_sign_at_i(exp: int) -> int:
    """i^exp for exponents where the result is real; raises otherwise."""
    if exp % 2:
        raise NonRealAtI(f"q^{exp} at q = i is imaginary")
    return 1 if exp % 4 == 0 else -1


def limit_yneg1(p: QProduct) -> Fraction:
    """Exact limit of the product as y -> -1.

    Each even factor [a] vanishes to first order with coefficient
    (-1)^(a/2-1) * a/2 relative to (q + q^-1); odd factors tend to
    (-1)^((a-1)/2).  Unbalanced even factors in the numerator force the
    limit 0; unbalanced in the denominator is a pole.
    """
    even_num = [a for a in p.numerator if a % 2 == 0]
    even_den = [a for a in p.denominator if a % 2 == 0]
    if len(even_num) < len(even_den):
        raise PoleAtMinusOne(
            f"{len(even_den)} even denominator factors vs {len(even_num)} in the numerator"
        )
    if len(even_num) > len(even_den):
        return Fraction(0)
    value = p.scalar * _monomial_sign_at_i(p.monomial_exp)
    for a in p.numerator:
        if a % 2:
            value *= (-1) ** ((a - 1) // 2)
        else:
            value *= Fraction((-1) ** (a // 2 - 1) * a, 2)
    for a in p.denominator:
        if a % 2:
            value /= (-1) ** ((a - 1) // 2)
        else:
            value /= Fraction((-1) ** (a // 2 - 1) * a, 2)
    return value


def qproduct_to_poly(p: QProduct) -> QPoly:
    """Expand a QProduct into a QPoly; the scalar must come out integral."""
    poly = QPoly({p.monomial_exp: 1})
    for a in p.numerator:
        poly = poly * qint(a)
    for a in p.denominator:
        poly = _exact_div(poly, qint(a))
    if p.scalar.denominator != 1:
        scaled = {e: v * p.scalar for e, v in poly.coeffs.items()}
        if any(f.denominator != 1 for f in scaled.values()):
            raise NotPolynomial(f"scalar {p.scalar} does not clear to integers")
        return QPoly({e: int(f) for e, f in scaled.items()})
    return poly * int(p.scalar)


def _exact_div(num: QPoly, den: QPoly) -> QPoly:
    if den.is_zero():
        raise NotPolynomial("division by the zero polynomial")
    if num.is_zero():
        return QPoly.zero
    rem = dict(num.coeffs)
    den_c = den.coeffs
    den_top = max(den_c)
    lead = den_c[den_top]
    quot: Dict[int, int] = {}
    while rem:
        top = max(rem)
        c, r = divmod(rem[top], lead)
        if r:
            raise NotPolynomial("denominator does not divide numerator")
        e = top - den_top
        quot[e] = c
        for de, dv in den_c.items():
            k = e + de
            rem[k] = rem.get(k, 0) - c * dv
            if not rem[k]:
                del rem[k]
    return QPoly(quot)


def poly_eval_y1(p: QPoly) -> int:
    """Value at y = 1: the coefficient sum."""
    return sum(p.coeffs.values())


def poly_limit_yneg1(p: QPoly) -> Fraction:
    """Value at y = -1 via q = i; requires the result to be real.

    Only defined for polynomials whose value at q = i is real (palindromic
    inputs with even-exponent support cancellation); a nonzero imaginary
    part signals an upstream bug in weight bookkeeping.
    """
    re = 0
    im = 0
    for e, v in p.coeffs.items():
        r = e % 4
        if r == 0:
            re += v
        elif r == 1:
            im += v
        elif r == 2:
            re -= v
        else:
            im -= v
    if im:
        raise NonRealAtI(f"value at q = i has imaginary part {im}")
    return Fraction(re)
