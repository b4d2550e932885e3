"""Exact arithmetic in the cyclotomic field Q(zeta_m).

Scalars wrap elements of sympy's ``QQ.cyclotomic_field(m)``, stored in the power
basis 1, z, ..., z^(phi(m)-1) of a root z of the m-th cyclotomic polynomial and
kept reduced by sympy, so two scalars are equal iff their coefficients are equal.
For m <= 2 the field is QQ itself.
"""

import logging
import re
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

from sympy import QQ, Poly, cyclotomic_poly, symbols, totient
from sympy.polys.polyclasses import ANP

from .errors import SupergradeError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]

_X = symbols("x")
_ZERO = Fraction(0)


class ScalarError(SupergradeError):
    """Base exception for cyclotomic scalar errors."""
    pass


class ScalarDivisionError(ScalarError):
    """Division by the zero scalar."""
    pass


class OrderMismatchError(ScalarError):
    """Scalars from different ambient orders were combined without lifting."""
    pass


class ScalarParseError(ScalarError):
    """Malformed scalar text."""
    pass


# ========== Fields ==========

def _check_order(m: int) -> None:
    if m < 1:
        raise ScalarError(f"Cyclotomic order must be >= 1, got {m}")


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Return the m-th cyclotomic polynomial as integer coefficients, lowest degree first.

    Raises:
        ScalarError: If m < 1
    """
    _check_order(m)
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(m, _X), _X).all_coeffs()))


@lru_cache(maxsize=None)
def euler_phi(m: int) -> int:
    """Degree of Q(zeta_m) over Q."""
    _check_order(m)
    return int(totient(m))


@lru_cache(maxsize=None)
def cyclotomic_domain(m: int):
    """The sympy domain holding Q(zeta_m): QQ for m <= 2, else the cyclotomic field."""
    _check_order(m)
    if m <= 2:
        return QQ
    logger.debug(f"Building Q(zeta_{m}) of degree {euler_phi(m)}")
    return QQ.cyclotomic_field(m, ss=True)


def _to_qq(value: Rational):
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def _element(order: int, coeffs: Sequence[Rational]):
    """Domain element with the given power-basis coefficients (lowest degree first)."""
    dom = cyclotomic_domain(order)
    if dom is QQ:
        return _to_qq(coeffs[0])
    return ANP([_to_qq(c) for c in reversed(coeffs)], dom.mod, QQ)


@lru_cache(maxsize=None)
def _root_value(k: int, m: int):
    """zeta_m^k as a domain element, k in [0, m)."""
    if m == 1:
        return QQ(1)
    if m == 2:
        return QQ(-1) ** k
    return _element(m, [0, 1] + [0] * (euler_phi(m) - 2)) ** k


# ========== Scalars ==========

class CycScalar:
    """An element of Q(zeta_m) in the power basis 1, z, ..., z^(phi(m)-1)."""

    __slots__ = ("order", "value", "_coeffs")

    def __init__(self, order: int, coeffs: Sequence[Rational]):
        _check_order(order)
        deg = euler_phi(order)
        if len(coeffs) != deg:
            raise ScalarError(f"Q(zeta_{order}) needs {deg} coefficients, got {len(coeffs)}")
        self.order = order
        self.value = _element(order, list(coeffs))
        self._coeffs = None

    @classmethod
    def from_domain(cls, value, order: int) -> "CycScalar":
        """Wrap an element of ``cyclotomic_domain(order)``."""
        obj = object.__new__(cls)
        obj.order = order
        obj.value = value
        obj._coeffs = None
        return obj

    @classmethod
    def zero(cls, order: int) -> "CycScalar":
        return cls.from_domain(cyclotomic_domain(order).zero, order)

    @classmethod
    def one(cls, order: int) -> "CycScalar":
        return cls.from_domain(cyclotomic_domain(order).one, order)

    @classmethod
    def from_rational(cls, value: Rational, order: int) -> "CycScalar":
        return cls.from_domain(_element(order, [value] + [0] * (euler_phi(order) - 1)), order)

    @property
    def domain(self):
        return cyclotomic_domain(self.order)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        """Power-basis coefficients, lowest degree first, padded to phi(m)."""
        if self._coeffs is None:
            if self.domain is QQ:
                self._coeffs = (_to_fraction(self.value),)
            else:
                low = [_to_fraction(c) for c in reversed(self.value.to_list())]
                self._coeffs = tuple(low + [_ZERO] * (euler_phi(self.order) - len(low)))
        return self._coeffs

    # ----- predicates -----

    def is_zero(self) -> bool:
        return not self.value

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ScalarError(f"{self.render()} is not rational")
        return self.coeffs[0]

    def __bool__(self) -> bool:
        return not self.is_zero()

    # ----- coercion -----

    def _coerce(self, other):
        """Domain element of other in this scalar's field, or NotImplemented."""
        if isinstance(other, CycScalar):
            if other.order != self.order:
                raise OrderMismatchError(
                    f"Cannot combine Q(zeta_{self.order}) with Q(zeta_{other.order}); lift first"
                )
            return other.value
        if isinstance(other, (int, Fraction)):
            return _element(self.order, [other] + [0] * (euler_phi(self.order) - 1))
        return NotImplemented

    def lift(self, new_order: int) -> "CycScalar":
        """Embed into Q(zeta_new_order) via zeta_m = zeta_{m'}^(m'/m).

        Raises:
            OrderMismatchError: If the current order does not divide new_order
        """
        if new_order == self.order:
            return self
        if new_order % self.order:
            raise OrderMismatchError(f"Q(zeta_{self.order}) does not embed in Q(zeta_{new_order})")
        step = new_order // self.order
        result = CycScalar.zero(new_order)
        for i, c in enumerate(self.coeffs):
            if c:
                result = result + root_of_unity(i * step, new_order) * c
        return result

    # ----- arithmetic -----

    def __add__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return CycScalar.from_domain(self.value + value, self.order)

    __radd__ = __add__

    def __neg__(self):
        return CycScalar.from_domain(-self.value, self.order)

    def __sub__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return CycScalar.from_domain(self.value - value, self.order)

    def __rsub__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return CycScalar.from_domain(value - self.value, self.order)

    def __mul__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return CycScalar.from_domain(self.value * value, self.order)

    __rmul__ = __mul__

    def inverse(self) -> "CycScalar":
        """Multiplicative inverse.

        Raises:
            ScalarDivisionError: If the scalar is zero
        """
        if self.is_zero():
            raise ScalarDivisionError("Inverse of zero scalar")
        return CycScalar.from_domain(self.domain.one / self.value, self.order)

    def __truediv__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        if not value:
            raise ScalarDivisionError("Division by zero")
        return CycScalar.from_domain(self.value / value, self.order)

    def __rtruediv__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return CycScalar.from_domain(value, self.order) * self.inverse()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return CycScalar.from_domain(self.value ** exponent, self.order)

    # ----- comparison / display -----

    def __eq__(self, other) -> bool:
        if isinstance(other, CycScalar):
            return self.order == other.order and self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def render(self) -> str:
        """Render as ``a0 + a1*z + a2*z^2``; ``0`` for zero."""
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(f"{c}")
            elif i == 1:
                terms.append(f"{c}*z")
            else:
                terms.append(f"{c}*z^{i}")
        return " + ".join(terms) if terms else "0"

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"CycScalar({self.order}, {self.render()!r})"


# ========== Constructors ==========

def root_of_unity(k: int, m: int) -> CycScalar:
    """Return zeta_m^k (k reduced mod m)."""
    _check_order(m)
    return CycScalar.from_domain(_root_value(k % m, m), m)


def scalar(value, order: int) -> CycScalar:
    """Coerce ints, Fractions, text, or lower-order scalars into Q(zeta_order)."""
    if isinstance(value, CycScalar):
        return value.lift(order)
    if isinstance(value, (int, Fraction)):
        return CycScalar.from_rational(value, order)
    if isinstance(value, str):
        return parse_scalar(value, order)
    raise ScalarError(f"Cannot interpret {value!r} as a scalar")


_TOKEN_RE = re.compile(r"[+-]?[^+-]+")
_TERM_RE = re.compile(r"^(?P<sign>[+-])?(?P<num>\d+(?:/\d+)?)?(?:\*?(?P<z>z)(?:\^(?P<exp>\d+))?)?$")


def parse_scalar(text: str, order: int) -> CycScalar:
    """Parse the ``a0 + a1*z + ...`` rendering back into Q(zeta_order).

    Every character must belong to a term: doubled or trailing signs are rejected.

    Raises:
        ScalarParseError: On malformed input
    """
    compact = text.replace(" ", "")
    if not compact:
        raise ScalarParseError("Empty scalar text")
    result = CycScalar.zero(order)
    pos = 0
    for token in _TOKEN_RE.finditer(compact):
        if token.start() != pos:
            raise ScalarParseError(f"Stray sign at position {pos} in {text!r}")
        pos = token.end()
        match = _TERM_RE.match(token.group())
        if not match or (match.group("num") is None and match.group("z") is None):
            raise ScalarParseError(f"Malformed scalar term {token.group()!r} in {text!r}")
        coef = Fraction(match.group("num") or 1)
        if match.group("sign") == "-":
            coef = -coef
        if match.group("z") is None:
            result = result + coef
        else:
            exp = int(match.group("exp") or 1)
            result = result + root_of_unity(exp, order) * coef
    if pos != len(compact):
        raise ScalarParseError(f"Trailing sign in {text!r}")
    return result
