"""Tests for exact cyclotomic scalars."""

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sympy import QQ, Poly, cyclotomic_poly, symbols, totient

from src.supergrade.cyclotomic import (
    CycScalar,
    OrderMismatchError,
    ScalarDivisionError,
    ScalarParseError,
    cyclotomic_domain,
    cyclotomic_polynomial,
    euler_phi,
    parse_scalar,
    root_of_unity,
    scalar,
)

X = symbols("x")
ORDER = 12


def scalars(order: int = ORDER):
    deg = euler_phi(order)
    return st.lists(st.integers(-4, 4), min_size=deg, max_size=deg).map(lambda c: CycScalar(order, c))


@pytest.mark.parametrize("m", range(1, 31))
def test_cyclotomic_polynomial_matches_sympy(m):
    """Test Phi_m against sympy's cyclotomic_poly."""
    expected = tuple(int(c) for c in reversed(Poly(cyclotomic_poly(m, X), X).all_coeffs()))
    assert cyclotomic_polynomial(m) == expected
    assert euler_phi(m) == int(totient(m))


def test_roots_of_unity():
    """Test zeta_m^m = 1 and zeta_4^2 = -1."""
    i = root_of_unity(1, 4)
    assert i * i == -1
    for m in (3, 5, 8, 12):
        assert root_of_unity(1, m) ** m == 1
        assert root_of_unity(1, m) ** (m - 1) == root_of_unity(-1, m)


def test_inverse_and_division():
    """Test inverses of non-rational scalars."""
    z = root_of_unity(1, 5)
    x = 1 + z
    assert x * x.inverse() == 1
    assert (x / x) == 1
    assert (2 / x) * x == 2
    with pytest.raises(ScalarDivisionError):
        CycScalar.zero(5).inverse()
    with pytest.raises(ScalarDivisionError):
        x / 0


def test_lift_embeds_roots():
    """Test zeta_4 lifted to Q(zeta_8) is zeta_8^2."""
    assert root_of_unity(1, 4).lift(8) == root_of_unity(2, 8)
    assert scalar(root_of_unity(3, 4), 12) == root_of_unity(9, 12)
    with pytest.raises(OrderMismatchError):
        root_of_unity(1, 4).lift(6)
    with pytest.raises(OrderMismatchError):
        root_of_unity(1, 4) + root_of_unity(1, 8)


def test_rational_helpers():
    """Test rational detection and comparison with ints and Fractions."""
    half = CycScalar.from_rational(Fraction(1, 2), 4)
    assert half.is_rational()
    assert half.rational_value() == Fraction(1, 2)
    assert half == Fraction(1, 2)
    assert CycScalar.zero(4) == 0
    assert not CycScalar.zero(4)
    assert not root_of_unity(1, 4).is_rational()


def test_parse_render():
    """Test parsing of rendered scalars and of hand-written text."""
    z = root_of_unity(1, 8)
    x = 3 - z * Fraction(1, 2) + z ** 3
    assert parse_scalar(x.render(), 8) == x
    assert parse_scalar("-z", 4) == -root_of_unity(1, 4)
    assert parse_scalar("1/2 + z^2", 8) == Fraction(1, 2) + z ** 2
    assert CycScalar.zero(8).render() == "0"
    with pytest.raises(ScalarParseError):
        parse_scalar("1 + w", 4)
    with pytest.raises(ScalarParseError):
        parse_scalar("", 4)


@settings(max_examples=60, deadline=None)
@given(scalars(), scalars(), scalars())
def test_field_axioms(a, b, c):
    """Test commutativity, associativity and distributivity in Q(zeta_12)."""
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0


@settings(max_examples=40, deadline=None)
@given(scalars())
def test_inverse_property(a):
    """Test a * a^-1 = 1 for nonzero a."""
    assume(not a.is_zero())
    assert a * a.inverse() == 1



@pytest.mark.parametrize("text", ["1++2", "1--2", "z+-1", "1+", "-", "2 + + z"])
def test_parse_rejects_stray_signs(text):
    """Test that doubled and trailing signs are parse errors, not dropped."""
    with pytest.raises(ScalarParseError):
        parse_scalar(text, 4)


def test_parse_accepts_leading_sign():
    """Test a leading sign on the first term."""
    assert parse_scalar("+1 - z", 4) == 1 - root_of_unity(1, 4)
    assert parse_scalar("-1/2", 4) == Fraction(-1, 2)


def test_scalars_live_in_sympy_cyclotomic_field():
    """Test that scalar values are elements of QQ.cyclotomic_field(m)."""
    field = cyclotomic_domain(8)
    assert field.is_Field
    assert cyclotomic_domain(8) is field
    z = root_of_unity(1, 8)
    assert z.value ** 8 == field.one
    assert (z ** 4).value == -field.one
    assert CycScalar.from_domain(field.one, 8) == 1
    assert cyclotomic_domain(2) == QQ
    assert root_of_unity(1, 2) == -1


def test_coefficients_are_reduced():
    """Test power-basis coefficients after reduction by Phi_8 = x^4 + 1."""
    z = root_of_unity(1, 8)
    assert (z ** 5).coeffs == (0, -1, 0, 0)
    assert (z ** 5).render() == "-1*z"
    assert (1 + z ** 3).coeffs == (1, 0, 0, 1)
    assert hash(CycScalar.from_rational(3, 8)) == hash(3)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
