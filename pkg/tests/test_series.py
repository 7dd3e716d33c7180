from fractions import Fraction

import pytest
import sympy

from fourierlaplace.errors import LogarithmicTerm
from fourierlaplace.scalar import Scalar, scalar_is_zero
from fourierlaplace.series import (LaurentSeries, puiseux_root, series_arith, series_compose,
                                   series_derive, series_integrate, series_invert, series_reversion)


def ws(text):
    return LaurentSeries.parse(text, "w")


def coeffs(s):
    return {k: str(v) for k, v in s.coeffs.items()}


def test_product():
    assert series_arith(ws("1 + w"), ws("1 - w"), "mul").equals(ws("1 - w^2"))


def test_sum():
    assert series_arith(ws("w^-1"), ws("w^-1"), "add").equals(ws("2*w^-1"))


def test_geometric_inverse():
    inv = series_invert(ws("1 - w"), 6)
    assert inv.prec == 6
    assert all(inv.coefficient(k) == Scalar.const(1) for k in range(6))


def test_monomial_inverse():
    assert series_invert(ws("t*w^-2")).equals(ws("1/t*w^2"))


def test_inverse_multiplies_back():
    a = ws("w^-2*(1 + b*w)")
    prod = series_arith(a, series_invert(a, 8), "mul")
    assert prod.equals(ws("1"), upto=prod.prec)
    assert coeffs(series_invert(a, 3)) == {2: "1", 3: "-b", 4: "b^2"}


def test_derivative_of_slope_one_exponent():
    assert series_derive(ws("-t*w^-1")).equals(ws("t*w^-2"))


def test_integral_differentiates_back():
    a = ws("t*w^-3 + b*w^-2")
    q = series_integrate(a)
    assert q.equals(ws("-t/2*w^-2 - b*w^-1"))
    assert series_derive(q).equals(a)


def test_integral_of_residue_term_is_logarithmic():
    with pytest.raises(LogarithmicTerm):
        series_integrate(ws("c*w^-1"))


def test_root_without_ramification():
    r = puiseux_root(ws("w^2"), 2)
    assert r.d == 1 and r.body.equals(ws("w"), upto=10)


def test_ramified_root_squares_back():
    r = puiseux_root(ws("b*w^-5"), 2)
    assert r.d == 2
    (k, c), = r.body.coeffs.items()
    assert k == -5
    assert scalar_is_zero(c * c - Scalar.param("b"))


def test_square_root_series_against_sympy():
    r = puiseux_root(ws("1 + w"), 2, terms=6)
    x = sympy.symbols("x")
    ref = sympy.series(sympy.sqrt(1 + x), x, 0, 6).removeO()
    for k in range(6):
        assert r.body.coefficient(k).constant_value() == Fraction(str(ref.coeff(x, k)))


def test_reversion_against_sympy():
    z = LaurentSeries.parse("z + z^2", "z")
    inv = series_reversion(z, 7)
    assert series_compose(z, inv, 7).equals(LaurentSeries.parse("z", "z"), upto=7)
    # Catalan numbers with alternating sign
    assert [inv.coefficient(k).constant_value() for k in range(1, 7)] == [1, -1, 2, -5, 14, -42]


def test_truncation_is_tracked():
    s = series_arith(LaurentSeries("w", {0: 1, 1: 1}, prec=3), ws("1 - w"), "mul")
    assert s.prec == 3
