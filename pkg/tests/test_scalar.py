from fractions import Fraction

import pytest
import sympy

from fourierlaplace.errors import DivisionByZero, ParseError
from fourierlaplace.scalar import (ROOTS, Scalar, fresh_root, parse_scalar, reduce_roots,
                                   scalar_arith, scalar_is_zero)

t = Scalar.param("t")


def test_subtraction_to_zero():
    assert scalar_is_zero(scalar_arith(t, t, "sub"))


def test_division_cancels_common_factor():
    q = scalar_arith(t * t - 1, t - 1, "div")
    assert q == t + 1
    assert scalar_is_zero(q * (t - 1) - (t * t - 1))


def test_inverse_times_value():
    assert scalar_arith(1 / t, t, "mul") == Scalar.const(1)


def test_zero_test_on_rational_identity():
    assert scalar_is_zero((t * t - 1) / (t - 1) - (t + 1))


def test_distinct_parameters_are_independent():
    assert not scalar_is_zero(parse_scalar("t1 - t2"))


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        t / (t - t)


@pytest.mark.parametrize("text", ["", "t +", "2**", "a b", "1/(t-"])
def test_parse_rejects_garbage(text):
    with pytest.raises(ParseError):
        parse_scalar(text)


def test_normal_form_matches_sympy_cancel():
    text = "(t^3 - b*t^2 - t + b)/(t^2 - 1) + b/t"
    ours = parse_scalar(text)
    ts, bs = sympy.symbols("t b")
    ref = sympy.cancel(sympy.sympify(text.replace("^", "**")))
    for tv, bv in [(Fraction(3, 7), Fraction(-2)), (Fraction(5), Fraction(1, 3))]:
        assert ours.evaluate({"t": tv, "b": bv}) == Fraction(str(ref.subs({ts: tv, bs: bv})))


def test_substitute_and_evaluate():
    s = parse_scalar("(a + 1)/(a - 2)")
    assert s.substitute({"a": Scalar.const(3)}) == Scalar.const(4)
    assert s.evaluate({"a": Fraction(1)}) == Fraction(-2)


def test_fresh_root_relation_is_applied():
    b = Scalar.param("bb")
    r = fresh_root(b, 2)
    assert fresh_root(b, 2) == r  # memoized
    assert scalar_is_zero(r * r - b)
    assert reduce_roots(r ** 3) == r * b
    assert reduce_roots(1 / r) == r / b
    name = next(iter(r.params()))
    assert ROOTS.relations[name][1] == 2
