from fractions import Fraction as F

import pytest
import sympy

from fourierlaplace.catalog import build_case, generic_case
from fourierlaplace.errors import ConstraintViolation, ParseError
from fourierlaplace.germ import (INF, ZERO_POINT, ConnectionGerm, GlobalConnection, char_newton_polygon,
                                 formal_decompose, katz, slopes, swan, twist, validate_residue_trace)
from fourierlaplace.scalar import Scalar, scalar_is_zero
from fourierlaplace.series import LaurentSeries


def infinity_germ(name):
    return build_case(name).germ(INF)


def sympy_polygon_points(g):
    """Valuations of the characteristic polynomial coefficients, computed with sympy."""
    w, tau = sympy.symbols("w tau")
    syms = {p: sympy.Symbol(p) for p in g.params()}
    n = g.rank
    m = sympy.zeros(n, n)
    for k, mat in g.coefficients.items():
        m += sympy.Matrix(n, n, lambda i, j: sympy.sympify(str(mat[i][j]).replace("^", "**"), locals=syms)) * w ** k
    poly = sympy.Poly(sympy.expand((tau * sympy.eye(n) - m).det() * w ** (3 * n)), tau)
    pts = []
    for i in range(n + 1):
        c = sympy.expand(poly.coeff_monomial(tau ** i))
        if c != 0:
            pts.append((i, min(sympy.Poly(c, w).monoms())[0] - 3 * n))
    return sorted(pts)


@pytest.mark.parametrize("name", ["JKTVI", "JKTV", "JKTIVa", "JKTIVb", "JKTII", "JKTI"])
def test_polygon_points_match_sympy(name):
    g = infinity_germ(name)
    assert sorted(char_newton_polygon(g).points) == sympy_polygon_points(g)


def test_polygon_jktii():
    poly = char_newton_polygon(infinity_germ("JKTII"))
    assert [(s.slope, s.length) for s in poly.segments] == [(F(5, 2), 2), (F(3), 1)]
    assert poly.slope_multiset() == [(F(3, 2), 2), (F(2), 1)]


def test_polygon_jktiva():
    poly = char_newton_polygon(infinity_germ("JKTIVa"))
    assert poly.slope_multiset() == [(F(2, 3), 3)]


def test_regular_singular_germ_has_slope_zero():
    g = ConnectionGerm(INF, {-1: [["a", 0], [0, "c"]]})
    assert slopes(g) == [(F(0), 2)]
    assert swan(g) == 0


@pytest.mark.parametrize("name,expected", [
    ("JKTVI", [(F(1), 3)]),
    ("JKTV", [(F(1, 2), 2), (F(1), 1)]),
    ("JKTIVa", [(F(2, 3), 3)]),
    ("JKTIVb", [(F(2), 3)]),
    ("JKTII", [(F(3, 2), 2), (F(2), 1)]),
    ("JKTI", [(F(5, 3), 3)]),
])
def test_generic_slopes_after_removing_scalar_twist(name, expected):
    assert slopes(generic_case(name).germ(INF), normalize=True) == expected


@pytest.mark.parametrize("name,expected", [
    ("JKTVI", [(F(1), 3)]), ("JKTV", [(F(1), 3)]), ("JKTIVa", [(F(1), 3)]),
    ("JKTIVb", [(F(2), 3)]), ("JKTII", [(F(2), 3)]), ("JKTI", [(F(2), 3)]),
])
def test_generic_slopes_with_scalar_twist(name, expected):
    assert slopes(generic_case(name).germ(INF)) == expected


def test_swan_and_katz():
    assert swan(infinity_germ("JKTI")) == 5
    assert katz(infinity_germ("JKTI")) == F(5, 3)
    g = infinity_germ("JKTIVb")
    assert slopes(g) == [(F(0), 1), (F(2), 2)]
    assert swan(g) == 4


def test_decompose_jktvi():
    ft = formal_decompose(infinity_germ("JKTVI"))
    exps = sorted(str(s.exponent) for s in ft.summands)
    assert exps == ["-t*w^-1", "-w^-1", "0"]
    res = {str(s.exponent): s.residues[0] for s in ft.summands}
    assert res["0"] == Scalar.param("b0")
    assert res["-w^-1"] == Scalar.param("b1")


def test_decompose_jktv():
    ft = formal_decompose(infinity_germ("JKTV"))
    by_slope = {s.slope: s for s in ft.summands}
    assert by_slope[F(1, 2)].rank == 2 and by_slope[F(1, 2)].ramification == 2
    assert str(by_slope[F(1)].exponent) == "-t*w^-1"


def test_decompose_jktivb():
    ft = formal_decompose(infinity_germ("JKTIVb"))
    exps = {str(s.exponent) for s in ft.summands}
    assert exps == {"0", "-1/2*t1*w^-2 - b1*w^-1", "-1/2*t2*w^-2 - b2*w^-1"}
    assert ft.swan == 4


def test_residue_trace():
    assert validate_residue_trace(build_case("JKTVI")).ok
    assert validate_residue_trace(build_case("JKTIVb")).ok
    with pytest.raises(ConstraintViolation):
        build_case("JKTI", {"c2": 1})
    g = ConnectionGerm(INF, {-3: [[0, 1, 0], [0, 0, 1], [0, 0, 0]], -2: [[0, 0, 0], [0, 0, 0], ["b", 0, 0]],
                             -1: [[0, 0, 0], [0, 0, 0], [0, 0, 1]]})
    assert not validate_residue_trace(GlobalConnection([g])).ok


def test_twist_by_log_residue_kills_an_eigenvalue():
    g = ConnectionGerm(ZERO_POINT, {-1: [["l1", 0, 0], [0, "l2", 0], [0, 0, "l3"]]})
    h = twist(g, log_residue=-Scalar.param("l1"))
    diag = [h.residue()[i][i] for i in range(3)]
    assert scalar_is_zero(diag[0])
    assert diag[1] == Scalar.parse("l2 - l1")


def test_integer_twist_and_trivial_twist():
    g = infinity_germ("JKTII")
    h = twist(g, shift=2)
    assert all(scalar_is_zero(h.residue()[i][i] - g.residue()[i][i] - 2) for i in range(3))
    same = twist(g, exponent=LaurentSeries("w", {}))
    assert same.coefficients.keys() == g.coefficients.keys()


def test_round_trip_through_json():
    G = build_case("JKTIVb")
    again = GlobalConnection.loads(G.dumps())
    assert again.dumps() == G.dumps()


@pytest.mark.parametrize("doc", [
    "not json",
    '{"germs": []}',
    '{"germs": [{"point": "inf", "rank": 0, "coefficients": []}]}',
    '{"germs": [{"point": "inf", "rank": 2, "coefficients": [{"k": -2, "matrix": [["1"]]}]}]}',
    '{"germs": [{"rank": 1, "coefficients": []}]}',
])
def test_malformed_connections(doc):
    with pytest.raises(ParseError):
        GlobalConnection.loads(doc)
