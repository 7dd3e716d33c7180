from fractions import Fraction as F

import pytest
import sympy

from fourierlaplace.catalog import build_case
from fourierlaplace.errors import SlopeOutOfDomain
from fourierlaplace.germ import INF, ZERO_POINT, formal_decompose
from fourierlaplace.local_fl import (HAT_INF, HAT_ZERO, LocalNumerics, legendre_exponent, microlocal_rank,
                                     normal_form_solver, numeric_local_fl, reg_sing_rule, slope_one_rule)
from fourierlaplace.scalar import Scalar, scalar_is_zero
from fourierlaplace.series import LaurentSeries, PuiseuxSeries

t, b, l2, l3 = (Scalar.param(n) for n in ("t", "b", "l2", "l3"))
zh = sympy.Symbol("zh")


def exponent(text):
    return PuiseuxSeries.from_laurent(LaurentSeries.parse(text, "w"))


def polar_in_zhat(expr, order):
    """Polar part at zh = oo of a sympy expression, as {power: coefficient}."""
    h = sympy.Symbol("h")
    ser = sympy.series(expr.subs(zh, 1 / h), h, 0, 1).removeO()
    ser = sympy.expand(ser)
    return {k: sympy.nsimplify(ser.coeff(h, -k)) for k in range(1, order + 1) if ser.coeff(h, -k) != 0}


def legendre_oracle(q_of_s, s, z_of_s, branch_point):
    """Stationary value q - z*zh at the critical point q'(z) = zh, picking the branch near ``branch_point(zh)``."""
    eq = sympy.Eq(sympy.diff(q_of_s, s) / sympy.diff(z_of_s, s), zh)
    sols = sympy.solve(eq, s)
    big = 10 ** 6
    target = branch_point(big)
    sol = min(sols, key=lambda x: abs(complex(x.subs(zh, big)) - target))
    return sympy.simplify((q_of_s - z_of_s * zh).subs(s, sol))


def ours(qhat):
    return {-k: sympy.Rational(str(c.constant_value())) for k, c in qhat.body.coeffs.items()}


def test_numerics_inf_to_inf():
    out = numeric_local_fl("inf->inf^", LocalNumerics.of([(F(5, 3), 3)]))
    assert (out.rank, out.swan, out.slope_multiset) == (2, 5, ((F(5, 2), 2),))


def test_numerics_inf_to_zero():
    out = numeric_local_fl("inf->0^", LocalNumerics.of([(F(2, 3), 3)]))
    assert (out.rank, out.swan, out.slope_multiset) == (1, 2, ((F(2), 1),))


def test_numerics_slope_one_vanishes_at_infinity_hat():
    assert numeric_local_fl("inf->inf^", LocalNumerics.of([(F(1), 2)])).rank == 0


def test_numerics_zero_to_inf():
    out = numeric_local_fl("0->inf^", LocalNumerics.of([(F(1), 2)]))
    assert (out.rank, out.swan, out.slope_multiset) == (4, 2, ((F(1, 2), 4),))


def test_legendre_jktivb_summand_symbolic():
    loc, qhat = legendre_exponent(exponent("-t/2*w^-2 - b*w^-1"), "inf->inf^")
    assert loc == HAT_INF
    d = qhat.derive().body
    assert scalar_is_zero(d.coefficient(-3) + 1 / t)
    assert scalar_is_zero(d.coefficient(-2) + b / t)


@pytest.mark.parametrize("a,c", [(3, 2), (F(-1, 2), 5), (7, F(1, 3))])
def test_legendre_quadratic_against_sympy(a, c):
    s = sympy.Symbol("s")
    q = -sympy.Rational(str(a)) / 2 * s ** 2 - sympy.Rational(str(c)) * s
    ref = polar_in_zhat(legendre_oracle(q, s, s, lambda x: -x / float(a)), 2)
    _, qhat = legendre_exponent(exponent(f"-{a}/2*w^-2 - ({c})*w^-1"), "inf->inf^")
    assert ours(qhat) == ref


def test_legendre_cubic_is_ramified():
    _, qhat = legendre_exponent(exponent("w^-3 + 2*w^-2"), "inf->inf^", terms=8)
    assert qhat.d == 2 and qhat.slope() == F(3, 2)


def test_legendre_ramified_jktii_block_against_sympy():
    G = build_case("JKTII", {"b": 4, "c0": 3, "c1": 1, "t": 2})
    ft = formal_decompose(G.germ(INF))
    ram = next(x for x in ft.summands if x.slope == F(3, 2))
    _, qhat = legendre_exponent(ram.exponent, "inf->inf^")
    assert qhat.slope() == 3
    s = sympy.Symbol("s")  # s^2 = z
    coeffs = {k: sympy.Rational(str(c.constant_value())) for k, c in ram.exponent.body.coeffs.items()}
    q = sum(c * s ** (-k) for k, c in coeffs.items())
    lead = coeffs[-3]
    ref = polar_in_zhat(legendre_oracle(q, s, s ** 2, lambda x: 2 * x / (3 * float(lead))), 3)
    assert ours(qhat) == ref


def test_slope_one_exponent_goes_to_finite_point():
    loc, qhat = legendre_exponent(exponent("-t*w^-1"), "inf->finite")
    assert loc == -t
    assert not qhat.body.coeffs


def test_slope_domain_is_enforced():
    with pytest.raises(SlopeOutOfDomain):
        legendre_exponent(exponent("-t*w^-1"), "inf->inf^")


def test_residue_rule():
    out = reg_sing_rule([l2, l3])
    assert [x.location for x in out] == [HAT_INF, HAT_INF]
    assert [x.summand.residues[0] for x in out] == [l2 + 1, l3 + 1]


def test_slope_one_rule():
    r = slope_one_rule(t, 0)
    assert r.location == -t and r.summand.residues[0] == Scalar.const(-1)
    assert slope_one_rule(1, 0).location == Scalar.const(-1)
    b2 = Scalar.param("b2")
    assert slope_one_rule(t, b2).summand.residues[0] == b2 - 1


def test_microlocal_ranks():
    vi = build_case("JKTVI")
    assert microlocal_rank(vi.germ(INF)) == 0
    assert microlocal_rank(vi.germ(ZERO_POINT)) == 2
    assert microlocal_rank(build_case("JKTII").germ(INF)) == 2


def test_solver_jktii():
    nf = normal_form_solver(build_case("JKTII").germ(INF))
    assert nf.dimension == 2 and nf.pole_order == 4
    m4, m3 = nf.coefficients[-4], nf.coefficients[-3]
    assert scalar_is_zero(m4[0][0] - 1 / b) and scalar_is_zero(m3[1][1] + 1 / t)


def test_solver_jkti():
    nf = normal_form_solver(build_case("JKTI").germ(INF))
    m4, m3 = nf.coefficients[-4], nf.coefficients[-3]
    assert [[str(x) for x in r] for r in m4] == [["0", "1/b"], ["0", "0"]]
    assert [[str(x) for x in r] for r in m3] == [["0", "0"], ["-1", "0"]]


def test_solver_jktv_at_zero_hat():
    nf = normal_form_solver(build_case("JKTV").germ(INF), target=HAT_ZERO)
    assert [[str(x) for x in r] for r in nf.coefficients[-2]] == [["0", "1"], ["0", "0"]]
    assert [[str(x) for x in r] for r in nf.coefficients[-1]] == [["-1", "0"], ["0", "-1"]]
