import pytest

from fourierlaplace.errors import ChartMismatch, NotFormallyInvertible
from fourierlaplace.micro import (MicroOperator, WeylOperator, anti_involution, chart_identities,
                                  membership_diagnostic, micro_invert, micro_product, sign_flip)
from fourierlaplace.scalar import Scalar, scalar_is_zero

lam, t, b = (Scalar.param(n) for n in ("lam", "t", "b"))


def mono(chart, s, i, c=1, **kw):
    return MicroOperator.monomial(chart, s, i, c, **kw)


def one(chart):
    return mono(chart, 0, 0)


def test_what_times_z():
    prod = micro_product(MicroOperator.what("E0"), MicroOperator.space_var("E0"))
    assert prod.equals(mono("E0", 1, 1) - mono("E0", 0, 2))


def test_commutator_in_infinity_chart():
    a, w = MicroOperator.what("Einf"), MicroOperator.space_var("Einf")
    assert (micro_product(a, w) - micro_product(w, a)).equals(mono("Einf", 0, 2, -1))


def test_unit():
    assert micro_product(MicroOperator.what("E0"), one("E0")).equals(MicroOperator.what("E0"))


def test_chart_mismatch():
    with pytest.raises(ChartMismatch):
        micro_product(one("E0"), one("Einf"))


def test_inverse_of_derivation():
    assert micro_invert(MicroOperator.deriv("E0")).equals(MicroOperator.what("E0"))


def test_inverse_with_residue_term():
    p = MicroOperator.deriv("E0") - MicroOperator.space_var("E0", -1) * lam
    q = micro_invert(p)
    assert scalar_is_zero(q.coefficient(0, 1) - 1)
    assert scalar_is_zero(q.coefficient(-1, 2) - lam)
    assert scalar_is_zero(q.coefficient(-2, 3) - (lam + lam * lam))
    assert micro_product(p, q).equals(one("E0"), upto=q.prec)
    assert membership_diagnostic(q, "E0").verdict == "Escapes"
    # minimal z-exponent at order k+1 is -k
    assert all(q.profile()[k + 1] == -k for k in range(6))


def test_inverse_of_double_pole_stays_in_extended_ring():
    p = MicroOperator.deriv("Einf") - MicroOperator.space_var("Einf", -2) * t
    q = micro_invert(p)
    # closed form: sum_k t^k (-ŵ)^k d_w^-1 with d_w^-1 = -ŵ w^2
    d_inv = micro_product(mono("Einf", 0, 1, -1), mono("Einf", 2, 0))
    ref, power = d_inv, d_inv
    for _ in range(q.prec):
        power = micro_product(mono("Einf", 0, 1, -t), power)
        ref = ref + power
    assert q.equals(ref, upto=q.prec)
    assert membership_diagnostic(q, "Einf", expected=True).in_ring


def test_inverse_of_triple_pole_escapes():
    p = MicroOperator.deriv("Einf") - MicroOperator.space_var("Einf", -3) * t - MicroOperator.space_var("Einf", -2) * b
    q = micro_invert(p)
    assert micro_product(p, q).equals(one("Einf"), upto=q.prec)
    assert membership_diagnostic(q, "Einf", expected=False).verdict == "Escapes"


def test_nonmonomial_leading_part_is_not_invertible():
    with pytest.raises(NotFormallyInvertible):
        micro_invert(mono("E0", 0, 0) + mono("E0", 1, 0))


def test_fourier_map_on_generators():
    z, dz = WeylOperator.var("z"), WeylOperator.d("z")
    assert anti_involution(z) == -WeylOperator.d("ẑ")
    assert anti_involution(dz) == WeylOperator.var("ẑ")


def test_fourier_map_preserves_the_commutator():
    z, dz = WeylOperator.var("z"), WeylOperator.d("z")
    fz, fd = anti_involution(z), anti_involution(dz)
    assert fd * fz - fz * fd == WeylOperator.scalar("ẑ", 1)


def test_fourier_map_on_euler_operator():
    # products are mapped in order: (-d)(x) = -x d - 1
    euler = WeylOperator("z", {(1, 1): 1})
    assert anti_involution(euler) == WeylOperator("ẑ", {(1, 1): -1, (0, 0): -1})


def test_double_application_is_the_sign_flip():
    p = WeylOperator("z", {(2, 1): 3, (0, 3): -1, (1, 0): 5})
    assert anti_involution(anti_involution(p)) == sign_flip(p)


def test_chart_identities():
    rules = chart_identities()
    assert rules["d_w"].rhs == "-z^2*∂_z"
    assert rules["d_zhat"].rhs == "-ŵ^2*∂_ŵ"
    assert rules["zhat"].rhs == "ŵ^-1"
    with pytest.raises(TypeError):
        rules["zhat"] = None
