import copy

import pytest

from fourierlaplace.catalog import (build_case, case_bindings, case_names, expected_report, get_case,
                                    numeric_params, self_duality_numerics, verify_case)
from fourierlaplace.errors import ConstraintViolation, ParseError
from fourierlaplace.germ import INF, validate_residue_trace
from fourierlaplace.linalg import to_strings


def test_six_cases():
    assert case_names() == ["JKTVI", "JKTV", "JKTIVa", "JKTIVb", "JKTII", "JKTI"]


def test_name_aliases():
    assert get_case("vi").name == "JKTVI"
    assert get_case("jktivb").name == "JKTIVb"
    with pytest.raises(ParseError):
        get_case("JKTVII")


def test_jktvi_leading_term():
    g = build_case("JKTVI").germ(INF)
    assert to_strings(g.coefficient(-2)) == [["0", "0", "0"], ["0", "1", "0"], ["0", "0", "t"]]


def test_jkti_leading_terms():
    g = build_case("JKTI").germ(INF)
    assert to_strings(g.coefficient(-3)) == [["0", "1", "0"], ["0", "0", "1"], ["0", "0", "0"]]
    assert to_strings(g.coefficient(-2))[2] == ["b", "0", "0"]


def test_constraint_violations():
    with pytest.raises(ConstraintViolation):
        build_case("JKTII", {"b": 0})
    with pytest.raises(ConstraintViolation):
        build_case("JKTVI", {"t": 1})
    with pytest.raises(ParseError):
        build_case("JKTI", {"nope": 2})


def test_assumptions_are_recorded():
    assert "b != 0" in build_case("JKTII").assumptions


def test_derived_parameter():
    assert str(case_bindings("JKTIVb")["c2"]) == "-c1 - c0"


@pytest.mark.parametrize("name", case_names())
def test_numeric_params_build(name):
    for seed in range(5):
        G = build_case(name, numeric_params(name, seed))
        assert not any(g.params() for g in G.germs.values())
        assert validate_residue_trace(G).ok


def test_templates():
    swans = {p["location"]: p["swan"] for p in expected_report("JKTIVb")["points"]}
    assert swans["inf^"] == 4
    assert {p["location"]: p["swan"] for p in expected_report("JKTII")["points"]}["inf^"] == 5
    assert all(p["swan"] == 0 for p in expected_report("JKTVI")["points"])


@pytest.mark.parametrize("name", case_names())
def test_verify_symbolic(name):
    v = verify_case(name)
    assert v.ok, str(v)


@pytest.mark.parametrize("name", ["JKTVI", "JKTII"])
def test_verify_numeric_instance(name):
    v = verify_case(name, numeric_params(name, 11))
    assert v.ok, str(v)


def test_sabotaged_template_names_the_field():
    template = copy.deepcopy(expected_report("JKTVI"))
    point = next(p for p in template["points"] if p["location"] == "-1")
    point["residues"] = ["b1 + 7"]
    v = verify_case("JKTVI", template=template)
    assert not v.ok
    assert any(d.startswith("point[-1].residues") for d in v.diffs)
    assert str(v).startswith("JKTVI: FAIL")


def test_self_duality_of_generic_triple_pole():
    c = self_duality_numerics()
    assert c.ok, c.details
