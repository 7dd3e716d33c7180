"""The six rank-three local forms and their expected transforms.

Each case is a connection of rank three with singularities either at 0
(regular, residue ``diag(0, l2, l3)``) and a double pole at infinity, or a
triple pole at infinity only.  The last residue parameter at infinity is
derived from the residue-trace identity.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .driver import Check, TransformReport, fourier_transform
from .errors import ConstraintViolation, ParseError
from .germ import INF, ZERO_POINT, ConnectionGerm, GlobalConnection, validate_residue_trace
from .local_fl import HAT_INF, HAT_ZERO
from .scalar import Scalar, as_scalar, parse_scalar, scalar_is_zero

Rows = Sequence[Sequence[object]]


@dataclass(frozen=True)
class CatalogCase:
    name: str
    params: Tuple[str, ...]
    derived: Tuple[str, str]  # (parameter, formula in the others)
    constraints: Tuple[Tuple[str, str], ...]  # (expression that must not vanish, description)
    at_infinity: Callable[[Mapping[str, Scalar]], Dict[int, Rows]]
    generic_infinity: Callable[[Mapping[str, Scalar]], Dict[int, Rows]]
    generic_params: Tuple[str, ...]
    generic_derived: Tuple[str, str]
    has_zero: bool = True
    zero_params: Tuple[str, ...] = ("l2", "l3")

    @property
    def all_params(self) -> Tuple[str, ...]:
        return self.params + (self.derived[0],)


def _n3(a):
    return [[a, 1, 0], [0, a, 1], [0, 0, a]]


def _vi(p):
    return {-2: [[0, 0, 0], [0, 1, 0], [0, 0, p["t"]]],
            -1: [[p["b0"], 0, 0], [0, p["b1"], 0], [0, 0, p["b2"]]]}


def _vi_gen(p):
    return {-2: [[p["a0"], 0, 0], [0, p["a1"], 0], [0, 0, p["a2"]]],
            -1: [[p["b0"], 0, 0], [0, p["b1"], 0], [0, 0, p["b2"]]]}


def _v(p, a0=0):
    return {-2: [[p.get("a0", a0), 1, 0], [0, p.get("a0", a0), 0], [0, 0, p.get("a1", p.get("t"))]],
            -1: [[0, 0, 0], [p["b0"], p["b1"], 0], [0, 0, p["b2"]]]}


def _iva(p):
    return {-2: _n3(p.get("a0", 0)),
            -1: [[0, 0, 0], [0, 0, 0], [p["b0"], p["b1"], p["b2"]]]}


def _ivb(p):
    return {-3: [[0, 0, 0], [0, p["t1"], 0], [0, 0, p["t2"]]],
            -2: [[0, 0, 0], [0, p["b1"], 0], [0, 0, p["b2"]]],
            -1: [[p["c0"], 0, 0], [0, p["c1"], 0], [0, 0, p["c2"]]]}


def _ivb_gen(p):
    return {-3: [[p["a0"], 0, 0], [0, p["a1"], 0], [0, 0, p["a2"]]],
            -2: [[p["b0"], 0, 0], [0, p["b1"], 0], [0, 0, p["b2"]]],
            -1: [[p["c0"], 0, 0], [0, p["c1"], 0], [0, 0, p["c2"]]]}


def _ii(p):
    return {-3: [[0, 1, 0], [0, 0, 0], [0, 0, p["t"]]],
            -2: [[0, 0, 0], [p["b"], 0, 0], [0, 0, 0]],
            -1: [[0, 0, 0], [p["c0"], p["c1"], 0], [0, 0, p["c2"]]]}


def _ii_gen(p):
    return {-3: [[p["a0"], 1, 0], [0, p["a0"], 0], [0, 0, p["a1"]]],
            -2: [[0, 0, 0], [p["b0"], p["b1"], 0], [0, 0, p["b2"]]],
            -1: [[0, 0, 0], [p["c0"], p["c1"], 0], [0, 0, p["c2"]]]}


def _i(p):
    return {-3: _n3(0),
            -2: [[0, 0, 0], [0, 0, 0], [p["b"], 0, 0]],
            -1: [[0, 0, 0], [0, 0, 0], [p["c0"], p["c1"], p["c2"]]]}


def _i_gen(p):
    return {-3: _n3(p["a0"]),
            -2: [[0, 0, 0], [0, 0, 0], [p["b0"], p["b1"], p["b2"]]],
            -1: [[0, 0, 0], [0, 0, 0], [p["c0"], p["c1"], p["c2"]]]}


CASES: Dict[str, CatalogCase] = {c.name: c for c in (
    CatalogCase("JKTVI", ("t", "b0", "b1"), ("b2", "l2 + l3 - b0 - b1"),
                (("t", "t != 0"), ("t - 1", "t != 1")),
                _vi, _vi_gen, ("a0", "a1", "a2", "b0", "b1"), ("b2", "l1 + l2 + l3 - b0 - b1")),
    CatalogCase("JKTV", ("t", "b0", "b1"), ("b2", "l2 + l3 - b1"),
                (("t", "t != 0"), ("b0", "b0 != 0")),
                _v, _v, ("a0", "a1", "b0", "b1"), ("b2", "l1 + l2 + l3 - b1")),
    CatalogCase("JKTIVa", ("b0", "b1"), ("b2", "l2 + l3"),
                (("b0", "b0 != 0"),),
                _iva, _iva, ("a0", "b0", "b1"), ("b2", "l1 + l2 + l3")),
    CatalogCase("JKTIVb", ("t1", "t2", "b1", "b2", "c0", "c1"), ("c2", "-c0 - c1"),
                (("t1", "t1 != 0"), ("t2", "t2 != 0"), ("t1 - t2", "t1 != t2")),
                _ivb, _ivb_gen, ("a0", "a1", "a2", "b0", "b1", "b2", "c0", "c1"), ("c2", "-c0 - c1"),
                has_zero=False, zero_params=()),
    CatalogCase("JKTII", ("t", "b", "c0", "c1"), ("c2", "-c1"),
                (("t", "t != 0"), ("b", "b != 0")),
                _ii, _ii_gen, ("a0", "a1", "b0", "b1", "b2", "c0", "c1"), ("c2", "-c1"),
                has_zero=False, zero_params=()),
    CatalogCase("JKTI", ("b", "c0", "c1"), ("c2", "0"),
                (("b", "b != 0"),),
                _i, _i_gen, ("a0", "b0", "b1", "b2", "c0", "c1"), ("c2", "0"),
                has_zero=False, zero_params=()),
)}


def case_names() -> List[str]:
    return list(CASES)


def get_case(name: str) -> CatalogCase:
    key = name.upper().replace("JKT", "")
    for case in CASES.values():
        if case.name.upper() == "JKT" + key:
            return case
    raise ParseError(f"unknown case {name!r}; choose one of {', '.join(CASES)}")


def _bind(names: Sequence[str], params: Optional[Mapping[str, object]]) -> Dict[str, Scalar]:
    params = dict(params or {})
    out = {}
    for n in names:
        out[n] = as_scalar(params.pop(n)) if n in params else Scalar.param(n)
    return out, params


def _resolve(case: CatalogCase, params, generic: bool):
    names = (case.generic_params if generic else case.params)
    zero_names = (("l1",) + case.zero_params) if (generic and case.has_zero) else case.zero_params
    bound, rest = _bind(names + zero_names, params)
    dname, formula = case.generic_derived if generic else case.derived
    value = parse_scalar(formula).substitute(bound) if formula.strip() != "0" else Scalar.const(0)
    if dname in rest:
        given = as_scalar(rest.pop(dname))
        if not scalar_is_zero(given - value):
            raise ConstraintViolation(f"{dname} = {given} violates the residue-trace identity {dname} = {formula}")
    if rest:
        raise ParseError(f"unknown parameters for {case.name}: {', '.join(sorted(rest))}")
    bound[dname] = value
    return bound


def _constraints(case: CatalogCase, bound: Mapping[str, Scalar]) -> List[str]:
    recorded = []
    checks = list(case.constraints) + [(n, f"{n} != 0") for n in case.zero_params]
    for expr, text in checks:
        value = parse_scalar(expr).substitute(bound)
        if scalar_is_zero(value):
            raise ConstraintViolation(f"{case.name} needs {text}")
        if not value.is_constant():
            recorded.append(text)
    return recorded


def _zero_germ(bound, generic: bool) -> ConnectionGerm:
    first = bound["l1"] if generic else 0
    return ConnectionGerm(ZERO_POINT, {-1: [[first, 0, 0], [0, bound["l2"], 0], [0, 0, bound["l3"]]]})


def build_case(name: str, params: Optional[Mapping[str, object]] = None) -> GlobalConnection:
    """Connection for a catalog case with the normalized leading terms and symbolic residues."""
    case = get_case(name)
    bound = _resolve(case, params, generic=False)
    assumptions = _constraints(case, bound)
    germs = [ConnectionGerm(INF, case.at_infinity(bound))]
    if case.has_zero:
        germs.insert(0, _zero_germ(bound, False))
    G = GlobalConnection(germs, case.name, assumptions)
    check = validate_residue_trace(G)
    if not check.ok:
        raise ConstraintViolation(check.detail)
    return G


def generic_case(name: str, params: Optional[Mapping[str, object]] = None) -> GlobalConnection:
    """Unnormalized form: every leading coefficient symbolic, residue eigenvalues at 0 generic."""
    case = get_case(name)
    bound = _resolve(case, params, generic=True)
    germs = [ConnectionGerm(INF, case.generic_infinity(bound))]
    if case.has_zero:
        germs.insert(0, _zero_germ(bound, True))
    return GlobalConnection(germs, case.name + " (generic)")


def case_bindings(name: str, params: Optional[Mapping[str, object]] = None) -> Dict[str, Scalar]:
    """Parameter values used by :func:`build_case`, including the derived one."""
    return _resolve(get_case(name), params, generic=False)


def numeric_params(name: str, seed: int) -> Dict[str, Fraction]:
    """Random rational values satisfying the case constraints (for fast property tests)."""
    case = get_case(name)
    rng = random.Random(seed)
    names = case.params + case.zero_params
    while True:
        values = {n: Fraction(rng.randint(-12, 12), rng.randint(1, 4)) for n in names}
        try:
            build_case(name, values)
        except ConstraintViolation:
            continue
        return values


# ------------------------------------------------------------ expected data

def _templates() -> dict:
    text = resources.files("fourierlaplace").joinpath("data/expected.json").read_text(encoding="utf-8")
    return json.loads(text)


def expected_report(name: str) -> dict:
    """Expected transform of a catalog case; fields not stated are the string ``"unknown"``."""
    return _templates()[get_case(name).name]


def _location(text: str, bound):
    if text == "inf^":
        return HAT_INF
    if text == "0^":
        return HAT_ZERO
    return parse_scalar(text).substitute(bound)


@dataclass
class Verification:
    name: str
    ok: bool
    diffs: List[str] = field(default_factory=list)
    report: Optional[TransformReport] = None

    def __str__(self):
        head = f"{self.name}: {'PASS' if self.ok else 'FAIL'}"
        return head if self.ok else head + "".join(f"\n  {d}" for d in self.diffs)


def compare_report(report: TransformReport, template: dict, bound: Mapping[str, Scalar]) -> List[str]:
    """Field-level differences between a report and a template."""
    diffs = []

    def scalar(text):
        return parse_scalar(text).substitute(bound)

    if template.get("rank_hat", "unknown") != "unknown" and report.rank_hat != template["rank_hat"]:
        diffs.append(f"rank_hat: got {report.rank_hat}, expected {template['rank_hat']}")
    wanted = [(_location(p["location"], bound), p) for p in template.get("points", [])]
    if template.get("exact_locations"):
        extra = [p.label for p in report.singular_points
                 if not any(_eq_loc(p.location, loc) for loc, _ in wanted)]
        if extra:
            diffs.append(f"locations: unexpected points {extra}")
    for loc, spec in wanted:
        where = f"point[{spec['location']}]"
        point = report.point(loc)
        if point is None:
            diffs.append(f"{where}: missing")
            continue
        n = point.numerics
        if "regular" in spec and (n.swan == 0) != spec["regular"]:
            diffs.append(f"{where}.regular: got {n.swan == 0}, expected {spec['regular']}")
        for key, got in (("swan", n.swan), ("microlocal_rank", n.rank), ("pole_order", point.pole_order)):
            if spec.get(key, "unknown") != "unknown" and got != spec[key]:
                diffs.append(f"{where}.{key}: got {got}, expected {spec[key]}")
        if spec.get("slopes", "unknown") != "unknown":
            want = [(Fraction(s), r) for s, r in spec["slopes"]]
            if list(n.slope_multiset) != want:
                diffs.append(f"{where}.slopes: got {n.slope_multiset}, expected {want}")
        if spec.get("residues", "unknown") != "unknown":
            got = [r for s in point.formal_type.summands for r in (s.residues or (None,) * s.rank)]
            want = [scalar(r) for r in spec["residues"]]
            if not _same_multiset(got, want):
                shown = ["unknown" if r is None else str(r) for r in got]
                diffs.append(f"{where}.residues: got {shown}, expected {spec['residues']}")
        if spec.get("matrix", "unknown") != "unknown":
            nf = point.normal_form
            if nf is None:
                diffs.append(f"{where}.matrix: no matrix computed")
            else:
                for k, rows in spec["matrix"].items():
                    want = linalg.from_strings(rows, scalar)
                    got = nf.coefficients.get(int(k), linalg.zeros(nf.dimension))
                    if len(got) != len(want) or not linalg.equal(got, want):
                        diffs.append(f"{where}.matrix[{k}]: got {linalg.fmt(got)}, expected {linalg.fmt(want)}")
    return diffs


def _eq_loc(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    return scalar_is_zero(a - b)


def _same_multiset(got, want) -> bool:
    if len(got) != len(want) or any(r is None for r in got):
        return False
    pool = list(got)
    for w in want:
        hit = next((g for g in pool if scalar_is_zero(g - w)), None)
        if hit is None:
            return False
        pool.remove(hit)
    return True


def verify_case(name: str, params: Optional[Mapping[str, object]] = None, template: Optional[dict] = None,
                **transform_options) -> Verification:
    """Build, transform and compare against the expected template."""
    case = get_case(name)
    template = template if template is not None else expected_report(case.name)
    try:
        G = build_case(case.name, params)
        report = fourier_transform(G, **transform_options)
    except Exception as exc:
        return Verification(case.name, False, [f"{type(exc).__name__}: {exc}"])
    diffs = compare_report(report, template, case_bindings(case.name, params))
    return Verification(case.name, not diffs, diffs, report)


def self_duality_numerics() -> Check:
    """Fully generic diagonal triple pole: the transform is again rank three, Swan six, supported at ∞̂."""
    G = generic_case("JKTIVb")
    report = fourier_transform(G)
    locs = [p.label for p in report.singular_points]
    p = report.point(HAT_INF)
    ok = locs == ["∞̂"] and report.rank_hat == 3 and p.numerics.swan == 6
    return Check("self_duality", ok, f"points {locs}, rank {report.rank_hat}, Swan {p.numerics.swan if p else None}")


__all__ = ["CatalogCase", "CASES", "case_names", "get_case", "build_case", "generic_case", "case_bindings",
           "numeric_params", "expected_report", "compare_report", "verify_case", "Verification",
           "self_duality_numerics"]
