"""Global formal Fourier-Laplace transform of a connection on the projective line.

The source may have singular points at 0 and infinity only.  The transform is
assembled from the local rules in :mod:`fourierlaplace.local_fl`:

* the germ at 0 feeds the point at infinity of the dual line;
* parts of the germ at infinity with slope above one also feed ∞̂;
* parts with slope one produce regular finite points;
* parts with slope below one feed 0̂.

Every quantity that can be computed in two ways is computed in two ways,
and the comparisons are recorded as checks in the report.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import (ConsistencyFailure, Inconclusive, InconsistentRelations, OracleDisagreement,
                     SlopeOutOfDomain, UnsupportedGermShape)
from .germ import (INF, ZERO_POINT, ConnectionGerm, FormalSummand, FormalType, GlobalConnection,
                   formal_decompose, point_label, slopes, swan, validate_residue_trace)
from .local_fl import (HAT_INF, HAT_ZERO, LocalNumerics, NormalForm, TransformedSummand, _regular,
                       check_seeds, legendre_exponent, location_label, microlocal_rank,
                       normal_form_solver, numeric_local_fl, reg_sing_rule)
from .scalar import ROOTS, ZERO, Scalar, as_scalar, reduce_roots, scalar_is_zero
from .series import DEFAULT_TERMS, LaurentSeries, PuiseuxSeries

Location = object  # HAT_INF, HAT_ZERO or a Scalar


@dataclass
class SingularPoint:
    location: Location
    formal_type: FormalType
    numerics: LocalNumerics
    provenance: Tuple[str, ...]
    normal_form: Optional[NormalForm] = None
    trivial_rank: int = 0
    notes: Tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return location_label(self.location)

    @property
    def pole_order(self) -> Optional[int]:
        """Pole order of the attached matrix, else ``katz + 1`` when that is an integer."""
        if self.normal_form is not None:
            return self.normal_form.pole_order
        k = self.formal_type.katz + 1
        return int(k) if k.denominator == 1 else None

    def to_dict(self) -> dict:
        out = {
            "location": self.label,
            "pole_order": self.pole_order,
            "microlocal_rank": self.formal_type.rank,
            "nonsingular_rank": self.trivial_rank,
            "numerics": self.numerics.to_dict(),
            "summands": [dict(s.to_dict(), provenance=p) for s, p in zip(self.formal_type.summands,
                                                                          self.provenance)],
        }
        if self.normal_form is not None:
            out["normal_form"] = self.normal_form.to_dict()
        if self.notes:
            out["notes"] = list(self.notes)
        return out


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    details: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "details": self.details}


@dataclass
class TransformReport:
    source: GlobalConnection
    rank_hat: int
    singular_points: List[SingularPoint]
    checks: List[Check] = field(default_factory=list)

    def point(self, location) -> Optional[SingularPoint]:
        for p in self.singular_points:
            if _same_location(p.location, location):
                return p
        return None

    @property
    def locations(self) -> List[Location]:
        return [p.location for p in self.singular_points]

    def finite_points(self) -> List[SingularPoint]:
        return [p for p in self.singular_points if not isinstance(p.location, str)]

    def check(self, name: str) -> Optional[Check]:
        return next((c for c in self.checks if c.name == name), None)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        src = self.source
        return {
            "source": {"name": src.name, "rank": src.rank,
                       "points": [point_label(k) for k in src.points()],
                       "assumptions": list(src.assumptions)},
            "rank_hat": self.rank_hat,
            "singular_points": [p.to_dict() for p in self.singular_points],
            "roots": self.root_relations(),
            "checks": [c.to_dict() for c in self.checks],
        }

    def root_relations(self) -> List[str]:
        """Defining relations of the fresh root parameters used by the exponents."""
        names = set()
        for p in self.singular_points:
            for s in p.formal_type.summands:
                for c in s.exponent.body.coeffs.values():
                    names |= c.params()
        names &= set(ROOTS.relations)
        todo = list(names)
        while todo:
            extra = ROOTS.relations[todo.pop()][0].params() & set(ROOTS.relations)
            todo.extend(extra - names)
            names |= extra
        return [ROOTS.describe(n) for n in sorted(names, key=lambda n: int(n[4:]))]

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def summary(self) -> str:
        lines = [f"transform of {self.source.name or 'connection'} (rank {self.source.rank})",
                 f"rank of the transform: {self.rank_hat}"]
        for p in self.singular_points:
            n = p.numerics
            kind = "regular" if n.swan == 0 else f"irregular, Swan {n.swan}"
            lines.append(f"point {p.label}: microlocal rank {n.rank}, {kind}")
            for s, prov in zip(p.formal_type.summands, p.provenance):
                lines.append(f"    {s}  <{prov}>")
            if p.normal_form is not None:
                lines.append(f"    matrix: {p.normal_form}")
            for note in p.notes:
                lines.append(f"    note: {note}")
        for rel in self.root_relations():
            lines.append(f"root: {rel}")
        for c in self.checks:
            lines.append(f"check {c.name}: {'ok' if c.ok else 'FAILED'}" + (f" ({c.details})" if c.details else ""))
        return "\n".join(lines)


# ------------------------------------------------------------ helpers

def _same_location(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    return scalar_is_zero(as_scalar(a) - as_scalar(b))


def _order_key(loc):
    if loc == HAT_ZERO:
        return (0, "")
    if loc == HAT_INF:
        return (2, "")
    return (1, str(loc))


def _drop_trivial(ft: FormalType) -> FormalType:
    """Remove regular summands at 0 whose residue is known to vanish."""
    keep = []
    for s in ft.summands:
        if s.is_regular and s.residues_known():
            nz = tuple(r for r in s.residues if not scalar_is_zero(r))
            if nz:
                keep.append(FormalSummand(s.exponent, len(nz), nz))
        else:
            keep.append(s)
    return FormalType(tuple(keep))


class _Collector:
    """Transformed summands and numerics grouped by location."""

    def __init__(self):
        self.items: List[Tuple[Location, List[TransformedSummand], List[Tuple[Fraction, int]]]] = []

    def _slot(self, loc):
        for entry in self.items:
            if _same_location(entry[0], loc):
                return entry
        entry = (loc, [], [])
        self.items.append(entry)
        return entry

    def add(self, loc, summands: Sequence[TransformedSummand], numerics: LocalNumerics):
        _, s, n = self._slot(loc)
        s.extend(summands)
        n.extend(numerics.slope_multiset)

    def locations(self):
        return sorted((e[0] for e in self.items), key=_order_key)

    def summands(self, loc) -> List[TransformedSummand]:
        return self._slot(loc)[1]

    def numerics(self, loc) -> LocalNumerics:
        return LocalNumerics.of(self._slot(loc)[2])


def _legendre_summand(s: FormalSummand, direction: str, source, numerics: LocalNumerics, terms):
    loc, qhat = legendre_exponent(s.exponent, direction, source=source, terms=terms)
    if numerics.rank % qhat.d:
        raise ConsistencyFailure(f"Legendre ramification {qhat.d} does not divide rank {numerics.rank}")
    summand = FormalSummand(qhat, numerics.rank, (None,) * numerics.rank)
    return TransformedSummand(loc, summand, f"legendre({direction})")


def _from_zero(s: FormalSummand, col: _Collector, terms):
    n = numeric_local_fl("0->inf^", LocalNumerics.of([(s.slope, s.rank)]))
    if s.is_regular:
        if s.residues_known():
            out = reg_sing_rule(s.residues)
        else:
            out = [TransformedSummand(HAT_INF, _regular("ŵ", s.rank, (None,) * s.rank), "reg_sing_rule")]
    else:
        out = [_legendre_summand(s, "0->inf^", ZERO_POINT, n, terms)]
    col.add(HAT_INF, out, n)


def _from_inf(s: FormalSummand, col: _Collector, terms):
    slope = s.slope
    if s.is_regular:
        n = numeric_local_fl("inf->0^", LocalNumerics.of([(0, s.rank)]))
        col.add(HAT_ZERO, [TransformedSummand(HAT_ZERO, _regular("ẑ", s.rank, (None,) * s.rank),
                                              "numeric_local_fl(inf->0^)")], n)
    elif slope > 1:
        n = numeric_local_fl("inf->inf^", LocalNumerics.of([(slope, s.rank)]))
        col.add(HAT_INF, [_legendre_summand(s, "inf->inf^", INF, n, terms)], n)
    elif slope == 1:
        if s.ramification != 1:
            raise UnsupportedGermShape(f"ramified slope-one exponent {s.exponent}")
        alpha = s.exponent.body.coefficient(-1)
        loc, _ = legendre_exponent(s.exponent, "inf->finite", terms=terms)
        if not scalar_is_zero(loc - alpha):
            raise ConsistencyFailure(f"stationary point {loc} differs from the slope-one location {alpha}")
        residues = tuple(None if c is None else c - 1 for c in s.residues) or (None,) * s.rank
        col.add(alpha, [TransformedSummand(alpha, _regular("ẑ", s.rank, residues), "slope_one_rule")],
                LocalNumerics.of([(Fraction(0), s.rank)]))
    else:
        n = numeric_local_fl("inf->0^", LocalNumerics.of([(slope, s.rank)]))
        col.add(HAT_ZERO, [_legendre_summand(s, "inf->0^", INF, n, terms)], n)


def _from_finite(c, s: FormalSummand, col: _Collector):
    if not s.is_regular:
        raise UnsupportedGermShape("irregular germs at finite nonzero points are not supported")
    q = PuiseuxSeries.from_laurent(LaurentSeries.monomial("ŵ", -1, -as_scalar(c)))
    col.add(HAT_INF, [TransformedSummand(HAT_INF, FormalSummand(q, s.rank, (None,) * s.rank), "translation_rule")],
            LocalNumerics.of([(Fraction(1), s.rank)]))


def _transform_formal(data: Sequence[Tuple[object, FormalType]], terms: int = DEFAULT_TERMS) -> _Collector:
    col = _Collector()
    for point, ft in data:
        if point == ZERO_POINT:
            for s in _drop_trivial(ft).summands:
                _from_zero(s, col, terms)
        elif point == INF:
            for s in ft.summands:
                _from_inf(s, col, terms)
        else:
            for s in ft.summands:
                _from_finite(point, s, col)
    return col


# ------------------------------------------------------------ transform

def _singular_germs(G: GlobalConnection) -> Dict[object, ConnectionGerm]:
    out = {}
    for key, g in G.germs.items():
        if g.pole_order < 1:
            continue
        if key not in (INF, ZERO_POINT):
            raise UnsupportedGermShape(f"singular point {key} is not 0 or infinity; move it to 0 first")
        out[key] = g
    if not out:
        raise UnsupportedGermShape("input must be singular somewhere")
    return out


def _reliable_orders(nf: NormalForm) -> List[int]:
    p = nf.pole_order
    return [k for k in (-p, -p + 1) if k < -1]


def _diagonal(m) -> bool:
    return all(m[i][j].is_zero() for i in range(len(m)) for j in range(len(m)) if i != j)


def _legendre_vs_solver(nf: NormalForm, seeds: Sequence[FormalSummand]) -> Check:
    check_seeds(nf, seeds)
    orders = _reliable_orders(nf)
    if not all(_diagonal(nf.coefficients.get(k, linalg.zeros(nf.dimension))) for k in orders):
        return Check("legendre_vs_solver", True, "edge equations of the solver matrix hold for every seed")
    entries = [{k: nf.coefficients[k][i][i] for k in orders if k in nf.coefficients} for i in range(nf.dimension)]
    unmatched = list(range(nf.dimension))
    for seed in seeds:
        if seed.exponent.d != 1 or seed.is_regular:
            continue
        dq = seed.exponent.body.derive()
        want = {k: dq.coefficient(k) for k in orders}
        hit = next((i for i in unmatched
                    if all(scalar_is_zero(entries[i].get(k, ZERO) - want[k]) for k in orders)), None)
        if hit is None:
            return Check("legendre_vs_solver", False, f"no diagonal entry matches d/dŵ of {seed.exponent}")
        unmatched.remove(hit)
    return Check("legendre_vs_solver", True,
                 f"diagonal entries agree with the Legendre exponents at orders {orders}")


def _checked_microlocal_rank(g: ConnectionGerm, chart: str, order: int, space_bound: int,
                            notes: List[str], oracle: bool = True, ft: Optional[FormalType] = None) -> int:
    """Closed-form microlocal rank with the explicit-inverse oracle attached.

    The oracle judges growth of inverse coefficients that are polynomials in
    the parameters; at special numeric values (a positive integer leading
    coefficient, say) those polynomials vanish and the oracle has nothing to
    see.  Such disagreements on parameter-free germs are noted, not raised.
    """
    if not oracle:
        return microlocal_rank(g, chart, check=False, order=order, ft=ft)
    try:
        return microlocal_rank(g, chart, order=order, space_bound=space_bound, ft=ft)
    except Inconclusive as exc:
        notes.append(f"microlocal oracle at {point_label(g.point)} inconclusive: {exc}")
    except OracleDisagreement as exc:
        if g.params():
            raise
        notes.append(f"microlocal oracle at {point_label(g.point)} degenerate at these values: {exc}")
    return microlocal_rank(g, chart, check=False, order=order, ft=ft)


def fourier_transform(G: GlobalConnection, terms: int = DEFAULT_TERMS, order: int = 12,
                      space_bound: int = 24, oracle: bool = True) -> TransformReport:
    """Formal local data of the Fourier-Laplace transform of ``G``.

    ``oracle=False`` skips the explicit-inverse cross-check of the microlocal
    ranks (the closed-form ranks are still compared).
    """
    germs = _singular_germs(G)
    checks: List[Check] = []
    trace = validate_residue_trace(G)
    checks.append(Check("residue_trace", trace.ok, trace.detail))

    decomposed = [(k, formal_decompose(germs[k])) for k in (ZERO_POINT, INF) if k in germs]
    col = _transform_formal(decomposed, terms)
    fts = dict(decomposed)

    # rank of the transform, three ways
    hat_inf_numerics = col.numerics(HAT_INF) if col.items else LocalNumerics.of([])
    rank_numeric = hat_inf_numerics.rank
    g0, ginf = germs.get(ZERO_POINT), germs.get(INF)
    micro = 0
    notes_inf: List[str] = []
    for key, chart in ((ZERO_POINT, "0"), (INF, "inf")):
        g = germs.get(key)
        if g is None:
            continue
        micro += _checked_microlocal_rank(g, chart, order, space_bound, notes_inf, oracle, fts[key])
        if chart == "0":
            micro += fts[key].swan

    inf_seeds = [t.summand for t in col.summands(HAT_INF) if t.provenance.startswith("legendre(inf")] \
        if col.items else []
    inf_part_rank = sum(s.rank for s in inf_seeds)
    nf_inf: Optional[NormalForm] = None
    if ginf is not None and ginf.pole_order >= 2:
        try:
            nf_inf = normal_form_solver(ginf, target=HAT_INF)
        except (UnsupportedGermShape, InconsistentRelations) as exc:
            notes_inf.append(f"normal-form solver not applicable: {exc}")
    reg_count = sum(t.summand.rank for t in col.summands(HAT_INF)
                    if t.provenance == "reg_sing_rule") if col.items else 0
    other = rank_numeric - reg_count - inf_part_rank
    solver_dim = nf_inf.dimension if nf_inf is not None else inf_part_rank
    rank_solver = reg_count + solver_dim + other
    agree = rank_numeric == micro == rank_solver
    checks.append(Check("rank_three_ways", agree,
                        f"numerics {rank_numeric}, microlocal {micro}, residue rule + solver {rank_solver}"))
    rank_hat = rank_numeric

    if nf_inf is not None and nf_inf.dimension:
        try:
            checks.append(_legendre_vs_solver(nf_inf, inf_seeds))
        except ConsistencyFailure as exc:
            checks.append(Check("legendre_vs_solver", False, str(exc)))
        nf_germ = ConnectionGerm(INF, nf_inf.coefficients, nf_inf.dimension, "ŵ")
        got = slopes(nf_germ)
        want = FormalType(tuple(inf_seeds)).slope_multiset()
        checks.append(Check("solver_slopes", got == want, f"solver {_ms(got)}, Legendre {_ms(want)}"))

    nf_zero: Optional[NormalForm] = None
    notes_zero: List[str] = []
    if ginf is not None and col.items and any(_same_location(l, HAT_ZERO) for l in col.locations()):
        try:
            cand = normal_form_solver(ginf, target=HAT_ZERO)
            if cand.dimension == rank_hat:
                nf_zero = cand
            else:
                notes_zero.append(f"0̂ normal form has {cand.dimension} generators, rank is {rank_hat}; not attached")
        except UnsupportedGermShape as exc:
            notes_zero.append(f"no 0̂ normal form: {exc}")

    points: List[SingularPoint] = []
    for loc in (col.locations() if col.items else []):
        ts = col.summands(loc)
        if not ts and rank_hat == 0:
            continue
        ft = FormalType(tuple(t.summand for t in ts))
        n = col.numerics(loc)
        if LocalNumerics.of_formal_type(ft) != n:
            checks.append(Check(f"numerics_vs_formal[{location_label(loc)}]", False,
                                f"formal {_ms(ft.slope_multiset())}, numerics {_ms(n.slope_multiset)}"))
        notes = notes_inf if loc == HAT_INF else (notes_zero if loc == HAT_ZERO else [])
        if rank_hat == 0:
            # generic rank zero: the transform is punctual, a sum of delta modules
            notes = list(notes) + ["rank-zero transform: punctual contribution"]
        elif n.rank > rank_hat:
            checks.append(Check(f"local_rank[{location_label(loc)}]", False,
                                f"microlocal rank {n.rank} exceeds {rank_hat}"))
        nf = nf_inf if loc == HAT_INF and nf_inf is not None and nf_inf.dimension else None
        if loc == HAT_ZERO:
            nf = nf_zero
        points.append(SingularPoint(loc, ft, n, tuple(t.provenance for t in ts), nf,
                                    max(rank_hat - n.rank, 0), tuple(notes)))

    checks.append(_soundness(points, fts.get(INF)))
    checks.append(_swan_bookkeeping(points, fts))
    report = TransformReport(G, rank_hat, points, checks)
    bad = [c for c in checks if not c.ok and c.name != "residue_trace"]
    if bad:
        err = ConsistencyFailure("; ".join(f"{c.name}: {c.details}" for c in bad))
        err.report = report
        raise err
    return report


def _ms(ms) -> str:
    return "{" + ", ".join(f"{s}x{r}" for s, r in ms) + "}"


def _soundness(points: Sequence[SingularPoint], ft_inf: Optional[FormalType]) -> Check:
    allowed = []
    if ft_inf is not None:
        allowed = [s.exponent.body.coefficient(-1) for s in ft_inf.summands
                   if s.slope == 1 and s.ramification == 1]
    stray = [p.label for p in points if not isinstance(p.location, str)
             and not any(_same_location(p.location, a) for a in allowed)]
    return Check("singular_set_soundness", not stray,
                 "finite points come from slope-one exponents" if not stray else f"unexplained points {stray}")


def _swan_bookkeeping(points: Sequence[SingularPoint], fts: Dict[object, FormalType]) -> Check:
    source = sum((_drop_trivial(ft).swan if k == ZERO_POINT else ft.swan) for k, ft in fts.items())
    slope_one = sum(s.rank for k, ft in fts.items() if k == INF for s in ft.summands if s.slope == 1)
    target = sum(p.numerics.swan for p in points)
    ok = target == source - slope_one
    return Check("swan_bookkeeping", ok, f"output Swan {target} = source Swan {source} - slope-one rank {slope_one}")


# ------------------------------------------------------------ double transform

def _rename(q: PuiseuxSeries, coord: str) -> PuiseuxSeries:
    body = q.body.rename(coord) if q.d == 1 else q.body
    return PuiseuxSeries(body, q.d, coord)


def _report_as_source(report: TransformReport) -> List[Tuple[object, FormalType]]:
    """Transformed formal data read as data on the source line (ŵ -> w, ẑ -> z)."""
    out = []
    for p in report.singular_points:
        if p.location == HAT_INF:
            key, coord = INF, "w"
        elif p.location == HAT_ZERO:
            key, coord = ZERO_POINT, "z"
        else:
            key, coord = p.location, "z"
        # residues of microlocal data are not comparable with source residues; forget them
        summands = tuple(FormalSummand(_rename(s.exponent, coord), s.rank, (None,) * s.rank)
                         for s in p.formal_type.summands)
        out.append((key, FormalType(summands)))
    return out


def _flip_invariants(s: FormalSummand, flip: bool):
    """Coefficient data invariant under the Galois action, optionally after ``x -> -x``."""
    q = s.exponent.polar_part()
    d = q.d
    return {k: reduce_roots((c ** d) * (-1 if flip and k % 2 else 1)) for k, c in q.body.coeffs.items()}


def _match_exponents(want: Sequence[FormalSummand], got: Sequence[FormalSummand]) -> List[str]:
    pool = list(got)
    problems = []
    for w in want:
        inv = _flip_invariants(w, True)
        hit = None
        for g in pool:
            if g.rank != w.rank or g.exponent.d != w.exponent.d:
                continue
            ginv = _flip_invariants(g, False)
            keys = set(inv) | set(ginv)
            if all(scalar_is_zero(inv.get(k, ZERO) - ginv.get(k, ZERO)) for k in keys):
                hit = g
                break
        if hit is None:
            problems.append(f"no summand matches q(-x) for {w.exponent}")
        else:
            pool.remove(hit)
    problems.extend(f"extra summand {g.exponent}" for g in pool)
    return problems


def double_transform_check(G: GlobalConnection, terms: int = DEFAULT_TERMS, **options) -> Check:
    """Transforming twice must return the source pulled back by ``x -> -x``."""
    try:
        first = fourier_transform(G, terms=terms, **options)
        second = _transform_formal(_report_as_source(first), terms)
    except Exception as exc:  # the check reports, it does not raise
        return Check("double_transform", False, f"{type(exc).__name__}: {exc}")
    germs = _singular_germs(G)
    problems: List[str] = []
    expected: List[Tuple[object, List[FormalSummand]]] = []
    if ZERO_POINT in germs:
        expected.append((HAT_ZERO, list(_drop_trivial(formal_decompose(germs[ZERO_POINT])).summands)))
    if INF in germs:
        expected.append((HAT_INF, list(formal_decompose(germs[INF]).summands)))
    got_locations = second.locations() if second.items else []
    for loc, want in expected:
        if not want:
            continue
        if not any(_same_location(loc, g) for g in got_locations):
            problems.append(f"{location_label(loc)} missing after two transforms")
            continue
        got = [t.summand for t in second.summands(loc)]
        want_ft, got_ft = FormalType(tuple(want)), FormalType(tuple(got))
        if want_ft.slope_multiset() != got_ft.slope_multiset():
            problems.append(f"slopes at {location_label(loc)}: {_ms(got_ft.slope_multiset())} "
                            f"!= {_ms(want_ft.slope_multiset())}")
        if want_ft.swan != got_ft.swan or want_ft.rank != got_ft.rank:
            problems.append(f"rank/Swan at {location_label(loc)} differ")
        problems.extend(_match_exponents(want, got))
    extra = [location_label(l) for l in got_locations
             if not any(_same_location(l, e) for e, w in expected if w)]
    if extra:
        problems.append(f"unexpected points {extra}")
    return Check("double_transform", not problems, "; ".join(problems) or
                 f"second transform returns the sign-flipped source at {[location_label(l) for l in got_locations]}")


# ------------------------------------------------------------ independence

def random_perturbation(seed: int) -> Callable[[GlobalConnection], GlobalConnection]:
    """Scalar residue shifts per block plus random holomorphic tails, keeping the residue traces balanced."""

    def apply(G: GlobalConnection) -> GlobalConnection:
        rng = random.Random(seed)

        def rnd():
            return Scalar.const(Fraction(rng.randint(-9, 9), rng.randint(1, 5)))

        shifts = []  # (point, block, lam)
        for key in (ZERO_POINT, INF):
            g = G.germ(key)
            if g is None:
                continue
            for idx in g.blocks():
                res = g.block(idx).residue()
                if key == ZERO_POINT and linalg.is_zero(res):
                    continue
                lam = rnd()
                while key == ZERO_POINT and any(scalar_is_zero(res[i][i] + lam) for i in range(len(idx))):
                    lam = rnd()
                shifts.append([key, idx, lam])
        inf_blocks = [s for s in shifts if s[0] == INF]
        if inf_blocks:
            last = inf_blocks[-1]
            balance = sum((s[2] * len(s[1]) for s in shifts if s[0] == ZERO_POINT), ZERO) - \
                sum((s[2] * len(s[1]) for s in inf_blocks[:-1]), ZERO)
            last[2] = balance / len(last[1])
        elif shifts:
            for s in shifts:
                s[2] = ZERO
        out = G
        for key in (ZERO_POINT, INF):
            g = G.germ(key)
            if g is None:
                continue
            n = g.rank
            coeffs = dict(g.coefficients)
            res = [list(r) for r in g.coefficient(-1)]
            for k2, idx, lam in shifts:
                if k2 == key:
                    for i in idx:
                        res[i][i] = res[i][i] + lam
            coeffs[-1] = res
            for k in (0, 1):
                tail = [[rnd() for _ in range(n)] for _ in range(n)]
                coeffs[k] = linalg.add(g.coefficient(k), linalg.mat(tail))
            out = out.replace(key, ConnectionGerm(g.point, coeffs, n, g.coord))
        return out

    return apply


def _irregular_signature(report: TransformReport):
    sig = []
    for p in report.singular_points:
        irregular = [s for s in p.formal_type.summands if not s.is_regular]
        sig.append((p.location, p.numerics, irregular, p.normal_form))
    return sig


def _nf_window_equal(a: Optional[NormalForm], b: Optional[NormalForm]) -> bool:
    if (a is None) != (b is None):
        return False
    if a is None:
        return True
    if a.dimension != b.dimension or a.pole_order != b.pole_order:
        return False
    zero = linalg.zeros(a.dimension)
    return all(linalg.equal(a.coefficients.get(k, zero), b.coefficients.get(k, zero)) for k in _reliable_orders(a))


def _same_exponent(x: FormalSummand, y: FormalSummand) -> bool:
    if x.rank != y.rank or x.exponent.d != y.exponent.d:
        return False
    a, b = _flip_invariants(x, False), _flip_invariants(y, False)
    return all(scalar_is_zero(a.get(k, ZERO) - b.get(k, ZERO)) for k in set(a) | set(b))


def irregular_independence_check(G: GlobalConnection, perturbation=None, seed: int = 0,
                                 terms: int = DEFAULT_TERMS, **options) -> Check:
    """Irregular data of the transform must not see residue shifts or holomorphic tails."""
    perturb = perturbation if callable(perturbation) else random_perturbation(seed)
    try:
        base = fourier_transform(G, terms=terms, **options)
        moved = fourier_transform(perturb(G), terms=terms, **options)
    except Exception as exc:
        return Check("irregular_independence", False, f"{type(exc).__name__}: {exc}")
    a, b = _irregular_signature(base), _irregular_signature(moved)
    problems = []
    if base.rank_hat != moved.rank_hat:
        problems.append(f"rank {base.rank_hat} -> {moved.rank_hat}")
    if len(a) != len(b):
        problems.append(f"{len(a)} points -> {len(b)} points")
    for loc, n, irr, nf in a:
        match = next((x for x in b if _same_location(x[0], loc)), None)
        if match is None:
            problems.append(f"{location_label(loc)} disappeared")
            continue
        _, n2, irr2, nf2 = match
        if n != n2:
            problems.append(f"numerics at {location_label(loc)} changed")
        if len(irr) != len(irr2) or any(not any(_same_exponent(x, y) for y in irr2) for x in irr):
            problems.append(f"irregular exponents at {location_label(loc)} changed")
        if not _nf_window_equal(nf, nf2):
            problems.append(f"leading matrix coefficients at {location_label(loc)} changed")
    return Check("irregular_independence", not problems, "; ".join(problems) or "irregular data unchanged")


__all__ = ["SingularPoint", "Check", "TransformReport", "fourier_transform", "double_transform_check",
           "irregular_independence_check", "random_perturbation"]
