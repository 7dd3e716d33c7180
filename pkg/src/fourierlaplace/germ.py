"""Connection germs and their formal invariants.

A germ at a point stores the Laurent coefficients ``A_k`` of the connection
``d + (sum_k A_k x^k) dx`` in the local coordinate ``x`` (``z - c`` at a finite
point, ``w = 1/z`` at infinity).  Horizontal sections satisfy ``d_x f = A f``,
so a rank-1 summand with matrix entry ``a(x)`` has exponent ``q = int a`` with
the residue term split off.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import (ConsistencyFailure, ConstraintViolation, DegeneratePolygon,
                     NonIntegralSwan, ParseError, UnsupportedGermShape)
from .scalar import ONE, ZERO, Scalar, as_scalar, fresh_root, parse_scalar, scalar_is_zero
from .series import LaurentSeries, PuiseuxSeries, series_invert

INF = "inf"
ZERO_POINT = "0"


def point_label(point) -> str:
    if point == INF:
        return "∞"
    return str(point)


def coordinate_of(point) -> str:
    return "w" if point == INF else "z"


# ------------------------------------------------------------------ germs

class ConnectionGerm:
    """Matrix connection germ ``d + sum_k A_k x^k dx`` at ``point``."""

    __slots__ = ("point", "coord", "rank", "coefficients")

    def __init__(self, point, coefficients: Dict[int, Sequence[Sequence]], rank: Optional[int] = None,
                 coord: Optional[str] = None):
        coeffs = {int(k): linalg.mat(m) for k, m in coefficients.items()}
        if rank is None:
            if not coeffs:
                raise ParseError("rank is required for a germ without coefficients")
            rank = len(next(iter(coeffs.values())))
        if rank < 1:
            raise ParseError(f"rank must be positive, got {rank}")
        for k, m in coeffs.items():
            if len(m) != rank or any(len(r) != rank for r in m):
                raise ParseError(f"coefficient A_{k} is not {rank}x{rank}")
        self.point = point if point in (INF, ZERO_POINT) else as_scalar(point)
        self.coord = coord or coordinate_of(point)
        self.rank = rank
        self.coefficients = {k: m for k, m in sorted(coeffs.items()) if not linalg.is_zero(m)}

    @property
    def pole_order(self) -> int:
        neg = [-k for k in self.coefficients if k < 0]
        return max(neg) if neg else 0

    def coefficient(self, k: int) -> linalg.Matrix:
        return self.coefficients.get(k, linalg.zeros(self.rank))

    def residue(self) -> linalg.Matrix:
        return self.coefficient(-1)

    def polar(self) -> "ConnectionGerm":
        return ConnectionGerm(self.point, {k: m for k, m in self.coefficients.items() if k < 0},
                              self.rank, self.coord)

    def irregular(self) -> "ConnectionGerm":
        """Terms of pole order at least two."""
        return ConnectionGerm(self.point, {k: m for k, m in self.coefficients.items() if k < -1},
                              self.rank, self.coord)

    def series_matrix(self, polar_only: bool = True):
        """Entries as exact Laurent series in the local coordinate."""
        n = self.rank
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                coeffs = {k: m[i][j] for k, m in self.coefficients.items() if k < 0 or not polar_only}
                row.append(LaurentSeries(self.coord, coeffs))
            out.append(tuple(row))
        return tuple(out)

    def block(self, idx: Sequence[int]) -> "ConnectionGerm":
        return ConnectionGerm(self.point, {k: linalg.submatrix(m, idx, idx) for k, m in self.coefficients.items()},
                              len(idx), self.coord)

    def blocks(self) -> List[Tuple[int, ...]]:
        """Index sets of the block-diagonal components of the polar part."""
        n = self.rank
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for k, m in self.coefficients.items():
            if k >= 0:
                continue
            for i in range(n):
                for j in range(n):
                    if not m[i][j].is_zero():
                        parent[find(i)] = find(j)
        groups: Dict[int, List[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        return sorted(tuple(g) for g in groups.values())

    def map_scalars(self, f) -> "ConnectionGerm":
        return ConnectionGerm(self.point, {k: tuple(tuple(f(x) for x in r) for r in m)
                                           for k, m in self.coefficients.items()}, self.rank, self.coord)

    def params(self) -> set:
        out = set()
        for m in self.coefficients.values():
            for r in m:
                for x in r:
                    out |= x.params()
        return out

    def to_dict(self) -> dict:
        return {
            "point": point_label(self.point) if self.point in (INF, ZERO_POINT) else str(self.point),
            "coordinate": self.coord,
            "rank": self.rank,
            "coefficients": [{"k": k, "matrix": linalg.to_strings(m)} for k, m in self.coefficients.items()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConnectionGerm":
        try:
            raw = d["point"]
            point = INF if raw in ("∞", "inf", "infinity") else (ZERO_POINT if str(raw) == "0" else parse_scalar(raw))
            rank = int(d["rank"])
            coeffs = {int(e["k"]): linalg.from_strings(e["matrix"], parse_scalar) for e in d.get("coefficients", [])}
        except KeyError as exc:
            raise ParseError(f"malformed germ description: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed germ description: {exc}") from exc
        return cls(point, coeffs, rank, d.get("coordinate"))

    def __str__(self):
        x = self.coord
        parts = [f"{linalg.fmt(m)}*{x}^{k}" for k, m in self.coefficients.items()]
        return f"germ at {point_label(self.point)} (rank {self.rank}): " + (" + ".join(parts) or "0")

    __repr__ = __str__


# --------------------------------------------------------- Newton polygon

@dataclass(frozen=True)
class Segment:
    start: Tuple[int, int]
    end: Tuple[int, int]

    @property
    def length(self) -> int:
        return self.end[0] - self.start[0]

    @property
    def slope(self) -> Fraction:
        """Pole order of the eigenvalues attached to this edge."""
        return Fraction(self.end[1] - self.start[1], self.length)

    @property
    def system_slope(self) -> Fraction:
        return max(self.slope - 1, Fraction(0))


@dataclass(frozen=True)
class NewtonPolygon:
    points: Tuple[Tuple[int, int], ...]
    segments: Tuple[Segment, ...]
    zero_multiplicity: int = 0
    coefficients: Tuple = field(default=(), compare=False, repr=False)

    @property
    def rank(self) -> int:
        return self.zero_multiplicity + sum(s.length for s in self.segments)

    def slope_multiset(self) -> List[Tuple[Fraction, int]]:
        out: Dict[Fraction, int] = {}
        if self.zero_multiplicity:
            out[Fraction(0)] = self.zero_multiplicity
        for s in self.segments:
            out[s.system_slope] = out.get(s.system_slope, 0) + s.length
        return sorted(out.items())

    def __str__(self):
        segs = ", ".join(f"[{s.start}->{s.end} slope {s.slope}]" for s in self.segments)
        return f"points {list(self.points)}; hull {segs}; zero eigenvalues {self.zero_multiplicity}"


def char_poly(m) -> List[LaurentSeries]:
    """Coefficients ``c_0..c_n`` of ``det(tau I - m)`` by Faddeev-LeVerrier."""
    n = len(m)
    coord = m[0][0].coord
    zero = LaurentSeries(coord)
    one = LaurentSeries.constant(coord, ONE)
    ident = linalg.identity(n, one, zero)
    c = [zero] * (n + 1)
    c[n] = one
    mk = linalg.zeros(n, n, zero)
    for k in range(1, n + 1):
        mk = linalg.add(linalg.mul(m, mk, zero), linalg.scale(ident, c[n - k + 1]))
        am = linalg.mul(m, mk, zero)
        tr = zero
        for i in range(n):
            tr = tr + am[i][i]
        c[n - k] = tr * Scalar.const(Fraction(-1, k))
    return c


def _lower_hull(points):
    hull = []
    for p in sorted(points):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or above the chord
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _polygon_from_coeffs(coeffs: List[LaurentSeries]) -> NewtonPolygon:
    pts = tuple((j, c.valuation) for j, c in enumerate(coeffs) if c.coeffs)
    zero_mult = pts[0][0] if pts else len(coeffs) - 1
    hull = _lower_hull(pts)
    segs = tuple(Segment(hull[i], hull[i + 1]) for i in range(len(hull) - 1))
    return NewtonPolygon(pts, segs, zero_mult, tuple(coeffs))


def char_newton_polygon(g: ConnectionGerm) -> NewtonPolygon:
    if g.pole_order < 1:
        raise UnsupportedGermShape(f"germ at {point_label(g.point)} is not singular")
    return _polygon_from_coeffs(char_poly(g.series_matrix()))


def slopes(g: ConnectionGerm, normalize: bool = False) -> List[Tuple[Fraction, int]]:
    """Slope multiset; ``normalize`` first removes a scalar twist (see :func:`normalize_leading`)."""
    if normalize:
        g = normalize_leading(g)
    return char_newton_polygon(g).slope_multiset()


def normalize_leading(g: ConnectionGerm) -> ConnectionGerm:
    """Twist away ``lam`` when some block of rank > 1 has leading term ``lam I + nilpotent``.

    This is tensoring with a rank-one germ of exponent ``lam x^(1-r)/(r-1)``,
    so the leading term of that block becomes nilpotent.
    """
    if g.pole_order < 2:
        return g
    for idx in g.blocks():
        lam = _leading_twist(g.block(idx))
        if lam is not None:
            r = g.pole_order
            if g.block(idx).pole_order != r:
                continue
            coeffs = dict(g.coefficients)
            coeffs[-r] = linalg.sub(coeffs[-r], linalg.scale(linalg.identity(g.rank), lam))
            return ConnectionGerm(g.point, coeffs, g.rank, g.coord)
    return g


def swan_of(multiset) -> int:
    s = sum((sl * r for sl, r in multiset), Fraction(0))
    if s.denominator != 1 or s < 0:
        raise NonIntegralSwan(f"Swan conductor {s} is not a nonnegative integer")
    return int(s)


def swan(g: ConnectionGerm) -> int:
    return swan_of(slopes(g))


def katz(g: ConnectionGerm) -> Fraction:
    return max(s for s, _ in slopes(g))


# ----------------------------------------------------------- formal type

@dataclass(frozen=True)
class FormalSummand:
    exponent: PuiseuxSeries
    rank: int = 1
    residues: Tuple[Optional[Scalar], ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("summand rank must be positive")

    @property
    def ramification(self) -> int:
        return self.exponent.d

    @property
    def slope(self) -> Fraction:
        return self.exponent.slope()

    @property
    def is_regular(self) -> bool:
        return not self.exponent.polar_part().body.coeffs

    def residues_known(self) -> bool:
        return bool(self.residues) and all(r is not None for r in self.residues)

    def to_dict(self) -> dict:
        return {
            "exponent": str(self.exponent.polar_part().body) if self.exponent.d > 1 else str(self.exponent.polar_part()),
            "ramification": self.ramification,
            "relation": self.exponent.relation(),
            "slope": str(self.slope),
            "rank": self.rank,
            "residues": ["unknown" if r is None else str(r) for r in self.residues] or ["unknown"] * self.rank,
        }

    def __str__(self):
        res = ", ".join("?" if r is None else str(r) for r in self.residues) or "?"
        return f"q = {self.exponent}, rank {self.rank}, slope {self.slope}, residues [{res}]"


@dataclass(frozen=True)
class FormalType:
    summands: Tuple[FormalSummand, ...]

    @property
    def rank(self) -> int:
        return sum(s.rank for s in self.summands)

    def slope_multiset(self) -> List[Tuple[Fraction, int]]:
        out: Dict[Fraction, int] = {}
        for s in self.summands:
            out[s.slope] = out.get(s.slope, 0) + s.rank
        return sorted(out.items())

    @property
    def swan(self) -> int:
        return swan_of(self.slope_multiset())

    @property
    def katz(self) -> Fraction:
        return max((s.slope for s in self.summands), default=Fraction(0))

    def pure_parts(self) -> Dict[Fraction, "FormalType"]:
        out: Dict[Fraction, list] = {}
        for s in self.summands:
            out.setdefault(s.slope, []).append(s)
        return {k: FormalType(tuple(v)) for k, v in sorted(out.items())}

    def to_list(self) -> list:
        return [s.to_dict() for s in self.summands]

    def __str__(self):
        return "; ".join(str(s) for s in self.summands) or "(empty)"


def _scalar_exponent(entry: LaurentSeries, coord: str) -> Tuple[PuiseuxSeries, Scalar]:
    residue = entry.coeffs.get(-1, ZERO)
    rest = LaurentSeries(coord, {k: v for k, v in entry.coeffs.items() if k < -1})
    return PuiseuxSeries.from_laurent(rest.integrate()), residue


def _leading_twist(g: ConnectionGerm) -> Optional[Scalar]:
    """``lam`` when the leading matrix is ``lam I + nilpotent`` with ``lam != 0``."""
    r = g.pole_order
    if r < 2 or g.rank < 2:
        return None
    lead = g.coefficient(-r)
    lam = lead[0][0]
    if lam.is_zero() or any(not scalar_is_zero(lead[i][i] - lam) for i in range(g.rank)):
        return None
    if not linalg.is_nilpotent(linalg.sub(lead, linalg.scale(linalg.identity(g.rank), lam))):
        return None
    return lam


def _block_residues(g: ConnectionGerm) -> Tuple[Optional[Scalar], ...]:
    if g.pole_order <= 1 and linalg.is_triangular(g.residue()):
        return tuple(g.residue()[i][i] for i in range(g.rank))
    return (None,) * g.rank


def _edge_root(seg: Segment, coeffs) -> Scalar:
    j1, j2 = seg.start[0], seg.end[0]
    lo = coeffs[j1].coeffs[seg.start[1]]
    hi = coeffs[j2].coeffs[seg.end[1]]
    return -lo / hi


def _eigen_branch(coeffs: List[LaurentSeries], seg: Segment, coord: str) -> PuiseuxSeries:
    """Puiseux eigenvalue on the edge ``seg`` (one representative of the conjugates)."""
    rho = seg.slope
    d, nu = rho.denominator, rho.numerator
    kappa = fresh_root(_edge_root(seg, coeffs), d)
    cu = [c.ramify(d, "u") for c in coeffs]
    target = 1  # exponents of u below this are needed
    terms = nu + target + 4
    tau = LaurentSeries.monomial("u", -nu, kappa, prec=target)

    def evaluate(t):
        val = LaurentSeries("u")
        der = LaurentSeries("u")
        power = LaurentSeries.constant("u", ONE)
        for j, c in enumerate(cu):
            val = val + c * power
            if j + 1 < len(cu):
                der = der + cu[j + 1] * power * (j + 1)
            power = power * t
        return val, der

    for _ in range(terms.bit_length() + 3):
        val, der = evaluate(tau)
        step = val * series_invert(der, terms)
        tau = (tau - step).truncate(target)
    val, der = evaluate(tau)
    if der.coeffs and val.coeffs and val.valuation < target + der.valuation:
        raise ConsistencyFailure("eigenvalue branch did not converge")
    return PuiseuxSeries(tau, d, coord)


def formal_decompose(g: ConnectionGerm) -> FormalType:
    """Formal decomposition into exponential summands for the supported germ shapes."""
    if g.pole_order < 1:
        raise UnsupportedGermShape(f"germ at {point_label(g.point)} is not singular")
    summands: List[FormalSummand] = []
    for idx in g.blocks():
        summands.extend(_decompose_block(g.block(idx)))
    ft = FormalType(tuple(summands))
    if ft.rank != g.rank:
        raise ConsistencyFailure(f"summand ranks add up to {ft.rank}, germ rank is {g.rank}")
    return ft


def _decompose_block(b: ConnectionGerm) -> List[FormalSummand]:
    coord = b.coord
    if b.rank == 1:
        entry = b.series_matrix()[0][0]
        q, res = _scalar_exponent(entry, coord)
        return [FormalSummand(q, 1, (res,))]
    if b.pole_order <= 1:
        return [FormalSummand(PuiseuxSeries.from_laurent(LaurentSeries(coord)), b.rank, _block_residues(b))]
    lam = _leading_twist(b)
    if lam is not None:
        r = b.pole_order
        shifted = dict(b.coefficients)
        shifted[-r] = linalg.sub(shifted[-r], linalg.scale(linalg.identity(b.rank), lam))
        inner = _decompose_block(ConnectionGerm(b.point, shifted, b.rank, coord))
        extra, _ = _scalar_exponent(LaurentSeries.monomial(coord, -r, lam), coord)
        return [FormalSummand(s.exponent + extra, s.rank, s.residues) for s in inner]
    poly = char_newton_polygon(b)
    coeffs = list(poly.coefficients)
    out: List[FormalSummand] = []
    regular_rank = poly.zero_multiplicity
    for seg in poly.segments:
        if seg.slope <= 1:
            regular_rank += seg.length
            continue
        d = seg.slope.denominator
        if seg.length != d:
            m = seg.length // d
            if m == 2:
                mid = coeffs[seg.start[0] + d].coeffs.get(seg.start[1] + int(d * seg.slope), ZERO)
                lo = coeffs[seg.start[0]].coeffs[seg.start[1]]
                hi = coeffs[seg.end[0]].coeffs[seg.end[1]]
                if scalar_is_zero(mid * mid - lo * hi * 4):
                    raise DegeneratePolygon("edge polynomial has a repeated root", poly)
            raise UnsupportedGermShape(f"edge of slope {seg.slope} and length {seg.length} "
                                       "does not split into a single Galois orbit", poly)
        tau = _eigen_branch(coeffs, seg, coord)
        body = LaurentSeries(tau.body.coord, {k: v for k, v in tau.body.coeffs.items() if k < -tau.d})
        q = PuiseuxSeries(body, tau.d, coord).integrate()
        residues: Tuple[Optional[Scalar], ...] = (None,) * d
        if d == 1:
            residues = (tau.body.coeffs.get(-1, ZERO),)
        out.append(FormalSummand(q, d, residues))
    if regular_rank:
        res = _block_residues(b) if regular_rank == b.rank else (None,) * regular_rank
        out.append(FormalSummand(PuiseuxSeries.from_laurent(LaurentSeries(coord)), regular_rank, res))
    return out


# --------------------------------------------------------- global data

class GlobalConnection:
    """Connection on the projective line given by its singular germs."""

    def __init__(self, germs: Sequence[ConnectionGerm], name: str = "", assumptions: Sequence[str] = ()):
        if not germs:
            raise ParseError("a global connection needs at least one singular germ")
        ranks = {g.rank for g in germs}
        if len(ranks) != 1:
            raise ParseError(f"germs disagree on rank: {sorted(ranks)}")
        self.germs: Dict[object, ConnectionGerm] = {}
        for g in germs:
            key = g.point if g.point in (INF, ZERO_POINT) else str(g.point)
            if key in self.germs:
                raise ParseError(f"two germs at {point_label(g.point)}")
            self.germs[key] = g
        self.rank = ranks.pop()
        self.name = name
        self.assumptions = tuple(assumptions)

    def germ(self, point) -> Optional[ConnectionGerm]:
        return self.germs.get(point)

    def points(self):
        return list(self.germs)

    def map_scalars(self, f) -> "GlobalConnection":
        return GlobalConnection([g.map_scalars(f) for g in self.germs.values()], self.name, self.assumptions)

    def replace(self, point, germ: ConnectionGerm) -> "GlobalConnection":
        germs = [germ if k == point else g for k, g in self.germs.items()]
        return GlobalConnection(germs, self.name, self.assumptions)

    def to_dict(self) -> dict:
        return {"name": self.name, "rank": self.rank, "assumptions": list(self.assumptions),
                "germs": [g.to_dict() for g in self.germs.values()]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "GlobalConnection":
        if not isinstance(d, dict) or "germs" not in d:
            raise ParseError("connection description must contain a list of germs")
        germs = [ConnectionGerm.from_dict(g) for g in d["germs"]]
        out = cls(germs, d.get("name", ""), d.get("assumptions", ()))
        if "rank" in d and int(d["rank"]) != out.rank:
            raise ParseError(f"declared rank {d['rank']} differs from matrix size {out.rank}")
        return out

    @classmethod
    def loads(cls, text: str) -> "GlobalConnection":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid connection document: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class ResidueCheck:
    ok: bool
    identity: Optional[Scalar] = None
    detail: str = ""


def _trace(m) -> Scalar:
    return sum((m[i][i] for i in range(len(m))), ZERO)


def validate_residue_trace(G: GlobalConnection) -> ResidueCheck:
    """Trace of the finite log residues must equal the trace of the ``w^-1`` term at infinity."""
    finite = sum((_trace(g.residue()) for k, g in G.germs.items() if k != INF), ZERO)
    at_inf = G.germ(INF)
    inf_trace = _trace(at_inf.residue()) if at_inf is not None else ZERO
    diff = finite - inf_trace
    if scalar_is_zero(diff):
        return ResidueCheck(True, diff, "residue traces balance")
    return ResidueCheck(False, diff, f"trace identity fails: {diff} != 0")


def twist(g: ConnectionGerm, log_residue=None, exponent: Optional[LaurentSeries] = None,
          shift: Optional[int] = None) -> ConnectionGerm:
    """Tensor with a rank-1 germ: ``d + lam dx/x``, ``d + dq0``, or an integer residue shift."""
    coeffs = dict(g.coefficients)
    ident = linalg.identity(g.rank)

    def bump(k, c):
        coeffs[k] = linalg.add(coeffs.get(k, linalg.zeros(g.rank)), linalg.scale(ident, c))

    if log_residue is not None:
        bump(-1, as_scalar(log_residue))
    if shift is not None:
        bump(-1, Scalar.const(shift))
    if exponent is not None:
        for k, c in exponent.derive().coeffs.items():
            bump(k, c)
    return ConnectionGerm(g.point, coeffs, g.rank, g.coord)


def twist_summands(ft: FormalType, shift) -> FormalType:
    """Shift every known residue exponent by ``shift``."""
    s = as_scalar(shift)
    return FormalType(tuple(FormalSummand(x.exponent, x.rank,
                                          tuple(None if r is None else r + s for r in x.residues))
                            for x in ft.summands))


def require(condition_zero: Scalar, message: str):
    """Raise :class:`ConstraintViolation` when ``condition_zero`` is provably zero."""
    if scalar_is_zero(as_scalar(condition_zero)):
        raise ConstraintViolation(message)
