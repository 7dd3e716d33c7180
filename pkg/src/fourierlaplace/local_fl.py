"""Local Fourier-Laplace rules.

Locations are ``"inf^"`` (the point at infinity of the dual line, coordinate
``ŵ = 1/ẑ``), ``"0^"`` (coordinate ``ẑ``) or a Scalar ``c`` (coordinate
``ẑ - c``, printed as ``ẑ``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import (ConsistencyFailure, InconsistentRelations, NonIntegralSwan,
                     NonSemisimpleResidue, SeedMismatch, SlopeOutOfDomain,
                     UnsupportedGermShape, ZeroLeadingCoefficient)
from .germ import (INF, ConnectionGerm, FormalSummand, FormalType, _polygon_from_coeffs,
                   char_poly, formal_decompose, swan_of)
from .micro import MicroOperator, membership_diagnostic, micro_invert
from .scalar import ONE, ZERO, Scalar, as_scalar, fresh_root, reduce_roots, scalar_is_zero
from .series import (DEFAULT_TERMS, LaurentSeries, PuiseuxSeries, puiseux_root,
                     series_compose, series_derive, series_invert, series_reversion)

HAT_INF = "inf^"
HAT_ZERO = "0^"

DIRECTIONS = ("0->inf^", "inf->0^", "inf->inf^")


def location_label(loc) -> str:
    return {HAT_INF: "∞̂", HAT_ZERO: "0̂"}.get(loc, str(loc)) if isinstance(loc, str) else str(loc)


def target_coordinate(loc) -> str:
    return "ŵ" if loc == HAT_INF else "ẑ"


# -------------------------------------------------------------- numerics

@dataclass(frozen=True)
class LocalNumerics:
    rank: int
    swan: int
    slope_multiset: Tuple[Tuple[Fraction, int], ...]

    def __post_init__(self):
        if sum(r for _, r in self.slope_multiset) != self.rank:
            raise ConsistencyFailure(f"slope multiset {self.slope_multiset} does not add up to rank {self.rank}")
        if swan_of(self.slope_multiset) != self.swan:
            raise NonIntegralSwan(f"Swan {self.swan} differs from the slope multiset")

    @classmethod
    def of(cls, multiset) -> "LocalNumerics":
        merged: Dict[Fraction, int] = {}
        for s, r in multiset:
            if r:
                merged[Fraction(s)] = merged.get(Fraction(s), 0) + r
        ms = tuple(sorted(merged.items()))
        return cls(sum(r for _, r in ms), swan_of(ms), ms)

    @classmethod
    def of_formal_type(cls, ft: FormalType) -> "LocalNumerics":
        return cls.of(ft.slope_multiset())

    def to_dict(self) -> dict:
        return {"rank": self.rank, "swan": self.swan,
                "slopes": [[str(s), r] for s, r in self.slope_multiset]}


def _in_domain(direction, s: Fraction) -> bool:
    if direction == "0->inf^":
        return True
    if direction == "inf->0^":
        return s < 1
    return s > 1


def numeric_local_fl(direction: str, n: LocalNumerics) -> LocalNumerics:
    """Rank, Swan and slopes of a local transform of a pure-part decomposed module.

    Parts outside the direction's domain transform to zero; a module mixing
    parts inside and outside the domain must be split first.
    """
    if direction not in DIRECTIONS:
        raise SlopeOutOfDomain(f"unknown direction {direction!r}")
    if any(s < 0 for s, _ in n.slope_multiset):
        raise SlopeOutOfDomain("negative slope")
    inside = [(s, r) for s, r in n.slope_multiset if _in_domain(direction, s)]
    if inside and len(inside) != len(n.slope_multiset):
        raise SlopeOutOfDomain(f"{direction} needs a pure input; split {n.slope_multiset} first")
    out = []
    for s, r in inside:
        if direction == "0->inf^":
            new_rank, new_slope = r * (1 + s), s / (1 + s)
        elif direction == "inf->0^":
            new_rank, new_slope = r * (1 - s), s / (1 - s)
        else:
            new_rank, new_slope = r * (s - 1), s / (s - 1)
        if new_rank.denominator != 1:
            raise NonIntegralSwan(f"part ({s}, {r}) has non-integral Swan")
        out.append((new_slope, int(new_rank)))
    res = LocalNumerics.of(out)
    if res.swan != sum((s * r for s, r in inside), Fraction(0)):
        raise ConsistencyFailure("Swan not preserved")
    return res


# ------------------------------------------------------------- Legendre

def _source_z(q: PuiseuxSeries, source) -> LaurentSeries:
    d = q.d
    return LaurentSeries.monomial(q.body.coord, -d if source == INF else d)


def legendre_exponent(q: PuiseuxSeries, direction: str, source=INF, terms: int = DEFAULT_TERMS):
    """Stationary-phase transform of an exponent.

    Returns ``(location, qhat)`` where ``qhat`` is a Puiseux series in the
    target coordinate with no constant term.  ``direction`` is ``"inf->inf^"``,
    ``"inf->0^"``, ``"inf->finite"`` or ``"0->inf^"``.
    """
    q = PuiseuxSeries(q.polar_part().body, q.d, q.base)
    if not q.body.coeffs:
        raise SlopeOutOfDomain("a regular exponent has no stationary point")
    s = q.slope()
    ok = {"inf->inf^": s > 1, "inf->0^": s < 1, "inf->finite": s == 1, "0->inf^": source != INF}
    if direction not in ok or not ok[direction]:
        raise SlopeOutOfDomain(f"slope {s} is outside the domain of {direction}")
    body = q.body.rename("u")
    d = q.d
    z = _source_z(q, source).rename("u")
    zhat = series_derive(body) * series_invert(series_derive(z), terms)
    location = HAT_INF
    if direction == "inf->finite":
        location = zhat.coeffs.get(0, ZERO)
        local = zhat - location
        if not local.coeffs and local.prec is None:
            return location, PuiseuxSeries(LaurentSeries("ẑ"), 1, "ẑ")
        target = local
    elif direction == "inf->0^":
        location = HAT_ZERO
        target = zhat
    else:
        target = series_invert(zhat, terms)
    m = target.valuation
    if m is None or m <= 0:
        raise SlopeOutOfDomain(f"target coordinate has valuation {m}")
    for extra in (0, terms, 3 * terms):
        qhat = _legendre_core(body, z, zhat, target, m, terms + extra, direction, location)
        if qhat.prec is not None and qhat.prec > 0:
            break
    else:
        raise ConsistencyFailure("Legendre transform did not reach the constant term")
    base = target_coordinate(location)
    polar = LaurentSeries("v", {k: c for k, c in qhat.coeffs.items() if k < 0})
    return location, PuiseuxSeries(polar, m, base)


def _legendre_core(body, z, zhat, target, m, terms, direction, location):
    # v = target^(1/m) as a series in u, then u = R(v)
    root = puiseux_root(target, m, terms)
    v_of_u = root.body if root.d == 1 else None
    if v_of_u is None:
        raise ConsistencyFailure("unexpected ramification in the Legendre substitution")
    v_of_u = v_of_u.rename("u")
    r = series_reversion(v_of_u, terms).rename("v")
    q_v = series_compose(body, r, terms)
    z_v = series_compose(z, r, terms)
    if location == HAT_INF:
        zhat_v = LaurentSeries.monomial("v", -m)
    elif location == HAT_ZERO:
        zhat_v = LaurentSeries.monomial("v", m)
    else:
        zhat_v = LaurentSeries.monomial("v", m) + location
    return q_v - z_v * zhat_v


# ------------------------------------------------------- closed-form rules

@dataclass(frozen=True)
class TransformedSummand:
    location: object
    summand: FormalSummand
    provenance: str

    def to_dict(self) -> dict:
        out = {"location": location_label(self.location), "provenance": self.provenance}
        out.update(self.summand.to_dict())
        return out


def _regular(coord: str, rank: int = 1, residues=()) -> FormalSummand:
    return FormalSummand(PuiseuxSeries.from_laurent(LaurentSeries(coord)), rank, tuple(residues))


def semisimple_eigenvalues(m: linalg.Matrix) -> List[Scalar]:
    """Eigenvalues of a triangular residue matrix that is provably semisimple."""
    n = len(m)
    if not linalg.is_triangular(m):
        raise NonSemisimpleResidue(f"residue {linalg.fmt(m)} is not triangular")
    eig = [m[i][i] for i in range(n)]
    offdiag = any(not m[i][j].is_zero() for i in range(n) for j in range(n) if i != j)
    if offdiag:
        for i in range(n):
            for j in range(i + 1, n):
                if scalar_is_zero(eig[i] - eig[j]):
                    raise NonSemisimpleResidue(f"residue {linalg.fmt(m)} may have a Jordan block")
    return eig


def reg_sing_rule(eigenvalues: Sequence) -> List[TransformedSummand]:
    """Regular point at 0 with semisimple residue: nonzero eigenvalues ``lam`` give residue ``lam + 1`` at ∞̂."""
    out = []
    for lam in eigenvalues:
        lam = as_scalar(lam)
        if scalar_is_zero(lam):
            continue
        out.append(TransformedSummand(HAT_INF, _regular("ŵ", 1, (lam + 1,)), "reg_sing_rule"))
    return out


def slope_one_rule(a, c) -> TransformedSummand:
    """``d_w q = (a w^-2 + c w^-1) q`` gives a regular rank-1 point at ``-a`` with residue ``c - 1``."""
    a, c = as_scalar(a), as_scalar(c)
    if scalar_is_zero(a):
        raise ZeroLeadingCoefficient("slope-one rule needs a nonzero w^-2 coefficient")
    return TransformedSummand(-a, _regular("ẑ", 1, (c - 1,)), "slope_one_rule")


# ------------------------------------------------------- microlocal rank

def _nontrivial_at_zero(s: FormalSummand) -> int:
    if not s.is_regular:
        return s.rank
    if s.residues and len(s.residues) == s.rank:
        return sum(0 if (r is not None and scalar_is_zero(r)) else 1 for r in s.residues)
    return s.rank


def _einf_entry(entry: LaurentSeries, order, space_bound) -> MicroOperator:
    out = MicroOperator("Einf", {}, order=order, space_bound=space_bound)
    for k, c in entry.coeffs.items():
        out = out + MicroOperator.space_var("Einf", k, order=order, space_bound=space_bound) * c
    return out


def scalar_operator(g: ConnectionGerm, order: int = 12, space_bound: int = 24,
                    irregular_only: bool = True) -> Optional[MicroOperator]:
    """Single operator annihilating the first generator of a Hessenberg block, or None.

    Rows ``0..n-2`` must express ``q_{i+1}`` through a monomial superdiagonal
    entry and ``q_0..q_i``.
    """
    src = g.irregular() if irregular_only else g.polar()
    a = src.series_matrix()
    n = g.rank
    chart = "Einf" if g.point == INF else "E0"
    if chart != "Einf":
        return None
    kw = dict(order=order, space_bound=space_bound)
    dd = MicroOperator.deriv("Einf", **kw)
    ops = [MicroOperator("Einf", {(0, 0): ONE}, **kw)]
    for i in range(n - 1):
        if any(a[i][j].coeffs for j in range(i + 2, n)):
            return None
        sup = a[i][i + 1]
        if len(sup.coeffs) != 1:
            return None
        (k, c), = sup.coeffs.items()
        inv = MicroOperator.space_var("Einf", -k, **kw) * (ONE / c)
        acc = dd * ops[i]
        for j in range(i + 1):
            acc = acc - _einf_entry(a[i][j], order, space_bound) * ops[j]
        ops.append(inv * acc)
    last = dd * ops[n - 1]
    for j in range(n):
        last = last - _einf_entry(a[n - 1][j], order, space_bound) * ops[j]
    return last


def microlocal_rank(g: ConnectionGerm, chart: str = None, check: bool = True, order: int = 12,
                    space_bound: int = 24, ft: Optional[FormalType] = None) -> int:
    """Rank of the microlocalized germ, cross-checked against explicit inverses."""
    chart = chart or ("inf" if g.point == INF else "0")
    ft = ft or formal_decompose(g)
    if chart == "0":
        total = sum(_nontrivial_at_zero(s) for s in ft.summands)
        if check:
            _check_zero_chart(g, order, space_bound)
        return total
    total = 0
    for s, part in ft.pure_parts().items():
        if s > 1:
            total += max(part.swan - part.rank, 0)
    if check:
        _check_inf_chart(g, order, space_bound)
    return total


def _check_zero_chart(g: ConnectionGerm, order: int, space_bound: int):
    for idx in g.blocks():
        b = g.block(idx)
        if b.rank != 1 or b.pole_order > 1:
            continue
        lam = b.residue()[0][0]
        kw = dict(order=order, space_bound=space_bound)
        op = MicroOperator.deriv("E0", **kw) - MicroOperator.space_var("E0", -1, **kw) * lam
        membership_diagnostic(micro_invert(op), "E0", expected=scalar_is_zero(lam))


def _check_inf_chart(g: ConnectionGerm, order: int, space_bound: int):
    for idx in g.blocks():
        b = g.block(idx)
        if b.pole_order < 2:
            continue
        ft = formal_decompose(b)
        contributes = any(s.slope > 1 for s in ft.summands)
        op = scalar_operator(b, order, space_bound)
        if op is None or not op.terms:
            continue
        membership_diagnostic(micro_invert(op), "Einf", expected=not contributes)


# ------------------------------------------------------- normal forms

@dataclass
class NormalForm:
    """``d_x q = B(x) q`` at a dual point, ``B`` stored as ``{k: matrix}`` of ``x^k`` coefficients."""
    location: object
    coordinate: str
    generators: Tuple[int, ...]
    coefficients: Dict[int, linalg.Matrix] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.generators)

    @property
    def pole_order(self) -> int:
        neg = [-k for k, m in self.coefficients.items() if k < 0 and not linalg.is_zero(m)]
        return max(neg) if neg else 0

    def matrix_series(self):
        n = self.dimension
        return tuple(tuple(LaurentSeries(self.coordinate, {k: m[i][j] for k, m in self.coefficients.items()})
                           for j in range(n)) for i in range(n))

    def to_dict(self) -> dict:
        return {"location": location_label(self.location), "coordinate": self.coordinate,
                "generators": [f"q{i + 1}" for i in self.generators],
                "coefficients": [{"k": k, "matrix": linalg.to_strings(m)}
                                 for k, m in sorted(self.coefficients.items())]}

    def __str__(self):
        parts = [f"{linalg.fmt(m)}*{self.coordinate}^{k}" for k, m in sorted(self.coefficients.items())]
        return " + ".join(parts) or "0"


def _series_matrix_to_coeffs(rows) -> Dict[int, linalg.Matrix]:
    n = len(rows)
    keys = sorted({k for r in rows for e in r for k in e.coeffs})
    out = {}
    for k in keys:
        m = tuple(tuple(rows[i][j].coeffs.get(k, ZERO) for j in range(n)) for i in range(n))
        if not linalg.is_zero(m):
            out[k] = m
    return out


def normal_form_solver(g: ConnectionGerm, seeds: Sequence[FormalSummand] = (), target: str = HAT_INF,
                       expected_dim: Optional[int] = None) -> NormalForm:
    """Transformed connection matrix at ∞̂ (pole order 3 germs) or 0̂ (nilpotent order-2 blocks)."""
    if g.point != INF:
        raise UnsupportedGermShape("the normal-form solver works on germs at infinity")
    nf = _solve_inf_hat(g) if target == HAT_INF else _solve_zero_hat(g)
    if expected_dim is not None and nf.dimension != expected_dim:
        raise InconsistentRelations(f"solver produced {nf.dimension} generators, expected {expected_dim}")
    if seeds:
        check_seeds(nf, seeds)
    return nf


def _solve_inf_hat(g: ConnectionGerm) -> NormalForm:
    n = g.rank
    if g.pole_order > 3:
        raise UnsupportedGermShape("pole order above three is outside the solver's class")
    lead = g.coefficient(-3)
    sub = g.coefficient(-2)
    what_inv = LaurentSeries.monomial("ŵ", -1)
    # S D q + T q = 0 with D = ŵ^2 d_ŵ, after z -> -d_ẑ, d_z -> ẑ and ẑ = 1/ŵ
    S = [list(r) for r in lead]
    T = [[LaurentSeries.constant("ŵ", sub[i][j]) + (what_inv if i == j else LaurentSeries("ŵ"))
          for j in range(n)] for i in range(n)]
    alive_rows = list(range(n))
    alive_cols = list(range(n))
    changed = True
    while changed:
        changed = False
        for r in list(alive_rows):
            if any(not S[r][c].is_zero() for c in alive_cols):
                continue
            nz = [c for c in alive_cols if T[r][c].coeffs]
            if not nz:
                alive_rows.remove(r)
                changed = True
                continue
            cand = [c for c in nz if all(S[i][c].is_zero() for i in alive_rows)
                    and (len(nz) == 1 or (len(T[r][c].coeffs) == 1 and T[r][c].prec is None))]
            if not cand:
                raise InconsistentRelations(f"relation {r} is not linear over monomials in ŵ")
            j = cand[0]
            if len(nz) == 1:
                factor = {}
            else:
                (k, c), = T[r][j].coeffs.items()
                inv = LaurentSeries.monomial("ŵ", -k, -ONE / c)
                factor = {c2: T[r][c2] * inv for c2 in nz if c2 != j}
            # q_j = sum factor[c2] q_c2
            for i in alive_rows:
                if i == r or not T[i][j].coeffs:
                    continue
                for c2, f in factor.items():
                    T[i][c2] = T[i][c2] + T[i][j] * f
                T[i][j] = LaurentSeries("ŵ")
            alive_rows.remove(r)
            alive_cols.remove(j)
            changed = True
            break
    if len(alive_rows) != len(alive_cols):
        raise InconsistentRelations("relations do not leave a square first-order system")
    s_sub = tuple(tuple(S[i][j] for j in alive_cols) for i in alive_rows)
    if not s_sub:
        return NormalForm(HAT_INF, "ŵ", ())
    try:
        s_inv = linalg.inverse(s_sub)
    except ZeroDivisionError as exc:
        raise InconsistentRelations("leading relation matrix is singular after elimination") from exc
    m = len(alive_cols)
    rows = []
    for a in range(m):
        row = []
        for b in range(m):
            acc = LaurentSeries("ŵ")
            for c in range(m):
                acc = acc + T[alive_rows[c]][alive_cols[b]] * s_inv[a][c]
            row.append(acc.shift(-2) * (-ONE))
        rows.append(tuple(row))
    return NormalForm(HAT_INF, "ŵ", tuple(alive_cols), _series_matrix_to_coeffs(rows))


def _solve_zero_hat(g: ConnectionGerm) -> NormalForm:
    """(ẑ + N) d_ẑ q = -q for blocks whose leading term N is nilpotent, residue terms dropped."""
    blocks = []
    for idx in g.blocks():
        b = g.block(idx)
        if b.pole_order == 2 and b.rank > 1 and linalg.is_nilpotent(b.coefficient(-2)):
            blocks.append(idx)
    if len(blocks) != 1:
        raise UnsupportedGermShape("no unique nilpotent order-two block for the 0̂ normal form")
    idx = blocks[0]
    nil = g.block(idx).coefficient(-2)
    n = len(idx)
    coeffs: Dict[int, linalg.Matrix] = {}
    power = linalg.identity(n)
    k = 0
    while not linalg.is_zero(power):
        # -(ẑ + N)^-1 = -sum (-1)^k N^k ẑ^(-k-1)
        coeffs[-k - 1] = linalg.scale(power, Scalar.const(-(-1) ** k))
        power = linalg.mul(power, nil)
        k += 1
    return NormalForm(HAT_ZERO, "ẑ", tuple(idx), coeffs)


def check_seeds(nf: NormalForm, seeds: Sequence[FormalSummand]):
    """Leading exponents from Legendre must solve the edge equations of ``det(tau - B)``."""
    if not nf.dimension:
        if seeds:
            raise SeedMismatch("solver lost every generator but Legendre seeds exist")
        return
    poly = _polygon_from_coeffs(char_poly(nf.matrix_series()))
    coeffs = poly.coefficients
    for seed in seeds:
        q = seed.exponent
        if not q.body.coeffs:
            continue
        k0, c0 = q.body.leading()
        # d qhat / d x leading term: c0 * (k0/d) * u^(k0 - d)
        lead = c0 * Fraction(k0, q.d)
        rho = Fraction(-(k0 - q.d), q.d)
        seg = next((s for s in poly.segments if s.slope == rho), None)
        if seg is None:
            raise SeedMismatch(f"no edge of pole order {rho} for seed {q}")
        d = rho.denominator
        val = ZERO
        x = reduce_roots(lead ** d)
        for i in range(seg.length // d + 1):
            j = seg.start[0] + i * d
            v = seg.start[1] + i * d * rho
            if v.denominator == 1:
                val = val + coeffs[j].coeffs.get(int(v), ZERO) * x ** i
        if not scalar_is_zero(reduce_roots(val)):
            raise SeedMismatch(f"Legendre seed {q} does not solve the edge equation of the solver matrix")
