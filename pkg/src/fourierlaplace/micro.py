"""Weyl-algebra and microdifferential operators.

Both kinds are kept in normal order with the space variable on the left.
``WeylOperator`` terms ``(a, b)`` stand for ``x^a d^b``; ``MicroOperator`` terms
``(s, i)`` stand for ``x^s what^i`` where ``what`` is the inverse of the
derivation.  Truncated micro operators remember the first unknown
``what``-order in ``prec``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Optional, Tuple

from .errors import (ChartMismatch, Inconclusive, NotFormallyInvertible,
                     OracleDisagreement)
from .scalar import ONE, ZERO, Scalar, as_scalar, reduce_roots, scalar_is_zero

DEFAULT_ORDER = 12
DEFAULT_SPACE_BOUND = 24

HAT = "ŵ"
SPACE_OF_CHART = {"E0": "z", "Einf": "w"}
DUAL_COORD = {"z": "ẑ", "ẑ": "z"}


def _falling(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


def _binom(a: int, k: int) -> Fraction:
    """Generalized binomial coefficient, ``a`` any integer."""
    return Fraction(_falling(a, k), _falling(k, k))


def _add_term(out: dict, key, c: Scalar):
    if key in out:
        out[key] = out[key] + c
    else:
        out[key] = c


def _fmt_terms(terms: dict, render) -> str:
    if not terms:
        return "0"
    parts = []
    for key in sorted(terms, key=lambda k: (k[1], k[0])):
        c = terms[key]
        mono = render(key)
        cs = str(c)
        neg = cs.startswith("-") and " " not in cs
        if neg:
            cs = cs[1:]
        if " " in cs:
            cs = f"({cs})"
        if not mono:
            body = cs
        elif cs == "1":
            body = mono
        else:
            body = f"{cs}*{mono}"
        parts.append(("-" if neg else "+", body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


def _pow_str(var, e):
    if e == 0:
        return ""
    return var if e == 1 else f"{var}^{e}"


# --------------------------------------------------------------------- Weyl

class WeylOperator:
    """Finite sum of ``c * x^a * d_x^b`` (``b >= 0``, ``a`` may be negative)."""

    __slots__ = ("coord", "terms")

    def __init__(self, coord: str, terms: Dict[Tuple[int, int], Scalar] = None):
        terms = {(int(a), int(b)): reduce_roots(as_scalar(c)) for (a, b), c in (terms or {}).items()}
        if any(b < 0 for _, b in terms):
            raise ValueError("Weyl operators have no negative derivative powers")
        self.coord = coord
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    @property
    def chart(self):
        return self.coord

    @classmethod
    def var(cls, coord):
        return cls(coord, {(1, 0): ONE})

    @classmethod
    def d(cls, coord):
        return cls(coord, {(0, 1): ONE})

    @classmethod
    def scalar(cls, coord, c):
        return cls(coord, {(0, 0): as_scalar(c)})

    def _coerce(self, other):
        if isinstance(other, WeylOperator):
            if other.coord != self.coord:
                raise ChartMismatch(f"{self.coord} vs {other.coord}")
            return other
        return WeylOperator.scalar(self.coord, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_term(out, k, v)
        return WeylOperator(self.coord, out)

    __radd__ = __add__

    def __neg__(self):
        return WeylOperator(self.coord, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for (a, b), c1 in self.terms.items():
            for (m, n), c2 in other.terms.items():
                # d^b x^m = sum_k C(b,k) (m)_k x^(m-k) d^(b-k)
                for k in range(b + 1):
                    f = _binom(b, k) * _falling(m, k)
                    if f:
                        _add_term(out, (a + m - k, b - k + n), c1 * c2 * f)
        return WeylOperator(self.coord, out)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __pow__(self, n: int):
        out = WeylOperator.scalar(self.coord, ONE)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, WeylOperator):
            return NotImplemented
        diff = self - other
        return all(scalar_is_zero(v) for v in diff.terms.values())

    __hash__ = None

    def is_polynomial(self) -> bool:
        return all(a >= 0 for a, _ in self.terms)

    def __str__(self):
        return _fmt_terms(self.terms, lambda k: "*".join(
            x for x in (_pow_str(self.coord, k[0]), _pow_str(f"∂_{self.coord}", k[1])) if x))

    __repr__ = __str__


def anti_involution(op: WeylOperator) -> WeylOperator:
    """Fourier-Laplace map ``x -> -d_xhat``, ``d_x -> xhat`` between the z and ẑ charts.

    The map respects products in their given order.  Reversing the order is
    impossible for these generator images: it would send ``[d, x] = 1`` to
    ``-1``.
    """
    if not op.is_polynomial():
        raise ValueError("the Fourier-Laplace map needs a polynomial operator")
    target = DUAL_COORD.get(op.coord, op.coord + "^")
    image_x = -WeylOperator.d(target)
    image_d = WeylOperator.var(target)
    out = WeylOperator(target)
    for (a, b), c in op.terms.items():
        out = out + (image_x ** a) * (image_d ** b) * c
    return out


def sign_flip(op: WeylOperator) -> WeylOperator:
    """Pull-back by ``x -> -x``: ``x^a d^b`` picks up ``(-1)^(a+b)``."""
    return WeylOperator(op.coord, {(a, b): c * (-1) ** ((a + b) % 2) for (a, b), c in op.terms.items()})


# --------------------------------------------------------------- micro ring

class MicroOperator:
    """Truncated element of ``E0`` (space variable z) or ``Einf`` (space variable w).

    ``terms[(s, i)]`` is the coefficient of ``x^s * ŵ^i``; orders ``i >= prec``
    are unknown, ``prec=None`` means the sum is exact.  ``extended`` allows
    negative space exponents.
    """

    __slots__ = ("chart", "terms", "prec", "extended", "order", "space_bound")

    def __init__(self, chart: str, terms=None, prec: Optional[int] = None, extended: bool = False,
                 order: int = DEFAULT_ORDER, space_bound: int = DEFAULT_SPACE_BOUND):
        if chart not in SPACE_OF_CHART:
            raise ChartMismatch(f"unknown chart {chart!r}")
        terms = {(int(s), int(i)): reduce_roots(as_scalar(c)) for (s, i), c in (terms or {}).items()}
        self.chart = chart
        self.prec = prec
        self.terms = {k: v for k, v in terms.items() if not v.is_zero() and (prec is None or k[1] < prec)}
        self.extended = extended or any(s < 0 for s, _ in self.terms)
        self.order = order
        self.space_bound = space_bound

    @property
    def space(self):
        return SPACE_OF_CHART[self.chart]

    def _like(self, terms, prec, extended=None):
        return MicroOperator(self.chart, terms, prec, self.extended if extended is None else extended,
                             self.order, self.space_bound)

    @classmethod
    def monomial(cls, chart, s, i, c=ONE, **kw):
        return cls(chart, {(s, i): as_scalar(c)}, **kw)

    @classmethod
    def what(cls, chart, **kw):
        return cls.monomial(chart, 0, 1, **kw)

    @classmethod
    def space_var(cls, chart, k=1, **kw):
        return cls.monomial(chart, k, 0, **kw)

    @classmethod
    def deriv(cls, chart, **kw):
        """``d_z = ŵ^-1`` in E0; ``d_w = -w^-2 ŵ^-1`` in Einf."""
        if chart == "E0":
            return cls.monomial(chart, 0, -1, **kw)
        return cls.monomial(chart, -2, -1, -ONE, **kw)

    @classmethod
    def from_weyl(cls, op: WeylOperator, chart: str, **kw) -> "MicroOperator":
        if SPACE_OF_CHART.get(chart) != op.coord:
            raise ChartMismatch(f"Weyl operator in {op.coord} does not live in chart {chart}")
        dd = cls.deriv(chart, **kw)
        out = cls(chart, {}, **kw)
        for (a, b), c in op.terms.items():
            out = out + cls.space_var(chart, a, **kw) * (dd ** b) * c
        return out

    @property
    def min_order(self) -> Optional[int]:
        return min((i for _, i in self.terms), default=self.prec)

    def _coerce(self, other):
        if isinstance(other, MicroOperator):
            if other.chart != self.chart:
                raise ChartMismatch(f"{self.chart} vs {other.chart}")
            return other
        return MicroOperator(self.chart, {(0, 0): as_scalar(other)}, None, False, self.order, self.space_bound)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_term(out, k, v)
        precs = [p for p in (self.prec, other.prec) if p is not None]
        return self._like(out, min(precs) if precs else None, self.extended or other.extended)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -v for k, v in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MicroOperator):
            c = as_scalar(other)
            return self._like({k: v * c for k, v in self.terms.items()}, self.prec)
        return micro_product(self, other)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __pow__(self, n: int):
        if n < 0:
            return micro_invert(self) ** (-n)
        out = self._coerce(ONE)
        for _ in range(n):
            out = out * self
        return out

    def coefficient(self, s: int, i: int) -> Scalar:
        return self.terms.get((s, i), ZERO)

    def order_slice(self, i: int) -> Dict[int, Scalar]:
        """Space-exponent coefficients at ``ŵ^i``."""
        return {s: c for (s, j), c in self.terms.items() if j == i}

    def profile(self) -> Dict[int, int]:
        """``ŵ``-order -> minimal space exponent with a nonzero coefficient."""
        out: Dict[int, int] = {}
        for s, i in self.terms:
            out[i] = min(out.get(i, s), s)
        return dict(sorted(out.items()))

    def profile_table(self) -> str:
        rows = [f"{HAT}^{i}: {s}" for i, s in self.profile().items()]
        return "\n".join(["order: min space exponent"] + rows)

    def equals(self, other, upto: Optional[int] = None) -> bool:
        other = self._coerce(other)
        bound = [p for p in (self.prec, other.prec, upto) if p is not None]
        bound = min(bound) if bound else None
        diff = (self - other).terms
        return all(scalar_is_zero(v) for (s, i), v in diff.items() if bound is None or i < bound)

    def __str__(self):
        x = self.space
        s = _fmt_terms(self.terms, lambda k: "*".join(
            p for p in (_pow_str(x, k[0]), _pow_str(HAT, k[1])) if p))
        if self.prec is not None:
            s += f" + O({HAT}^{self.prec})"
        return s

    __repr__ = __str__


def micro_product(a: MicroOperator, b: MicroOperator) -> MicroOperator:
    """Normal-ordered product ``a * b``.

    Uses ``ŵ^i x^n = sum_k C(-i, k) (n)_k x^(n-k) ŵ^(i+k)``; the known range
    of the result is the tightest one implied by the inputs and the order
    bound.
    """
    if a.chart != b.chart:
        raise ChartMismatch(f"{a.chart} vs {b.chart}")
    order = max(a.order, b.order)
    va, vb = a.min_order, b.min_order
    bounds = []
    if a.prec is not None and vb is not None:
        bounds.append(a.prec + vb)
    if b.prec is not None and va is not None:
        bounds.append(b.prec + va)
    prec = min(bounds) if bounds else None
    cap = order + 1 if prec is None else min(prec, order + 1)
    truncated = False
    floor = -a.space_bound
    out: dict = {}
    for (m, i), c1 in a.terms.items():
        for (n, j), c2 in b.terms.items():
            k = 0
            while True:
                alive = not ((i <= 0 and k > -i) or (n >= 0 and k > n))
                if not alive:
                    break
                if i + k + j >= cap:
                    truncated = True
                    break
                f = _binom(-i, k) * _falling(n, k)
                s = m + n - k
                if s < floor:
                    # exponents only decrease from here on
                    truncated = True
                    cap = min(cap, i + k + j)
                    break
                _add_term(out, (s, i + k + j), c1 * c2 * f)
                k += 1
    if truncated:
        prec = cap if prec is None else min(prec, cap)
    return MicroOperator(a.chart, out, prec, a.extended or b.extended, order,
                         max(a.space_bound, b.space_bound))


def _invert_monomial(s: int, i: int, c: Scalar, like: MicroOperator) -> MicroOperator:
    # (x^s ŵ^i)^-1 = ŵ^-i x^-s, then normal order
    left = MicroOperator.monomial(like.chart, 0, -i, ONE / c, order=like.order, space_bound=like.space_bound)
    right = MicroOperator.monomial(like.chart, -s, 0, order=like.order, space_bound=like.space_bound)
    return micro_product(left, right)


def micro_invert(a: MicroOperator, order: Optional[int] = None) -> MicroOperator:
    """Formal inverse via ``a = M (1 - N)`` with ``M`` the lowest-order monomial."""
    if order is not None:
        a = MicroOperator(a.chart, a.terms, a.prec, a.extended, order, a.space_bound)
    if not a.terms:
        raise NotFormallyInvertible("zero operator")
    i0 = a.min_order
    lowest = {k: v for k, v in a.terms.items() if k[1] == i0}
    if len(lowest) != 1:
        raise NotFormallyInvertible(
            f"leading {HAT}-order part of {a} is not a single monomial")
    (s0, _), c0 = next(iter(lowest.items()))
    m_inv = _invert_monomial(s0, i0, c0, a)
    n_op = a._coerce(ONE) - micro_product(m_inv, a)
    if n_op.terms and n_op.min_order <= 0:
        raise NotFormallyInvertible(f"{a} does not factor as monomial times (1 - higher order)")
    total = m_inv
    power = m_inv
    for _ in range(a.order + 1 - i0):
        power = micro_product(n_op, power)
        if not power.terms:
            break
        total = total + power
    return total


# ----------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class Membership:
    verdict: str  # "InRing" or "Escapes"
    profile: Dict[int, int] = field(default_factory=dict)

    @property
    def in_ring(self) -> bool:
        return self.verdict == "InRing"


def membership_diagnostic(a: MicroOperator, ring: str, expected: Optional[bool] = None,
                          window: int = 4) -> Membership:
    """Decide membership of ``a`` in ``E0`` or the extended ``Einf`` ring from its profile.

    ``expected`` is the closed-form answer supplied by the caller; a
    disagreement raises :class:`OracleDisagreement`.
    """
    if ring not in SPACE_OF_CHART:
        raise ChartMismatch(f"unknown ring {ring!r}")
    if ring != a.chart:
        raise ChartMismatch(f"operator lives in {a.chart}, not {ring}")
    prof = a.profile()
    known = {i: s for i, s in prof.items() if a.prec is None or i < a.prec}
    if a.prec is not None and known and a.prec - min(known) < 8:
        raise Inconclusive(f"only {a.prec - min(known)} {HAT}-orders computed; need at least 8")
    orders = sorted(known)
    if not orders or (ring == "E0" and min(known.values()) >= 0):
        verdict = "InRing"
    elif a.prec is None:
        # finitely many terms: bounded, so only unextended E0 can reject it
        verdict = "Escapes" if ring == "E0" else "InRing"
    else:
        tail = orders[-window:]
        vals = [known[i] for i in tail]
        decreasing = (all(tail[j + 1] == tail[j] + 1 for j in range(len(tail) - 1))
                      and all(vals[j + 1] < vals[j] for j in range(len(vals) - 1)))
        head = [known[i] for i in orders[:-window]] or vals
        if decreasing or ring == "E0":
            verdict = "Escapes"
        elif min(vals) >= min(head):
            verdict = "InRing"
        else:
            raise Inconclusive(f"profile neither bounded nor strictly decreasing: {prof}")
    result = Membership(verdict, known)
    if expected is not None and result.in_ring != expected:
        raise OracleDisagreement(
            f"profile says {verdict} but the closed-form criterion says "
            f"{'InRing' if expected else 'Escapes'}; profile {known}")
    return result


# --------------------------------------------------------- chart identities

@dataclass(frozen=True)
class ChartRule:
    name: str
    lhs: str
    rhs: str


_RULES = (
    ChartRule("space-inverse", "w", "z^-1"),
    ChartRule("d_w", "∂_w", "-z^2*∂_z"),
    ChartRule("euler", "w*∂_w", "-z*∂_z"),
    ChartRule("d_zhat", "∂_ẑ", "-ŵ^2*∂_ŵ"),
    ChartRule("zhat", "ẑ", "ŵ^-1"),
    ChartRule("d_z-inverse", "∂_z^-1", "ŵ"),
    ChartRule("d_w-inverse", "∂_w^-1", "-ŵ*w^2"),
)


def chart_identities() -> MappingProxyType:
    """Immutable table of coordinate/operator substitutions, keyed by rule name."""
    return MappingProxyType({r.name: r for r in _RULES})
