"""Truncated Laurent and Puiseux series over :class:`~.scalar.Scalar`.

Every series carries the order from which its coefficients are unknown
(``prec``); ``prec=None`` marks an exact finite sum.  Operations propagate
this order exactly, so a coefficient that is reported is always correct.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from math import gcd
from typing import Dict, Optional

from .errors import (CoordinateMismatch, LogarithmicTerm, NotReversible,
                     ParseError, ZeroLeadingCoefficient)
from .scalar import (ONE, ZERO, Scalar, as_scalar, fresh_root, parse_scalar, reduce_roots,
                     scalar_is_zero)

DEFAULT_TERMS = 12


def _min_prec(*ps):
    finite = [p for p in ps if p is not None]
    return min(finite) if finite else None


def _lcm(a, b):
    return a * b // gcd(a, b)


class LaurentSeries:
    """``sum c_k x^k`` for ``k < prec`` in the coordinate ``coord``."""

    __slots__ = ("coord", "coeffs", "prec")

    def __init__(self, coord: str, coeffs: Dict[int, Scalar] = None, prec: Optional[int] = None):
        coeffs = {int(k): reduce_roots(as_scalar(v)) for k, v in (coeffs or {}).items()}
        coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()
                  and (prec is None or k < prec)}
        self.coord = coord
        self.coeffs = coeffs
        self.prec = prec

    # construction helpers
    @classmethod
    def monomial(cls, coord, k, c=ONE, prec=None):
        return cls(coord, {k: as_scalar(c)}, prec)

    @classmethod
    def constant(cls, coord, c):
        return cls(coord, {0: as_scalar(c)})

    @classmethod
    def parse(cls, text: str, coord: str) -> "LaurentSeries":
        return parse_series(text, coord)

    # inspection
    @property
    def valuation(self) -> Optional[int]:
        if self.coeffs:
            return min(self.coeffs)
        return self.prec

    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self):
        if not self.coeffs:
            raise ZeroLeadingCoefficient("series has no known nonzero coefficient")
        k = min(self.coeffs)
        return k, self.coeffs[k]

    def coefficient(self, k: int) -> Scalar:
        if self.prec is not None and k >= self.prec:
            raise ValueError(f"coefficient of {self.coord}^{k} is beyond the truncation order")
        return self.coeffs.get(k, ZERO)

    def degree_range(self):
        return (min(self.coeffs), max(self.coeffs)) if self.coeffs else (None, None)

    def polar_part(self) -> "LaurentSeries":
        return LaurentSeries(self.coord, {k: v for k, v in self.coeffs.items() if k < 0})

    def truncate(self, prec: int) -> "LaurentSeries":
        return LaurentSeries(self.coord, self.coeffs, _min_prec(self.prec, prec))

    def map_coeffs(self, f) -> "LaurentSeries":
        return LaurentSeries(self.coord, {k: f(v) for k, v in self.coeffs.items()}, self.prec)

    def rename(self, coord: str) -> "LaurentSeries":
        return LaurentSeries(coord, self.coeffs, self.prec)

    def _check(self, other):
        if isinstance(other, LaurentSeries) and other.coord != self.coord:
            raise CoordinateMismatch(f"{self.coord} vs {other.coord}")

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(self.coord, other)
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return LaurentSeries(self.coord, out, _min_prec(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda v: -v)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(self.coord, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            c = as_scalar(other)
            if c.is_zero():
                return LaurentSeries(self.coord, {}, None if self.prec is None else
                                     self.prec)
            return self.map_coeffs(lambda v: v * c)
        self._check(other)
        va, vb = self.valuation, other.valuation
        precs = []
        if self.prec is not None and vb is not None:
            precs.append(self.prec + vb)
        if other.prec is not None and va is not None:
            precs.append(other.prec + va)
        prec = min(precs) if precs else None
        if (va is None and self.prec is None) or (vb is None and other.prec is None):
            return LaurentSeries(self.coord, {}, None)
        out: Dict[int, Scalar] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                if prec is not None and k >= prec:
                    continue
                out[k] = out[k] + a * b if k in out else a * b
        return LaurentSeries(self.coord, out, prec)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``coord^k``."""
        return LaurentSeries(self.coord, {e + k: v for e, v in self.coeffs.items()},
                             None if self.prec is None else self.prec + k)

    def invert(self, terms: int = DEFAULT_TERMS) -> "LaurentSeries":
        return series_invert(self, terms)

    def __truediv__(self, other):
        if isinstance(other, LaurentSeries):
            return self * other.invert()
        return self * (ONE / as_scalar(other))

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        out = LaurentSeries.constant(self.coord, ONE)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derive(self) -> "LaurentSeries":
        return series_derive(self)

    def integrate(self) -> "LaurentSeries":
        return series_integrate(self)

    def compose(self, inner: "LaurentSeries", terms: int = DEFAULT_TERMS) -> "LaurentSeries":
        return series_compose(self, inner, terms)

    def ramify(self, k: int, coord: Optional[str] = None) -> "LaurentSeries":
        """Substitute ``coord -> coord^k``."""
        return LaurentSeries(coord or self.coord, {e * k: v for e, v in self.coeffs.items()},
                             None if self.prec is None else self.prec * k)

    # comparison
    def equals(self, other, upto: Optional[int] = None) -> bool:
        """Coefficientwise equality below ``upto`` (default: the common precision)."""
        self._check(other)
        bound = _min_prec(self.prec, other.prec, upto)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(scalar_is_zero(self.coeffs.get(k, ZERO) - other.coeffs.get(k, ZERO))
                   for k in keys if bound is None or k < bound)

    def __str__(self):
        return format_series(self.coeffs, self.coord, self.prec)

    __repr__ = __str__


def format_series(coeffs, coord, prec=None) -> str:
    if not coeffs:
        s = "0"
    else:
        parts = []
        for k in sorted(coeffs):
            c = coeffs[k]
            cs = str(c)
            neg = cs.startswith("-") and "(" not in cs[:2] and " " not in cs
            if neg:
                cs = cs[1:]
            compound = " " in cs
            if k == 0:
                body = f"({cs})" if compound else cs
            else:
                mono = coord if k == 1 else f"{coord}^{k}"
                if cs == "1":
                    body = mono
                else:
                    body = f"({cs})*{mono}" if compound else f"{cs}*{mono}"
            parts.append(("-" if neg else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
    if prec is not None:
        s += f" + O({coord}^{prec})"
    return s


def parse_series(text: str, coord: str) -> LaurentSeries:
    """Parse a sparse term list such as ``"-t/2*w^-2 - b*w^-1"``."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse series {text!r}") from exc

    def ev(node) -> LaurentSeries:
        if isinstance(node, ast.Name) and node.id == coord:
            return LaurentSeries.monomial(coord, 1)
        if isinstance(node, (ast.Name, ast.Constant)):
            return LaurentSeries.constant(coord, parse_scalar(ast.unparse(node)))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = ev(node.left)
                e = parse_scalar(ast.unparse(node.right))
                if not e.is_constant() or e.constant_value().denominator != 1:
                    raise ParseError(f"bad exponent in {text!r}")
                n = int(e.constant_value())
                if n < 0 and len(base.coeffs) == 1:
                    (k, c), = base.coeffs.items()
                    return LaurentSeries.monomial(coord, k * n, c ** n)
                return base ** n
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if len(b.coeffs) != 1:
                    raise ParseError(f"division by a non-monomial in {text!r}")
                (k, c), = b.coeffs.items()
                return a * LaurentSeries.monomial(coord, -k, ONE / c)
        raise ParseError(f"unsupported syntax in series {text!r}")

    return ev(tree.body)


# ------------------------------------------------------------------ operations

def series_arith(a, b, op: str):
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def series_invert(a: LaurentSeries, terms: int = DEFAULT_TERMS) -> LaurentSeries:
    if not a.coeffs:
        raise ZeroLeadingCoefficient(f"cannot invert {a}")
    v, c = a.leading()
    if len(a.coeffs) == 1 and a.prec is None:
        return LaurentSeries.monomial(a.coord, -v, ONE / c)
    rel = terms if a.prec is None else min(terms, a.prec - v)
    # a = c x^v (1 + h), 1/a = c^-1 x^-v sum (-h)^n
    h = LaurentSeries(a.coord, {k - v: x / c for k, x in a.coeffs.items() if k != v},
                      rel)
    out = LaurentSeries(a.coord, {0: ONE}, rel)
    power = LaurentSeries(a.coord, {0: ONE}, rel)
    for _ in range(rel):
        power = (power * -h).truncate(rel)
        if not power.coeffs:
            break
        out = out + power
    return out.shift(-v) * (ONE / c)


def series_derive(a: LaurentSeries) -> LaurentSeries:
    return LaurentSeries(a.coord, {k - 1: v * k for k, v in a.coeffs.items() if k},
                         None if a.prec is None else a.prec - 1)


def series_integrate(a: LaurentSeries) -> LaurentSeries:
    if -1 in a.coeffs:
        raise LogarithmicTerm(f"coefficient {a.coeffs[-1]} at {a.coord}^-1 is a residue")
    return LaurentSeries(a.coord, {k + 1: v / (k + 1) for k, v in a.coeffs.items()},
                         None if a.prec is None else a.prec + 1)


def series_compose(outer: LaurentSeries, inner: LaurentSeries,
                   terms: int = DEFAULT_TERMS) -> LaurentSeries:
    """``outer(inner(y))`` for ``inner`` of positive valuation."""
    v = inner.valuation
    if v is None or v < 1:
        raise NotReversible("inner series must have positive valuation")
    out = LaurentSeries(inner.coord, {}, None if outer.prec is None else outer.prec * v)
    pos = sorted(k for k in outer.coeffs if k >= 0)
    neg = sorted((k for k in outer.coeffs if k < 0), reverse=True)
    for keys, base in ((pos, inner), (neg, None)):
        if not keys:
            continue
        if base is None:
            base = series_invert(inner, terms)
        power = LaurentSeries.constant(inner.coord, ONE)
        done = 0
        for k in keys:
            for _ in range(abs(k) - done):
                power = power * base
            done = abs(k)
            out = out + power * outer.coeffs[k]
    return out


def series_reversion(a: LaurentSeries, terms: int = DEFAULT_TERMS) -> LaurentSeries:
    """Compositional inverse of a series of valuation exactly one."""
    if not a.coeffs or a.valuation != 1:
        raise NotReversible(f"{a} does not have valuation one")
    if min(a.coeffs) < 1:
        raise NotReversible(f"{a} has terms below the linear one")
    _, c1 = a.leading()
    prec = terms + 1 if a.prec is None else min(terms + 1, a.prec)
    inv_c1 = ONE / c1
    rest = LaurentSeries(a.coord, {k: v for k, v in a.coeffs.items() if k > 1}, a.prec)
    b = LaurentSeries.monomial(a.coord, 1, inv_c1, min(2, prec))
    # fixed point b = (y - rest(b)) / c1; each sweep fixes one more coefficient
    for p in range(3, prec + 1):
        y = LaurentSeries.monomial(a.coord, 1, ONE, p)
        b = ((y - series_compose(rest.truncate(p), b, terms)) * inv_c1).truncate(p)
    return b


def binomial_series(h: LaurentSeries, exponent: Fraction, rel: int) -> LaurentSeries:
    """``(1 + h)^exponent`` for ``h`` of positive valuation, to ``rel`` terms."""
    out = LaurentSeries(h.coord, {0: ONE}, rel)
    power = LaurentSeries(h.coord, {0: ONE}, rel)
    coef = Fraction(1)
    for n in range(1, rel + 1):
        coef = coef * (exponent - n + 1) / n
        power = (power * h).truncate(rel)
        if not power.coeffs:
            break
        out = out + power * Scalar.const(coef)
    return out


# ------------------------------------------------------------------- Puiseux

class PuiseuxSeries:
    """Series in ``base^(1/d)``, stored as a Laurent series in ``u``, ``u^d = base``."""

    __slots__ = ("d", "body", "base")

    def __init__(self, body: LaurentSeries, d: int = 1, base: Optional[str] = None):
        if d < 1:
            raise ValueError("ramification degree must be positive")
        base = base or body.coord
        g = d
        for k in body.coeffs:
            g = gcd(g, k)
        if g > 1:
            prec = None if body.prec is None else -(-body.prec // g)
            body = LaurentSeries(body.coord, {k // g: v for k, v in body.coeffs.items()}, prec)
            d //= g
        if d == 1:
            body = body.rename(base)
        elif body.coord == base:
            body = body.rename("u")
        self.d = d
        self.body = body
        self.base = base

    @classmethod
    def from_laurent(cls, s: LaurentSeries) -> "PuiseuxSeries":
        return cls(s, 1, s.coord)

    @property
    def coord(self):
        return self.base

    def relation(self) -> str:
        return f"{self.body.coord}^{self.d}={self.base}" if self.d > 1 else ""

    def refine(self, k: int) -> "PuiseuxSeries":
        """Same series written with ramification ``d*k`` (not normalized)."""
        obj = object.__new__(PuiseuxSeries)
        obj.d = self.d * k
        obj.body = self.body.ramify(k, "u" if self.d * k > 1 else self.base)
        obj.base = self.base
        return obj

    def _common(self, other):
        if not isinstance(other, PuiseuxSeries):
            if isinstance(other, LaurentSeries):
                other = PuiseuxSeries.from_laurent(other)
            else:
                other = PuiseuxSeries(LaurentSeries.constant(self.base, other))
        if other.base != self.base:
            raise CoordinateMismatch(f"{self.base} vs {other.base}")
        m = _lcm(self.d, other.d)
        a, b = self.refine(m // self.d), other.refine(m // other.d)
        return a, b, m

    def __add__(self, other):
        a, b, m = self._common(other)
        return PuiseuxSeries(a.body + b.body, m, self.base)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(-self.body, self.d, self.base)

    def __sub__(self, other):
        return self + (-other if isinstance(other, (PuiseuxSeries, LaurentSeries))
                       else -as_scalar(other))

    def __mul__(self, other):
        if isinstance(other, (PuiseuxSeries, LaurentSeries)):
            a, b, m = self._common(other)
            return PuiseuxSeries(a.body * b.body, m, self.base)
        return PuiseuxSeries(self.body * as_scalar(other), self.d, self.base)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return PuiseuxSeries(self.body ** n, self.d, self.base)

    def invert(self, terms=DEFAULT_TERMS):
        return PuiseuxSeries(series_invert(self.body, terms), self.d, self.base)

    @property
    def valuation(self) -> Optional[Fraction]:
        v = self.body.valuation
        return None if v is None else Fraction(v, self.d)

    def exponents(self):
        return {Fraction(k, self.d): c for k, c in self.body.coeffs.items()}

    def slope(self) -> Fraction:
        """Pole order in the base coordinate, ``deg_u(q) / d``; zero for no pole."""
        neg = [k for k in self.body.coeffs if k < 0]
        return Fraction(-min(neg), self.d) if neg else Fraction(0)

    def polar_part(self) -> "PuiseuxSeries":
        return PuiseuxSeries(self.body.polar_part(), self.d, self.base)

    def derive(self) -> "PuiseuxSeries":
        """Derivative in the base coordinate: ``(1/d) u^(1-d) d/du``."""
        return PuiseuxSeries(series_derive(self.body).shift(1 - self.d) * Scalar.const(Fraction(1, self.d)),
                             self.d, self.base)

    def integrate(self) -> "PuiseuxSeries":
        """Antiderivative in the base coordinate, zero constant term."""
        return PuiseuxSeries(series_integrate(self.body.shift(self.d - 1)) * self.d,
                             self.d, self.base)

    def substitute_sign(self, sign_root: Scalar) -> "PuiseuxSeries":
        """Replace ``u`` by ``sign_root * u``."""
        return PuiseuxSeries(LaurentSeries(self.body.coord,
                                           {k: v * sign_root ** k for k, v in self.body.coeffs.items()},
                                           self.body.prec), self.d, self.base)

    def equals(self, other, upto=None) -> bool:
        a, b, _ = self._common(other)
        return a.body.equals(b.body, upto)

    def __str__(self):
        s = str(self.body)
        return f"{s}  [{self.relation()}]" if self.d > 1 else s

    __repr__ = __str__


def as_puiseux(s) -> PuiseuxSeries:
    return s if isinstance(s, PuiseuxSeries) else PuiseuxSeries.from_laurent(s)


def puiseux_root(a, e: int, terms: int = DEFAULT_TERMS) -> PuiseuxSeries:
    """An ``e``-th root of ``a``; the root of the leading coefficient is a fresh parameter."""
    a = as_puiseux(a)
    if not a.body.coeffs:
        raise ZeroLeadingCoefficient(f"cannot take a root of {a}")
    v, c = a.body.leading()
    k = e // gcd(v, e)
    if k > 1:
        a = a.refine(k)
        v, c = a.body.leading()
    gamma = fresh_root(c, e)
    rel = terms if a.body.prec is None else a.body.prec - v
    h = LaurentSeries(a.body.coord, {i - v: x / c for i, x in a.body.coeffs.items() if i != v}, rel)
    unit = binomial_series(h, Fraction(1, e), rel)
    body = unit.shift(v // e) * gamma
    return PuiseuxSeries(body, a.d, a.base)
