"""Exact rational functions over Q in named parameters.

A :class:`Scalar` is a pair of sparse multivariate polynomials with
:class:`fractions.Fraction` coefficients.  Normalization is deliberately
light: monomial content is cancelled, exact divisibility of one side by the
other is detected, univariate pairs are reduced by a Euclidean gcd, and the
denominator is made monic.  Equality is decided by cross-multiplication, so
the lack of a full multivariate gcd never affects correctness.

Roots of scalars (needed for ramified exponents) are *fresh parameters*
``root1, root2, ...`` whose defining relations ``root_k^e = base`` live in a
process-wide table; :func:`reduce_roots` rewrites a scalar modulo those
relations.
"""
from __future__ import annotations

import ast
import random
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .errors import DivisionByZero, EvaluationPoleExhausted, ParseError

Monomial = Tuple[Tuple[str, int], ...]
Poly = Dict[Monomial, Fraction]

ONE_MONO: Monomial = ()


# ---------------------------------------------------------------- polynomials

def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in d.items() if e))


def _mono_div(a: Monomial, b: Monomial) -> Optional[Monomial]:
    d = dict(a)
    for v, e in b:
        r = d.get(v, 0) - e
        if r < 0:
            return None
        d[v] = r
    return tuple(sorted((v, e) for v, e in d.items() if e))


def _mono_key(m: Monomial):
    return (sum(e for _, e in m), tuple((v, e) for v, e in m))


def _padd(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for m, c in b.items():
        r = out.get(m, 0) + sign * c
        if r:
            out[m] = r
        else:
            out.pop(m, None)
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            r = out.get(m, 0) + ca * cb
            if r:
                out[m] = r
            else:
                out.pop(m, None)
    return out


def _pscale(a: Poly, c) -> Poly:
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def _lead(p: Poly) -> Monomial:
    return max(p, key=_mono_key)


def _pdiv_exact(p: Poly, d: Poly) -> Optional[Poly]:
    """Quotient ``p / d`` if ``d`` divides ``p`` exactly, else ``None``."""
    if not d:
        raise DivisionByZero("polynomial division by zero")
    lm_d = _lead(d)
    lc_d = d[lm_d]
    q: Poly = {}
    r = dict(p)
    while r:
        lm = _lead(r)
        m = _mono_div(lm, lm_d)
        if m is None:
            return None
        c = r[lm] / lc_d
        q[m] = c
        r = _padd(r, _pmul({m: c}, d), -1)
    return q


def _variables(p: Poly) -> set:
    return {v for m in p for v, _ in m}


def _univariate_gcd(a: Poly, b: Poly, var: str) -> Poly:
    def to_list(p):
        deg = max((dict(m).get(var, 0) for m in p), default=0)
        coeffs = [Fraction(0)] * (deg + 1)
        for m, c in p.items():
            coeffs[dict(m).get(var, 0)] = c
        return coeffs

    def trim(c):
        while c and c[-1] == 0:
            c.pop()
        return c

    x, y = trim(to_list(a)), trim(to_list(b))
    while y:
        r = list(x)
        while len(r) >= len(y) and r:
            f = r[-1] / y[-1]
            shift = len(r) - len(y)
            for i, c in enumerate(y):
                r[i + shift] -= f * c
            trim(r)
        x, y = y, r
    lc = x[-1]
    return {((var, i),) if i else ONE_MONO: c / lc for i, c in enumerate(x) if c}


def _content_monomial(p: Poly) -> Monomial:
    it = iter(p)
    common = dict(next(it))
    for m in it:
        d = dict(m)
        for v in list(common):
            common[v] = min(common[v], d.get(v, 0))
            if not common[v]:
                del common[v]
    return tuple(sorted(common.items()))


def _poly_str(p: Poly) -> str:
    if not p:
        return "0"
    parts = []
    for m in sorted(p, key=_mono_key, reverse=True):
        c = p[m]
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = [v if e == 1 else f"{v}^{e}" for v, e in m]
        if not factors:
            body = str(c)
        elif c == 1:
            body = "*".join(factors)
        elif c.denominator == 1:
            body = f"{c}*" + "*".join(factors)
        else:
            body = f"{c.numerator}/{c.denominator}*" + "*".join(factors)
        parts.append((sign, body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


# --------------------------------------------------------------------- Scalar

class Scalar:
    """Immutable element of Q(p1, ..., pn)."""

    __slots__ = ("num", "den")
    __hash__ = None  # equality is semantic, not syntactic

    def __init__(self, num: Poly, den: Optional[Poly] = None, _normalize=True):
        if den is None:
            den = {ONE_MONO: Fraction(1)}
        if not den:
            raise DivisionByZero("zero denominator")
        if _normalize:
            num, den = _normalize_pair(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *_):
        raise AttributeError("Scalar is immutable")

    # constructors
    @classmethod
    def const(cls, c) -> "Scalar":
        c = Fraction(c)
        return cls({ONE_MONO: c} if c else {}, _normalize=False)

    @classmethod
    def param(cls, name: str) -> "Scalar":
        if not name.isidentifier():
            raise ParseError(f"invalid parameter name {name!r}")
        return cls({((name, 1),): Fraction(1)}, _normalize=False)

    @classmethod
    def parse(cls, text) -> "Scalar":
        return parse_scalar(text)

    # inspection
    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return all(not m for m in self.num) and all(not m for m in self.den)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num.get(ONE_MONO, Fraction(0)) / self.den[ONE_MONO]

    def params(self) -> set:
        return _variables(self.num) | _variables(self.den)

    def is_monomial(self) -> bool:
        return len(self.num) == 1 and len(self.den) == 1

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        d = _peval(self.den, point)
        if d == 0:
            raise ZeroDivisionError("evaluation hits a pole")
        return _peval(self.num, point) / d

    def substitute(self, mapping: Mapping[str, "Scalar"]) -> "Scalar":
        return _psubst(self.num, mapping) / _psubst(self.den, mapping)

    def _as_fraction(self) -> Optional[Fraction]:
        """The value when constant (cheap structural test), else None."""
        if len(self.den) != 1 or ONE_MONO not in self.den or len(self.num) > 1:
            return None
        if not self.num:
            return Fraction(0)
        c = self.num.get(ONE_MONO)
        if c is None:
            return None
        d = self.den[ONE_MONO]
        return c if d == 1 else c / d

    # arithmetic
    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        a, b = self._as_fraction(), other._as_fraction()
        if a is not None and b is not None:
            return Scalar.const(a + b)
        if self.den == other.den:
            return Scalar(_padd(self.num, other.num), self.den)
        return Scalar(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return Scalar(_pscale(self.num, -1), self.den, _normalize=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return ZERO
        a, b = self._as_fraction(), other._as_fraction()
        if a is not None and b is not None:
            return Scalar.const(a * b)
        return Scalar(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise DivisionByZero(f"division of {self} by zero")
        a, b = self._as_fraction(), other._as_fraction()
        if a is not None and b is not None:
            return Scalar.const(a / b)
        return Scalar(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        return Scalar.const(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ONE / (self ** (-n))
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return not _padd(_pmul(self.num, other.den), _pmul(other.num, self.den), -1)

    def __bool__(self):
        return bool(self.num)

    def __str__(self):
        n = _poly_str(self.num)
        if self.den == {ONE_MONO: Fraction(1)}:
            return n
        if len(self.num) == 1 and len(self.den) == 1:
            (nm, nc), = self.num.items()
            (dm, dc), = self.den.items()
            c = nc / dc
            top = _poly_str({nm: Fraction(c.numerator)})
            bottom = _poly_str({dm: Fraction(c.denominator)})
            if "*" in bottom:
                bottom = f"({bottom})"
            return f"{top}/{bottom}"
        d = _poly_str(self.den)
        if len(self.num) > 1:
            n = f"({n})"
        elif n.startswith("-"):
            n = "-" + (n[1:] if "/" not in n[1:] else f"({n[1:]})")
        if len(self.den) > 1 or "*" in d or "/" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"Scalar({str(self)!r})"


def _normalize_pair(num: Poly, den: Poly) -> Tuple[Poly, Poly]:
    if not num:
        return {}, {ONE_MONO: Fraction(1)}
    cm = _content_monomial({**{m: 1 for m in num}, **{m: 1 for m in den}})
    if cm:
        num = {_mono_div(m, cm): c for m, c in num.items()}
        den = {_mono_div(m, cm): c for m, c in den.items()}
    if len(den) > 1 or _variables(den):
        q = _pdiv_exact(num, den)
        if q is not None:
            num, den = q, {ONE_MONO: Fraction(1)}
        elif len(num) > 1:
            q = _pdiv_exact(den, num)
            if q is not None:
                num, den = {ONE_MONO: Fraction(1)}, q
            else:
                vs = _variables(num) | _variables(den)
                if len(vs) == 1:
                    g = _univariate_gcd(num, den, next(iter(vs)))
                    if len(g) > 1:
                        num = _pdiv_exact(num, g)
                        den = _pdiv_exact(den, g)
    lc = den[_lead(den)]
    if lc != 1:
        num = _pscale(num, 1 / lc)
        den = _pscale(den, 1 / lc)
    return num, den


def _peval(p: Poly, point) -> Fraction:
    total = Fraction(0)
    for m, c in p.items():
        t = c
        for v, e in m:
            t *= Fraction(point[v]) ** e
        total += t
    return total


def _psubst(p: Poly, mapping) -> Scalar:
    total = ZERO
    for m, c in p.items():
        t = Scalar.const(c)
        for v, e in m:
            t = t * ((mapping[v] if v in mapping else Scalar.param(v)) ** e)
        total = total + t
    return total


ZERO = Scalar({}, _normalize=False)
ONE = Scalar.const(1)


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    return Scalar.const(x)


# -------------------------------------------------------------------- parsing

def parse_scalar(text) -> Scalar:
    """Parse infix text such as ``"(t^2-1)/(t-1)"`` or ``"-b2/t2"``."""
    if isinstance(text, Scalar):
        return text
    if isinstance(text, (int, Fraction)):
        return Scalar.const(text)
    try:
        tree = ast.parse(str(text).replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse scalar {text!r}") from exc
    return _eval_node(tree.body, text)


def _eval_node(node, text) -> Scalar:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        if isinstance(node.value, float):
            return Scalar.const(Fraction(repr(node.value)))
        return Scalar.const(node.value)
    if isinstance(node, ast.Name):
        return Scalar.param(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exp = _eval_node(node.right, text)
            if not exp.is_constant() or exp.constant_value().denominator != 1:
                raise ParseError(f"non-integer exponent in {text!r}")
            return _eval_node(node.left, text) ** int(exp.constant_value())
        a, b = _eval_node(node.left, text), _eval_node(node.right, text)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(node.op, ast.Div):
            return a / b
    raise ParseError(f"unsupported syntax in scalar {text!r}")


# ------------------------------------------------------------- arith / zeros

def scalar_arith(a, b, op: str) -> Scalar:
    a, b = as_scalar(a), as_scalar(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def random_point(names: Iterable[str], rng: random.Random) -> Dict[str, Fraction]:
    return {n: Fraction(rng.randint(-97, 97), rng.randint(1, 29)) for n in sorted(names)}


_ZERO_TEST_SEED = 0


def set_zero_test_seed(seed: int) -> None:
    """Default seed for the evaluation points of :func:`scalar_is_zero`."""
    global _ZERO_TEST_SEED
    _ZERO_TEST_SEED = int(seed)


def scalar_is_zero(a, seed: Optional[int] = None, samples: int = 4, retries: int = 50) -> bool:
    """Zero test: normalization plus evaluation at random rational points.

    Fresh root parameters are first eliminated modulo their defining
    relations.  The two verdicts must agree; a disagreement means the
    normalization is broken and raises ``AssertionError``.
    """
    a = reduce_roots(as_scalar(a))
    structural = a.is_zero()
    names = a.params()
    if not names:
        return structural
    rng = random.Random(_ZERO_TEST_SEED if seed is None else seed)
    hits, attempts = 0, 0
    values = []
    while hits < samples:
        attempts += 1
        if attempts > retries:
            raise EvaluationPoleExhausted(f"no pole-free point found for {a}")
        try:
            values.append(a.evaluate(random_point(names, rng)))
        except ZeroDivisionError:
            continue
        hits += 1
    numeric = all(v == 0 for v in values)
    if numeric != structural:
        raise AssertionError(f"zero test disagreement on {a}")
    return structural


# ------------------------------------------------------- fresh root parameters

class RootTable:
    """Fresh parameters standing for e-th roots, ``name^e = base``."""

    def __init__(self):
        self._by_key: Dict[Tuple[str, int], str] = {}
        self.relations: Dict[str, Tuple[Scalar, int]] = {}

    def root(self, base: Scalar, e: int) -> Scalar:
        base = reduce_roots(base, self)
        key = (str(base), e)
        name = self._by_key.get(key)
        if name is None:
            name = f"root{len(self.relations) + 1}"
            self._by_key[key] = name
            self.relations[name] = (base, e)
        return Scalar.param(name)

    def describe(self, name: str) -> str:
        base, e = self.relations[name]
        return f"{name}^{e}={base}"


ROOTS = RootTable()


def fresh_root(base, e: int) -> Scalar:
    """Scalar ``r`` with ``r**e == base``; exact when ``base`` is already a power."""
    base = as_scalar(base)
    if e == 1:
        return base
    if base.is_zero():
        return ZERO
    if base.is_constant():
        v = base.constant_value()
        r = _rational_root(v, e)
        if r is not None:
            return Scalar.const(r)
    if base.is_monomial():
        # pull out perfect powers of parameters
        (nm, nc), = base.num.items()
        (dm, dc), = base.den.items()
        c = nc / dc
        rc = _rational_root(c, e)
        if rc is not None and all(x % e == 0 for _, x in nm) and all(x % e == 0 for _, x in dm):
            return Scalar({tuple((v, x // e) for v, x in nm): rc},
                          {tuple((v, x // e) for v, x in dm): Fraction(1)})
    return ROOTS.root(base, e)


def _rational_root(v: Fraction, e: int) -> Optional[Fraction]:
    if v < 0 and e % 2 == 0:
        return None
    sign = -1 if v < 0 else 1
    out = []
    for n in (abs(v.numerator), v.denominator):
        r = round(n ** (1.0 / e))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** e == n:
                out.append(cand)
                break
        else:
            return None
    return sign * Fraction(out[0], out[1])


def reduce_roots(a: Scalar, table: Optional[RootTable] = None) -> Scalar:
    """Rewrite ``a`` modulo ``root^e = base`` for every fresh parameter.

    Monomial denominators in a root are rationalized first; a root left in a
    non-monomial denominator is kept as is.
    """
    table = table or ROOTS
    if not table.relations or a._as_fraction() is not None:
        return a
    present = a.params() & set(table.relations)
    if not present:
        return a
    for name in reversed(list(table.relations)):
        if name not in present:
            continue
        base, e = table.relations[name]
        num, den = a.num, a.den
        dpow = {dict(m).get(name, 0) for m in den}
        if dpow == {0} and all(dict(m).get(name, 0) < e for m in num):
            continue
        if len(den) == 1 or len(dpow) == 1:
            k = max(dpow)
            if k % e:
                fix = {((name, e - k % e),): Fraction(1)}
                num, den = _pmul(num, fix), _pmul(den, fix)
        a = _reduce_poly(num, name, base, e) / _reduce_poly(den, name, base, e)
        present = a.params() & set(table.relations)
    return a


def _reduce_poly(p: Poly, name: str, base: Scalar, e: int) -> Scalar:
    out = ZERO
    for m, c in p.items():
        d = dict(m)
        k = d.pop(name, 0)
        q, r = divmod(k, e)
        rest = dict(d)
        if r:
            rest[name] = r
        out = out + Scalar({tuple(sorted(rest.items())): c}, _normalize=False) * base ** q
    return out
