"""Small dense-matrix helpers over Scalars (or anything with ring operations).

Matrices are tuples of row tuples.
"""
from __future__ import annotations

from itertools import permutations
from typing import Callable, Sequence, Tuple

from .errors import DivisionByZero
from .scalar import ONE, ZERO, Scalar, as_scalar, scalar_is_zero

Matrix = Tuple[Tuple[object, ...], ...]


def mat(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(as_scalar(x) for x in r) for r in rows)


def zeros(n: int, m: int = None, zero=ZERO) -> Matrix:
    return tuple(tuple(zero for _ in range(m if m is not None else n)) for _ in range(n))


def identity(n: int, one=ONE, zero=ZERO) -> Matrix:
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def diag(entries) -> Matrix:
    entries = [as_scalar(e) for e in entries]
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else ZERO for j in range(n)) for i in range(n))


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(a: Matrix, c) -> Matrix:
    return tuple(tuple(x * c for x in r) for r in a)


def mul(a: Matrix, b: Matrix, zero=ZERO) -> Matrix:
    n, m = len(a), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for k in range(len(b)):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def is_zero(a: Matrix, zero_test: Callable = None) -> bool:
    zero_test = zero_test or (lambda x: scalar_is_zero(x))
    return all(zero_test(x) for r in a for x in r)


def equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and is_zero(sub(a, b))


def submatrix(a: Matrix, rows, cols) -> Matrix:
    return tuple(tuple(a[i][j] for j in cols) for i in rows)


def _perm_sign(p) -> int:
    sign, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def det(a: Matrix, one=ONE, zero=ZERO):
    """Leibniz expansion; fine for the small ranks handled here."""
    n = len(a)
    total = zero
    for p in permutations(range(n)):
        term = one
        for i in range(n):
            term = term * a[i][p[i]]
        if _perm_sign(p) < 0:
            term = -term
        total = total + term
    return total


def inverse(a: Matrix) -> Matrix:
    """Gauss-Jordan over Scalars."""
    n = len(a)
    work = [list(r) + list(e) for r, e in zip(a, identity(n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if not scalar_is_zero(work[r][col])), None)
        if piv is None:
            raise DivisionByZero("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        p = work[col][col]
        work[col] = [x / p for x in work[col]]
        for r in range(n):
            if r != col and not work[r][col].is_zero():
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return tuple(tuple(r[n:]) for r in work)


def is_nilpotent(a: Matrix) -> bool:
    n = len(a)
    p = a
    for _ in range(n - 1):
        p = mul(p, a)
    return is_zero(p)


def is_triangular(a: Matrix) -> bool:
    n = len(a)
    upper = all(a[i][j].is_zero() for i in range(n) for j in range(i))
    lower = all(a[i][j].is_zero() for i in range(n) for j in range(i + 1, n))
    return upper or lower


def fmt(a: Matrix) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in a) + "]"


def to_strings(a: Matrix):
    return [[str(x) for x in r] for r in a]


def from_strings(rows, parse) -> Matrix:
    return tuple(tuple(parse(x) for x in r) for r in rows)


__all__ = ["Matrix", "mat", "zeros", "identity", "diag", "add", "sub", "scale", "mul",
           "transpose", "is_zero", "equal", "submatrix", "det", "inverse", "is_nilpotent",
           "is_triangular", "fmt", "to_strings", "from_strings", "Scalar"]
