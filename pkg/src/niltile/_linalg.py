"""Small exact linear algebra over Q (and Q(sqrt2)) on lists of rows."""
from __future__ import annotations

from fractions import Fraction


def _is_zero(x) -> bool:
    return x == 0


def rref(rows, ncols: int | None = None):
    """Reduced row echelon form.  Returns (matrix, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if not _is_zero(m[i][c]):
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c] if not isinstance(m[r][c], int) else Fraction(1, m[r][c])
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and not _is_zero(m[i][c]):
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    rows = [r for r in rows]
    if not rows:
        return 0
    return len(rref(rows)[1])


def span_basis(vectors):
    """An echelon basis of the span of ``vectors``."""
    vectors = [list(v) for v in vectors if any(not _is_zero(x) for x in v)]
    if not vectors:
        return []
    return rref(vectors)[0]


def in_span(basis, v) -> bool:
    if not any(not _is_zero(x) for x in v):
        return True
    if not basis:
        return False
    return rank(list(basis) + [list(v)]) == rank(basis)


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(inner)), 0) for j in range(cols)]
            for i in range(len(a))]


def transpose(a, nrows_if_empty: int = 0):
    if not a:
        return []
    return [list(r) for r in zip(*a)]


def zeros(n: int, m: int):
    return [[0] * m for _ in range(n)]


def identity(n: int):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
