"""Exact rational scalars and fraction-free integer linear algebra.

``Fraction`` from the standard library is the rational type used everywhere.
Matrices are plain nested sequences; the helpers here normalise them to
tuples of tuples so results are hashable and immutable.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InputError

Rational = Fraction
IntMatrix = tuple  # tuple[tuple[int, ...], ...]


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, an integer literal, or pass through a number."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, np.integer)):
        return Fraction(int(text))
    s = str(text).strip()
    if not s:
        raise InputError("empty rational literal")
    try:
        if "." in s or "e" in s.lower():
            raise ValueError
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not an exact rational: {text!r}") from None


def format_rational(x: Fraction | int) -> str:
    return str(Fraction(x))


def as_matrix(rows: Iterable[Iterable], *, integer: bool = False) -> tuple:
    """Normalise to a rectangular tuple-of-tuples of ints or Fractions."""
    out = []
    for row in rows:
        if integer:
            conv = []
            for v in row:
                f = Fraction(v) if not isinstance(v, (int, np.integer)) else Fraction(int(v))
                if f.denominator != 1:
                    raise InputError(f"non-integer entry {v!r} in integer matrix")
                conv.append(int(f))
            out.append(tuple(conv))
        else:
            out.append(tuple(parse_rational(v) if isinstance(v, str) else Fraction(v) for v in row))
    width = {len(r) for r in out}
    if len(width) > 1:
        raise DimensionError("ragged matrix rows")
    return tuple(out)


def shape(m: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(m)
    return rows, (len(m[0]) if rows else 0)


def integerize_rows(m: Sequence[Sequence]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (rank-preserving)."""
    out = []
    for row in m:
        fr = [Fraction(v) for v in row]
        d = lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * d) for f in fr])
    return out


def common_denominator(values: Iterable) -> int:
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d


def bareiss_det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    rows, cols = shape(m)
    if rows != cols:
        raise DimensionError(f"determinant of non-square {rows}x{cols} matrix")
    n = rows
    if n == 0:
        return 1
    a = [[int(v) for v in row] for row in as_matrix(m, integer=True)]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (akk * row_i[j] - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def _echelon(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form; returns (rows, pivot columns)."""
    a = [list(r) for r in m]
    rows, cols = shape(a)
    pivots: list[int] = []
    r = 0
    prev = 1
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        for i in range(r + 1, rows):
            aic = a[i][c]
            row_i, row_r = a[i], a[r]
            for j in range(c, cols):
                row_i[j] = (piv * row_i[j] - aic * row_r[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return a, pivots


def rank_exact(m: Sequence[Sequence]) -> int:
    """Rank over the rationals.  Accepts integer or rational entries."""
    rows, cols = shape(m)
    if rows == 0 or cols == 0:
        return 0
    _, pivots = _echelon(integerize_rows(m))
    return len(pivots)


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    """Divide by the gcd and make the first nonzero entry positive."""
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        return tuple(int(x) for x in v)
    first = next(x for x in v if x != 0)
    if first < 0:
        g = -g
    return tuple(int(x) // g for x in v)


def integer_kernel(m: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Basis of the right kernel as primitive integer vectors.

    One vector per free column of the echelon form; each has a positive
    first nonzero entry.  Empty iff the matrix has full column rank.
    """
    rows, cols = shape(m)
    if cols == 0:
        return []
    if rows == 0:
        return [tuple(int(i == j) for j in range(cols)) for i in range(cols)]
    ech, pivots = _echelon(integerize_rows(m))
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * cols
        x[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            s = sum((ech[r][j] * x[j] for j in range(c + 1, cols)), Fraction(0))
            x[c] = -s / ech[r][c]
        d = common_denominator(x)
        basis.append(primitive([int(v * d) for v in x]))
    return basis


def mat_vec(m: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum((a * b for a, b in zip(row, v)), 0) for row in m)


# -- batched int64 path ------------------------------------------------------

_INT64_LIMIT = 2**62


def _batch_safe_int64(k: int, max_abs: int) -> bool:
    # Bareiss intermediates: products of order-(k-1) minors, Hadamard bounded
    if k <= 1:
        return True
    return 2 * ((k - 1) * max_abs * max_abs) ** (k - 1) < _INT64_LIMIT


def batch_rank_det(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Exact ranks (and determinants when square) of a stack of integer matrices.

    ``arr`` has shape (B, R, C).  Uses fraction-free elimination with exact
    floor division; switches to Python-int object arrays when the Hadamard
    bound says int64 could overflow.  Returns ``(ranks, dets)`` with ``dets``
    None for non-square input.
    """
    arr = np.asarray(arr)
    if arr.ndim != 3:
        raise DimensionError("expected a (batch, rows, cols) array")
    B, R, C = arr.shape
    max_abs = int(np.abs(arr).max()) if arr.size else 0
    if _batch_safe_int64(min(R, C), max_abs):
        M = arr.astype(np.int64, copy=True)
    else:
        M = arr.astype(object, copy=True)
    rank = np.zeros(B, dtype=np.int64)
    prev = np.ones(B, dtype=M.dtype)
    sign = np.ones(B, dtype=np.int64)
    rowidx = np.arange(R)
    bidx = np.arange(B)
    for c in range(C):
        if R == 0:
            break
        r = np.minimum(rank, R - 1)
        valid = rank < R
        cand = (M[:, :, c] != 0) & (rowidx[None, :] >= rank[:, None])
        has = cand.any(axis=1) & valid
        if not has.any():
            continue
        p = cand.argmax(axis=1)
        sw = np.nonzero(has & (p != r))[0]
        if sw.size:
            tmp = M[sw, p[sw], :].copy()
            M[sw, p[sw], :] = M[sw, r[sw], :]
            M[sw, r[sw], :] = tmp
            sign[sw] *= -1
        piv = np.where(has, M[bidx, r, c], 1)
        pivrow = np.where(has[:, None], M[bidx, r, :], 0)
        div = np.where(has, prev, 1)
        colc = M[:, :, c]
        below = (rowidx[None, :] > r[:, None]) & has[:, None]
        new = (piv[:, None, None] * M - colc[:, :, None] * pivrow[:, None, :]) // div[:, None, None]
        M = np.where(below[:, :, None], new, M)
        prev = np.where(has, piv, prev)
        rank = rank + has
    dets = None
    if R == C:
        if R == 0:
            dets = np.ones(B, dtype=np.int64)
        else:
            full = rank == R
            last = M[:, R - 1, R - 1]
            dets = np.where(full, sign * last, 0)
    return rank, dets
