"""Bilinear and quadratic concentration, decoupling, planted instances.

Matrices are tuples of tuples of Fractions.  The forms are

* bilinear  ``sum_{i,j} a_ij x_i y_j`` with x, y independent,
* quadratic ``sum_{i,j} a_ij x_i x_j`` over all ordered pairs, diagonal
  included (``x_i**2`` is 1 for signs, so the diagonal shifts the value).

Exact results come from enumerating x outcomes in numpy and grouping them;
the y side of the bilinear form is convolved, not enumerated.
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import budget as _budget
from .errors import DimensionError, InputError
from .gap import Gap, is_proper, membership
from .linear import BERNOULLI, StepLaw, _integer_walk_counts, _max_atom
from .numeric import as_matrix, common_denominator, parse_rational

Matrix = tuple  # tuple[tuple[Fraction, ...], ...]


# -- matrix plumbing ----------------------------------------------------------


def as_square(rows) -> Matrix:
    m = as_matrix(rows)
    if any(len(r) != len(m) for r in m):
        raise DimensionError(f"expected a square matrix, got {len(m)} rows of width {len(m[0]) if m else 0}")
    return m


def as_symmetric(rows) -> Matrix:
    m = as_square(rows)
    n = len(m)
    for i in range(n):
        for j in range(i + 1, n):
            if m[i][j] != m[j][i]:
                raise InputError(f"matrix is not symmetric at ({i}, {j}): {m[i][j]} != {m[j][i]}")
    return m


def read_rows(path: str | Path) -> Matrix:
    """Whitespace-separated rationals, one row per line, ``#`` comments."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([parse_rational(tok) for tok in line.split()])
        except InputError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    return as_matrix(rows)


def read_matrix(path: str | Path, symmetric: bool = False) -> Matrix:
    rows = read_rows(path)
    return as_symmetric(rows) if symmetric else as_square(rows)


def format_matrix(m: Matrix) -> str:
    return "".join(" ".join(str(v) for v in row) + "\n" for row in m)


def zero_matrix(n: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))


def _scaled_int(m: Matrix) -> tuple[np.ndarray, int]:
    d = common_denominator(v for row in m for v in row)
    ints = [[int(v * d) for v in row] for row in m]
    bound = sum(abs(v) for row in ints for v in row)
    dtype = np.int64 if bound < 2**62 else object
    return np.array(ints, dtype=dtype).reshape(len(m), len(m)), d


def law_outcomes(n: int, law: StepLaw, start: int = 0, stop: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sign outcomes in lexicographic order, with their zero counts.

    Returns ``(X, zeros)`` for outcome indices ``start:stop``.
    """
    steps = np.array([v for v, _ in law.outcomes()], dtype=np.int64)
    base = len(steps)
    total = base**n
    stop = total if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    X = np.empty((idx.size, n), dtype=np.int64)
    for i in range(n):
        X[:, i] = steps[(idx // base ** (n - 1 - i)) % base]
    return X, (X == 0).sum(axis=1)


def _outcome_weight(law: StepLaw, n: int, zeros: int) -> int:
    wm, w0, _ = law.weights
    return wm ** (n - zeros) * w0**zeros


def _group_rows(table: np.ndarray):
    """(row, multiplicity) pairs for the distinct rows of a 2-D array."""
    if table.dtype == object:
        return sorted(Counter(map(tuple, table.tolist())).items())
    uniq, counts = np.unique(table, axis=0, return_counts=True)
    return list(zip(uniq.tolist(), counts.tolist()))


# -- bilinear -------------------------------------------------------------------


def _bilinear_chunk(A: np.ndarray, law: StepLaw, start: int, stop: int) -> Counter:
    n = A.shape[0]
    X, zeros = law_outcomes(n, law, start, stop)
    C = X.astype(A.dtype) @ A  # row i: coefficients of y for outcome i
    keys = np.sort(np.abs(C), axis=1)
    table = np.concatenate([keys, zeros[:, None].astype(keys.dtype)], axis=1)
    out: Counter = Counter()
    limit = _budget.resolve("walk_support")
    for row, cnt in _group_rows(table):
        coeffs = [int(v) for v in row[:-1]]
        xw = int(cnt) * _outcome_weight(law, n, int(row[-1]))
        for v, c in _integer_walk_counts(coeffs, law, limit).items():
            out[v] += xw * c
    return out


def bilinear_counts(a, law: StepLaw = BERNOULLI, budget: int | None = None, workers: int = 1) -> tuple[Counter, int, int]:
    """Integer law of the bilinear form: (counts, value scale, total weight).

    The x outcome range is split into ``workers`` contiguous chunks; partial
    tables are summed, so the result does not depend on ``workers``.
    """
    m = as_square(a)
    n = len(m)
    base = len(law.outcomes())
    _budget.check("bilinear_outcomes", base**n, budget)
    A, d = _scaled_int(m)
    total_x = base**n
    workers = max(1, int(workers))
    cuts = [total_x * k // workers for k in range(workers + 1)]
    spans = [(cuts[k], cuts[k + 1]) for k in range(workers) if cuts[k] < cuts[k + 1]]
    if workers == 1 or len(spans) == 1:
        parts = [_bilinear_chunk(A, law, lo, hi) for lo, hi in spans]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_bilinear_chunk, *zip(*[(A, law, lo, hi) for lo, hi in spans])))
    counts: Counter = Counter()
    for p in parts:
        counts.update(p)
    return counts, d, law.denominator ** (2 * n)


def rho_bilinear(a, law: StepLaw = BERNOULLI, budget: int | None = None, workers: int = 1) -> tuple[Fraction, Fraction]:
    """``sup_v P(sum a_ij x_i y_j = v)`` and the least maximising value."""
    counts, d, total = bilinear_counts(a, law, budget, workers)
    return _max_atom(counts, total, d)


def bilinear_distribution(a, law: StepLaw = BERNOULLI, budget: int | None = None) -> dict:
    counts, d, total = bilinear_counts(a, law, budget)
    return {Fraction(v, d): Fraction(c, total) for v, c in sorted(counts.items())}


# -- quadratic ----------------------------------------------------------------


def quadratic_counts(a, law: StepLaw = BERNOULLI, budget: int | None = None) -> tuple[Counter, int, int]:
    m = as_symmetric(a)
    n = len(m)
    base = len(law.outcomes())
    total_x = base**n
    _budget.check("quadratic_outcomes", total_x, budget)
    A, d = _scaled_int(m)
    counts: Counter = Counter()
    chunk = 1 << 18
    for lo in range(0, total_x, chunk):
        X, zeros = law_outcomes(n, law, lo, min(total_x, lo + chunk))
        Xa = X.astype(A.dtype)
        vals = np.einsum("ki,ki->k", Xa @ A, Xa) if n else np.zeros(X.shape[0], dtype=np.int64)
        table = np.stack([vals, zeros.astype(vals.dtype)], axis=1)
        for (v, z), c in _group_rows(table):
            counts[int(v)] += c * _outcome_weight(law, n, int(z))
    return counts, d, law.denominator**n


def rho_quadratic(a, law: StepLaw = BERNOULLI, budget: int | None = None) -> tuple[Fraction, Fraction]:
    """``sup_v P(sum a_ij x_i x_j = v)`` and the least maximising value."""
    counts, d, total = quadratic_counts(a, law, budget)
    return _max_atom(counts, total, d)


def quadratic_distribution(a, law: StepLaw = BERNOULLI, budget: int | None = None) -> dict:
    counts, d, total = quadratic_counts(a, law, budget)
    return {Fraction(v, d): Fraction(c, total) for v, c in sorted(counts.items())}


# -- decoupling ---------------------------------------------------------------


def a_u_submatrix(a, u) -> Matrix:
    """Keep ``a_ij`` when exactly one of i, j lies in ``u`` (0-based), else 0."""
    m = as_square(a)
    n = len(m)
    u = set(int(i) for i in u)
    bad = [i for i in u if not 0 <= i < n]
    if bad:
        raise InputError(f"indices out of range for n={n}: {sorted(bad)}")
    return tuple(
        tuple(m[i][j] if ((i in u) != (j in u)) else Fraction(0) for j in range(n)) for i in range(n)
    )


HALF_LAZY = StepLaw.lazy(Fraction(1, 2))


def _bilinear_zero_weight(A: np.ndarray, X: np.ndarray, wx: np.ndarray) -> int:
    """Weight of ``x^T A y = 0``; x and y both range over the rows of X."""
    C = X @ A
    hits = 0
    step = max(1, 4_000_000 // max(1, X.shape[0]))
    for lo in range(0, X.shape[0], step):
        vals = C @ X[lo:lo + step].T  # (Kx, chunk)
        hits += int(wx @ (vals == 0).astype(np.int64) @ wx[lo:lo + step])
    return hits


@dataclass(frozen=True)
class DecouplingResult:
    lhs: Fraction
    rhs: Fraction
    holds: bool
    rhs_min: Fraction
    holds_min: bool
    per_u: dict = field(default_factory=dict, compare=False, repr=False)


def decoupling_check(a, budget: int | None = None) -> DecouplingResult:
    """Compare ``rho_q(A)**8`` with the zero probability of the cut forms.

    ``rhs`` averages ``P_{v,w}(sum A_U(ij) v_i w_j = 0)`` over all cuts U
    (v, w iid lazy signs with mu = 1/2); ``rhs_min`` is the smallest value
    over individual cuts.  Both are exact.
    """
    m = as_symmetric(a)
    n = len(m)
    _budget.check("decoupling_cases", 2**n * 3**n, budget)
    lhs = rho_quadratic(m)[0] ** 8
    A, d = _scaled_int(m)
    if A.dtype == object:
        raise InputError("entries too large for exact dense enumeration")
    X, zeros = law_outcomes(n, HALF_LAZY)
    wm, w0, _ = HALF_LAZY.weights
    wx = np.array([wm ** (n - z) * w0**z for z in zeros.tolist()], dtype=np.int64)
    total = HALF_LAZY.denominator ** (2 * n)
    per_u = {}
    full = (1 << n) - 1
    for mask in range(1 << n):
        comp = full ^ mask
        if comp in per_u:
            per_u[mask] = per_u[comp]  # A_U = A_{complement of U}
            continue
        inside = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        cut = inside[:, None] != inside[None, :]
        per_u[mask] = Fraction(_bilinear_zero_weight(np.where(cut, A, 0), X, wx), total)
    rhs = sum(per_u.values(), Fraction(0)) / (1 << n)
    rhs_min = min(per_u.values())
    return DecouplingResult(lhs, rhs, lhs <= rhs, rhs_min, lhs <= rhs_min, per_u)


# -- planted instances ----------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Predicted lower bound for the concentration of a planted matrix.

    ``target`` is set when the bound is for the atom at a specific value
    (the algebraic examples concentrate at 0); otherwise the bound applies
    to the maximal atom.
    """

    kind: str
    bound: Fraction
    target: Fraction | None = None
    detail: str = ""


def joint_zero_probability(vectors: Sequence[Sequence[int]], n: int, law: StepLaw = BERNOULLI) -> Fraction:
    """``P(<k_s, x> = 0 for every s)`` by enumeration of x."""
    vecs = [[int(v) for v in k] for k in vectors]
    if any(len(k) != n for k in vecs):
        raise DimensionError("relation vectors must have length n")
    if not vecs:
        return Fraction(1)
    base = len(law.outcomes())
    _budget.check("quadratic_outcomes", base**n)
    X, zeros = law_outcomes(n, law)
    K = np.array(vecs, dtype=object if max(abs(v) for k in vecs for v in k) * n >= 2**62 else np.int64)
    ok = np.all((X.astype(K.dtype) @ K.T) == 0, axis=1)
    hit = sum(_outcome_weight(law, n, int(z)) for z in zeros[ok].tolist())
    return Fraction(hit, law.denominator**n)


def _gap_entries(gap: Gap, n: int, entries, seed, symmetric: bool) -> list[list[Fraction]]:
    if not gap.is_symmetric or not is_proper(gap)[0]:
        raise InputError("planted entries need a proper symmetric GAP")
    if entries is not None:
        m = as_symmetric(entries) if symmetric else as_square(entries)
        if len(m) != n:
            raise DimensionError(f"entries must be {n}x{n}")
        for row in m:
            for v in row:
                if membership(gap, v) is None:
                    raise InputError(f"entry {v} is not in the GAP")
        return [list(r) for r in m]
    rng = np.random.default_rng(seed)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i if symmetric else 0, n):
            coords = [int(rng.integers(lo, hi + 1)) for lo, hi in zip(gap.lower, gap.upper)]
            out[i][j] = gap.value(coords)
            if symmetric:
                out[j][i] = out[i][j]
    return out


def _pigeonhole_bound(gap: Gap, n: int) -> Fraction:
    return Fraction(1, n ** (2 * gap.rank) * gap.volume)


def _vectors(params: dict, key: str, n: int, integer: bool) -> list[list]:
    raw = params.get(key) or []
    if raw and not isinstance(raw[0], (list, tuple)):
        raw = [raw]
    conv = int if integer else (lambda v: parse_rational(v) if isinstance(v, str) else Fraction(v))
    out = [[conv(v) for v in vec] for vec in raw]
    if any(len(v) != n for v in out):
        raise DimensionError(f"{key} vectors must have length {n}")
    return out


_BILINEAR_KINDS = {"example-4.2": "additive", "example-4.3": "algebraic", "example-4.5": "combined"}
_QUADRATIC_KINDS = {"example-5.2": "additive", "example-5.3": "algebraic", "example-5.4": "combined"}


def plant_bilinear(kind: str, **params) -> tuple[Matrix, Certificate]:
    """Build a structured n x n matrix with a provable concentration bound.

    ``additive``:  entries in a proper symmetric GAP ``gap``; bound
                   ``1 / (n**(2r) |Q|)``.
    ``algebraic``: ``a_ij = k_i b_j + l_j b'_i``; the form vanishes when
                   ``<k,x> = <l,y> = 0``, so
                   ``P(form = 0) >= P(<k,x>=0) P(<l,y>=0)``.
    ``combined``:  GAP part plus ``sum_s k_si b_sj + l_sj b'_si``; bound
                   ``P(Kx=0) P(Ly=0) / (n**(2r) |Q|)``.

    Parameters: ``n``, ``gap``, ``entries`` or ``seed``, ``k``, ``l``, ``b``,
    ``b_prime`` (lists of vectors for the combined kind).
    """
    kind = _BILINEAR_KINDS.get(kind, kind)
    if kind == "additive":
        gap, n = params["gap"], int(params["n"])
        ent = _gap_entries(gap, n, params.get("entries"), params.get("seed"), symmetric=False)
        return as_square(ent), Certificate("bilinear-additive", _pigeonhole_bound(gap, n))
    if kind == "algebraic":
        k = [int(v) for v in params["k"]]
        n = len(k)
        l = _vectors(params, "l", n, True)[0]
        b = _vectors(params, "b", n, False)[0]
        bp = _vectors(params, "b_prime", n, False)[0]
        m = [[k[i] * b[j] + l[j] * bp[i] for j in range(n)] for i in range(n)]
        bound = joint_zero_probability([k], n) * joint_zero_probability([l], n)
        return as_square(m), Certificate("bilinear-algebraic", bound, Fraction(0), "P(<k,x>=0) P(<l,y>=0)")
    if kind == "combined":
        gap, n = params["gap"], int(params["n"])
        base = _gap_entries(gap, n, params.get("entries"), params.get("seed"), symmetric=False)
        K = _vectors(params, "k", n, True)
        B = _vectors(params, "b", n, False)
        L = _vectors(params, "l", n, True)
        Bp = _vectors(params, "b_prime", n, False)
        if len(K) != len(B) or len(L) != len(Bp):
            raise InputError("k/b and l/b_prime must come in pairs")
        m = [
            [
                base[i][j]
                + sum((ks[i] * bs[j] for ks, bs in zip(K, B)), Fraction(0))
                + sum((ls[j] * bps[i] for ls, bps in zip(L, Bp)), Fraction(0))
                for j in range(n)
            ]
            for i in range(n)
        ]
        bound = joint_zero_probability(K, n) * joint_zero_probability(L, n) * _pigeonhole_bound(gap, n)
        return as_square(m), Certificate("bilinear-combined", bound)
    raise InputError(f"unknown bilinear plant kind {kind!r}")


def plant_quadratic(kind: str, **params) -> tuple[Matrix, Certificate]:
    """Symmetric counterparts of :func:`plant_bilinear`.

    ``additive``:  symmetric entries in ``gap``; bound
                  ``1 / (n**(2r) |Q|)``.
    ``algebraic``: ``a_ij = k_i b_j + k_j b_i``, so the form is
                  ``2 <k,x><b,x>``; ``P(form = 0) >= P(<k,x> = 0)``.
    ``combined``:  GAP part plus ``sum_s k_si b_sj + k_sj b_si``;
                  bound ``P(Kx=0) / (n**(2r) |Q|)``.
    """
    kind = _QUADRATIC_KINDS.get(kind, kind)
    if kind == "additive":
        gap, n = params["gap"], int(params["n"])
        ent = _gap_entries(gap, n, params.get("entries"), params.get("seed"), symmetric=True)
        return as_symmetric(ent), Certificate("quadratic-additive", _pigeonhole_bound(gap, n))
    if kind == "algebraic":
        k = [int(v) for v in params["k"]]
        n = len(k)
        b = _vectors(params, "b", n, False)[0]
        m = [[k[i] * b[j] + k[j] * b[i] for j in range(n)] for i in range(n)]
        return as_symmetric(m), Certificate("quadratic-algebraic", joint_zero_probability([k], n), Fraction(0), "P(<k,x>=0)")
    if kind == "combined":
        gap, n = params["gap"], int(params["n"])
        base = _gap_entries(gap, n, params.get("entries"), params.get("seed"), symmetric=True)
        K = _vectors(params, "k", n, True)
        B = _vectors(params, "b", n, False)
        if len(K) != len(B):
            raise InputError("k and b must come in pairs")
        m = [
            [
                base[i][j] + sum((ks[i] * bs[j] + ks[j] * bs[i] for ks, bs in zip(K, B)), Fraction(0))
                for j in range(n)
            ]
            for i in range(n)
        ]
        return as_symmetric(m), Certificate("quadratic-combined", joint_zero_probability(K, n) * _pigeonhole_bound(gap, n))
    raise InputError(f"unknown quadratic plant kind {kind!r}")


def all_ones_table(ns: Sequence[int]) -> list[dict]:
    """Bilinear concentration of the all-ones matrix for each n."""
    rows = []
    for n in ns:
        rho, _ = rho_bilinear([[1] * n for _ in range(n)])
        rows.append({"n": n, "rho_b": rho, "rho_b_squared_n": rho * rho * n})
    return rows
