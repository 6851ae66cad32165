"""Random symmetric sign matrices: singularity, rank growth, cofactors.

Randomness is numpy's PCG64.  Worker ``i`` of an :class:`RngSpec` draws
from ``SeedSequence(base_seed, spawn_key=(i,))`` and handles a contiguous
share of the trials (the first ``trials % workers`` workers take one
extra).  Counts are summed in worker order, so results depend only on
``(base_seed, worker_count, trials)``.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, isqrt
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from . import budget as _budget
from .errors import DimensionError, InputError
from .numeric import as_matrix, bareiss_det, batch_rank_det, integer_kernel, rank_exact

MC_CHUNK = 20_000


@dataclass(frozen=True)
class RngSpec:
    base_seed: int
    worker_count: int = 1

    def __post_init__(self):
        if self.worker_count < 1:
            raise InputError("worker_count must be >= 1")

    def generator(self, worker: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.base_seed, spawn_key=(worker,))
        return np.random.Generator(np.random.PCG64(ss))

    def shares(self, trials: int) -> list[int]:
        q, r = divmod(trials, self.worker_count)
        return [q + (i < r) for i in range(self.worker_count)]


def run_workers(spec: RngSpec, trials: int, job: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    """Run ``job(rng, share)`` per worker and sum the returned count vectors."""
    shares = spec.shares(trials)
    tasks = [(spec.generator(i), s) for i, s in enumerate(shares)]
    if spec.worker_count == 1:
        parts = [job(*tasks[0])]
    else:
        with ThreadPoolExecutor(max_workers=spec.worker_count) as ex:
            parts = list(ex.map(lambda t: job(*t), tasks))
    return np.sum(parts, axis=0)


def _upper_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n)


def symmetric_from_upper(bits: np.ndarray, n: int) -> np.ndarray:
    """(B, n(n+1)/2) array of +-1 upper-triangle entries -> (B, n, n) matrices."""
    iu, ju = _upper_index(n)
    out = np.empty((bits.shape[0], n, n), dtype=np.int64)
    out[:, iu, ju] = bits
    out[:, ju, iu] = bits
    return out


def sample_symmetric_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    bits = rng.integers(0, 2, size=(size, n * (n + 1) // 2), dtype=np.int64) * 2 - 1
    return symmetric_from_upper(bits, n)


def sample_symmetric(n: int, rng: np.random.Generator) -> tuple[tuple[int, ...], ...]:
    """One symmetric matrix with iid uniform +-1 upper triangle (diagonal included)."""
    if n < 1:
        raise InputError("n must be >= 1")
    m = sample_symmetric_batch(n, 1, rng)[0]
    return tuple(tuple(int(v) for v in row) for row in m)


# -- singularity probability --------------------------------------------------


@dataclass(frozen=True)
class QnEstimate:
    n: int
    mode: str
    singular_count: int
    total: int
    q_hat: Fraction
    wilson_95_low: Fraction | None = None
    wilson_95_high: Fraction | None = None
    seed: int | None = None
    workers: int | None = None

    def record(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "singular_count": self.singular_count,
            "total": self.total,
            "q_hat": str(self.q_hat),
            "ci_low": None if self.wilson_95_low is None else str(self.wilson_95_low),
            "ci_high": None if self.wilson_95_high is None else str(self.wilson_95_high),
            "seed": self.seed,
            "trials": self.total if self.mode == "montecarlo" else None,
        }


def qn_exact(n: int, budget: int | None = None) -> QnEstimate:
    """Exact q_n by enumerating every symmetric sign matrix."""
    if n < 1:
        raise InputError("n must be >= 1")
    k = n * (n + 1) // 2
    total = 2**k
    _budget.check("qn_exact_matrices", total, budget)
    singular = 0
    chunk = 1 << 16
    shifts = np.arange(k, dtype=np.int64)
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        bits = ((idx[:, None] >> shifts[None, :]) & 1) * 2 - 1
        _, dets = batch_rank_det(symmetric_from_upper(bits, n))
        singular += int(np.count_nonzero(dets == 0))
    return QnEstimate(n, "exact", singular, total, Fraction(singular, total))


_Z95 = Fraction(NormalDist().inv_cdf(0.975))


def _sqrt_bounds(x: Fraction, digits: int = 18) -> tuple[Fraction, Fraction]:
    scale = 10**digits
    s = isqrt(x.numerator * scale * scale // x.denominator)
    return Fraction(s, scale), Fraction(s + 1, scale)


def wilson_interval(successes: int, trials: int, z: Fraction = _Z95) -> tuple[Fraction, Fraction]:
    """Wilson score interval, with the square root rounded outward."""
    if trials < 1:
        raise InputError("trials must be >= 1")
    p = Fraction(successes, trials)
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    _, rad_hi = _sqrt_bounds(p * (1 - p) / trials + z2 / (4 * trials * trials))
    low = centre - z * rad_hi / denom
    high = centre + z * rad_hi / denom
    # snap outward to a 1e-12 grid so the endpoints stay short
    g = 10**12
    low = Fraction(floor(low * g), g)
    high = Fraction(ceil(high * g), g)
    return max(Fraction(0), low), min(Fraction(1), high)


def _singular_job(n: int):
    def job(rng: np.random.Generator, share: int) -> np.ndarray:
        singular = 0
        done = 0
        while done < share:
            size = min(MC_CHUNK, share - done)
            _, dets = batch_rank_det(sample_symmetric_batch(n, size, rng))
            singular += int(np.count_nonzero(dets == 0))
            done += size
        return np.array([singular], dtype=np.int64)

    return job


def qn_montecarlo(n: int, trials: int, rng: RngSpec) -> QnEstimate:
    """Monte Carlo q_n with a Wilson 95% interval."""
    if n < 1:
        raise InputError("n must be >= 1")
    if trials < 1:
        raise InputError("trials must be >= 1")
    singular = int(run_workers(rng, trials, _singular_job(n))[0])
    lo, hi = wilson_interval(singular, trials)
    return QnEstimate(n, "montecarlo", singular, trials, Fraction(singular, trials), lo, hi, rng.base_seed, rng.worker_count)


def two_rows_curve(n: int) -> Fraction:
    """``n**2 * 2**(1-n)``, the order of the two-equal-rows lower bound."""
    return Fraction(n * n, 2 ** (n - 1))


def conjecture_curve(n: int) -> Fraction:
    return Fraction(1, 2**n)


# -- Odlyzko -------------------------------------------------------------------


def odlyzko_count(rows: Sequence[Sequence[int]], n: int | None = None, budget: int | None = None) -> int:
    """Number of sign vectors in {-1,1}^n lying in the rational span of ``rows``.

    A vector lies in the span iff it is orthogonal to an integer basis of
    the orthogonal complement.  The 2^n candidates are split into two
    halves and matched on their partial dot products (meet in the middle).
    """
    rows = [tuple(int(v) for v in r) for r in rows]
    if n is None:
        if not rows:
            raise InputError("n is required when no rows are given")
        n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise DimensionError("all rows must have length n")
    if any(v not in (-1, 1) for r in rows for v in r):
        raise InputError("rows must be +-1 vectors")
    _budget.check("odlyzko_vectors", 2**n, budget)
    if not rows:
        return 0
    comp = integer_kernel(rows)  # vectors k with rows . k = 0
    if not comp:
        return 2**n
    K = np.array(comp, dtype=object if max(abs(v) for c in comp for v in c) * n >= 2**62 else np.int64)
    h = n // 2

    def half(lo: int, hi: int) -> np.ndarray:
        width = hi - lo
        idx = np.arange(2**width, dtype=np.int64)
        signs = ((idx[:, None] >> np.arange(width)[None, :]) & 1) * 2 - 1
        return signs.astype(K.dtype) @ K[:, lo:hi].T

    left = half(0, h)
    right = half(h, n)
    tally: dict = {}
    for row in map(tuple, left.tolist()):
        tally[row] = tally.get(row, 0) + 1
    return sum(tally.get(tuple(-v for v in row), 0) for row in right.tolist())


# -- rank increase -------------------------------------------------------------


@dataclass(frozen=True)
class RankIncreaseResult:
    n: int
    k: int
    trials: int
    jumps: int
    frequency: Fraction
    bound: Fraction
    candidates_drawn: int


def rank_increase_experiment(
    n: int, k: int, trials: int, rng: RngSpec, retry_budget: int = 10**5
) -> RankIncreaseResult:
    """Frequency of ``rank(M_{n+1}) = k + 2`` given ``rank(M_n) = k``.

    Seeds ``M_n`` are rejection-sampled from the uniform symmetric sign
    matrices, which is exactly the conditional law.  Each conditioned trial
    may consume up to ``retry_budget`` candidates.  ``M_n`` is then bordered
    by a fresh random first row and column.
    """
    if not 1 <= k <= n - 2:
        raise InputError(f"need 1 <= k <= n-2, got n={n}, k={k}")
    if trials < 1:
        raise InputError("trials must be >= 1")

    def job(gen: np.random.Generator, share: int) -> np.ndarray:
        jumps = drawn = got = 0
        cap = share * retry_budget
        while got < share:
            if drawn >= cap:
                raise InputError(f"could not draw {share} rank-{k} seeds within {cap} candidates")
            size = min(MC_CHUNK, cap - drawn)
            cand = sample_symmetric_batch(n, size, gen)
            drawn += size
            ranks, _ = batch_rank_det(cand)
            seeds = cand[ranks == k][: share - got]
            if seeds.shape[0] == 0:
                continue
            b = seeds.shape[0]
            border = gen.integers(0, 2, size=(b, n + 1), dtype=np.int64) * 2 - 1
            big = np.empty((b, n + 1, n + 1), dtype=np.int64)
            big[:, 1:, 1:] = seeds
            big[:, 0, :] = border
            big[:, :, 0] = border
            new_ranks, _ = batch_rank_det(big)
            jumps += int(np.count_nonzero(new_ranks == k + 2))
            got += b
        return np.array([jumps, drawn], dtype=np.int64)

    jumps, drawn = (int(v) for v in run_workers(rng, trials, job))
    return RankIncreaseResult(n, k, trials, jumps, Fraction(jumps, trials), 1 - Fraction(1, 2 ** (n - k)), drawn)


# -- cofactors and kernels -----------------------------------------------------


def _minor(m, i: int, j: int):
    return [row[:j] + row[j + 1:] for r, row in enumerate(m) if r != i]


def cofactor_matrix(m) -> tuple[tuple[int, ...], ...]:
    """Signed cofactors ``(-1)**(i+j) det(m without row i, column j)``."""
    a = [list(r) for r in as_matrix(m, integer=True)]
    n = len(a)
    if any(len(r) != n for r in a):
        raise DimensionError("cofactor matrix needs a square input")
    return tuple(tuple((-1) ** (i + j) * bareiss_det(_minor(a, i, j)) for j in range(n)) for i in range(n))


def border(m, corner: int, x: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """``[[corner, x^T], [x, m]]``."""
    x = [int(v) for v in x]
    rows = [(int(corner), *x)]
    rows += [(x[i], *(int(v) for v in row)) for i, row in enumerate(m)]
    return tuple(rows)


def bordered_det_identity(m, corner: int, x: Sequence[int], cof=None) -> tuple[int, int]:
    """Both sides of ``det([[c, x^T],[x, M]]) = c det(M) - sum_ij C_ij x_i x_j``.

    C is the signed cofactor matrix of M.  Returns (direct det, expansion).
    """
    cof = cofactor_matrix(m) if cof is None else cof
    n = len(cof)
    expansion = int(corner) * bareiss_det(m) - sum(cof[i][j] * x[i] * x[j] for i in range(n) for j in range(n))
    return bareiss_det(border(m, corner, x)), expansion


def rank1_factor(c) -> tuple[Fraction, ...] | None:
    """Rational ``a`` with ``c_ij = a_i a_j`` (first nonzero a_i positive), or None."""
    m = as_matrix(c)
    n = len(m)
    if any(len(r) != n for r in m):
        raise DimensionError("rank1_factor needs a square matrix")
    if n and rank_exact(m) > 1:
        return None
    piv = next((i for i in range(n) if m[i][i] != 0), None)
    if piv is None:
        if any(v != 0 for row in m for v in row):
            return None
        return tuple(Fraction(0) for _ in range(n))
    d = m[piv][piv]
    if d < 0:
        return None
    num, den = isqrt(d.numerator), isqrt(d.denominator)
    if num * num != d.numerator or den * den != d.denominator:
        return None
    root = Fraction(num, den)
    a = tuple(m[piv][j] / root for j in range(n))
    if any(a[i] * a[j] != m[i][j] for i in range(n) for j in range(n)):
        return None
    return a


def principal_removal_index(m) -> int:
    """First i whose row/column removal leaves rank >= n - 2, for rank n - 1 input."""
    a = [list(r) for r in as_matrix(m, integer=True)]
    n = len(a)
    if rank_exact(a) != n - 1:
        raise InputError("expected a matrix of rank n - 1")
    for i in range(n):
        sub = [row[:i] + row[i + 1:] for r, row in enumerate(a) if r != i]
        if rank_exact(sub) >= n - 2:
            return i
    raise AssertionError("unreachable for rank n - 1 input")  # pragma: no cover


@dataclass(frozen=True)
class KernelHeight:
    vector: tuple[Fraction, ...]
    max_num: int
    max_den: int
    hadamard_bound: int


def kernel_height_check(m) -> KernelHeight:
    """One kernel vector normalised to have an entry equal to 1, with heights.

    ``hadamard_bound`` is ``floor(n**(n/2))``; for a +-1 matrix every minor,
    and so every height here, is at most that.
    """
    a = as_matrix(m, integer=True)
    n = len(a)
    if any(len(r) != n for r in a):
        raise DimensionError("kernel_height_check needs a square matrix")
    if any(v not in (-1, 1) for row in a for v in row):
        raise InputError("entries must be +-1")
    ker = integer_kernel(a)
    if not ker:
        raise InputError("matrix is nonsingular")
    v = ker[0]
    pivot = next(x for x in v if x != 0)
    vec = tuple(Fraction(x, pivot) for x in v)
    return KernelHeight(
        vec,
        max(abs(f.numerator) for f in vec),
        max(f.denominator for f in vec),
        isqrt(n**n),
    )


def symmetric_sign_matrices(n: int):
    """Every n x n symmetric +-1 matrix, as tuples (2**(n(n+1)/2) of them)."""
    idx = list(zip(*np.triu_indices(n)))
    for bits in itertools.product((1, -1), repeat=len(idx)):
        m = [[0] * n for _ in range(n)]
        for (i, j), b in zip(idx, bits):
            m[i][j] = m[j][i] = b
        yield tuple(tuple(r) for r in m)
