"""Search for a small proper symmetric GAP covering most of a multiset.

The search is a deterministic heuristic over ranks 0, 1 and 2:

* rank 0: the zeros;
* rank 1: generator = gcd of the retained (integer-scaled) elements;
* rank 2: generator pairs from a pool of retained elements and their
  differences, each element placed at the representation minimising
  ``max(|m1|, |m2|)`` inside a +-64 box.

Retained elements exclude the ``n_prime`` elements farthest from the
median (ties by index).  The smallest-volume candidate wins.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from statistics import median_low
from typing import Sequence

import numpy as np

from .errors import InputError
from .gap import Gap, is_proper, membership
from .linear import as_multiset, rho_linear
from .numeric import common_denominator

POOL_CAP = 500
COORD_CAP = 64
MAX_RANK = 2


@dataclass(frozen=True)
class StructureReport:
    found: bool
    gap: Gap | None
    covered: tuple[int, ...]
    exceptions: tuple[int, ...]
    rho: Fraction
    ilo_size_bound: Fraction | None
    gap_size: int | None

    def record(self) -> dict:
        return {
            "found": self.found,
            "gap": None if self.gap is None else self.gap.to_json(),
            "rank": None if self.gap is None else self.gap.rank,
            "covered": list(self.covered),
            "exceptions": list(self.exceptions),
            "rho": str(self.rho),
            "ilo_size_bound": None if self.ilo_size_bound is None else str(self.ilo_size_bound),
            "gap_size": self.gap_size,
        }


def ilo_size_bound(rho: Fraction, n_prime: int, rank: int, digits: int = 12) -> Fraction:
    """``rho**-1 * n_prime**(-rank/2)``, exact for even rank.

    Odd ranks need a square root, rounded to ``digits`` decimal places.
    ``n_prime = 0`` is treated as 1.
    """
    m = max(1, int(n_prime))
    base = 1 / rho
    if rank % 2 == 0:
        return base / Fraction(m) ** (rank // 2)
    scale = 10**digits
    root = Fraction(isqrt(m * scale * scale), scale)
    return base / (Fraction(m) ** (rank // 2) * root)


def outlier_order(values: Sequence[Fraction]) -> list[int]:
    """Indices sorted by distance from the (low) median, farthest first."""
    if not values:
        return []
    med = median_low(values)
    return sorted(range(len(values)), key=lambda i: (-abs(values[i] - med), i))


def _rank1(ints: list[int], retained: list[int]) -> tuple[int, int] | None:
    g = 0
    for i in retained:
        g = gcd(g, ints[i])
    if g == 0:
        return None
    return g, max(abs(ints[i]) // g for i in retained)


def _rank2(ints: np.ndarray, retained: list[int], n_prime: int, best_volume: int):
    vals = sorted({abs(int(ints[i])) for i in retained} - {0})
    diffs = {abs(int(ints[i]) - int(ints[j])) for a, i in enumerate(retained) for j in retained[a + 1:]}
    pool = sorted((set(vals) | diffs) - {0})
    if len(pool) > POOL_CAP:
        return None
    m2 = np.arange(-COORD_CAP, COORD_CAP + 1, dtype=np.int64)
    best = None
    n = ints.size
    for a, g1 in enumerate(pool):
        for g2 in pool[a + 1:]:
            resid = ints[:, None] - m2[None, :] * g2
            ok = resid % g1 == 0
            m1 = resid // g1
            ok &= np.abs(m1) <= COORD_CAP
            cost = np.where(ok, np.maximum(np.abs(m1), np.abs(m2)[None, :]), COORD_CAP + 1)
            pick = cost.argmin(axis=1)
            hit = ok[np.arange(n), pick]
            if n - int(hit.sum()) > n_prime:
                continue
            c1 = m1[np.arange(n), pick][hit]
            c2 = m2[pick][hit]
            M1, M2 = int(np.abs(c1).max()), int(np.abs(c2).max())
            vol = (2 * M1 + 1) * (2 * M2 + 1)
            if vol >= best_volume or (best is not None and vol >= best[0]):
                continue
            d = gcd(g1, g2)
            # the smallest relation is (g2/d, -g1/d); proper iff it leaves the difference box
            if g2 // d <= 2 * M1 and g1 // d <= 2 * M2:
                continue
            best = (vol, g1, g2, M1, M2)
    return best


def detect_structure(a: Sequence, r_max: int = 2, n_prime: int = 0) -> StructureReport:
    """Find a small proper symmetric GAP containing all but ``n_prime`` elements."""
    a = as_multiset(a)
    n = len(a)
    if n < 1:
        raise InputError("need at least one element")
    if not 0 <= n_prime < n:
        raise InputError("need 0 <= n_prime < n")
    if not 0 <= r_max <= MAX_RANK:
        raise InputError(f"r_max must be between 0 and {MAX_RANK}")
    rho = rho_linear(a)[0]
    d = common_denominator(a)
    ints = [int(x * d) for x in a]
    order = outlier_order(list(a))
    dropped = set(order[:n_prime])
    retained = [i for i in range(n) if i not in dropped]

    candidates: list[Gap] = []
    if sum(1 for v in ints if v == 0) >= n - n_prime:
        candidates.append(Gap.symmetric([], []))
    if r_max >= 1:
        r1 = _rank1(ints, retained)
        if r1 is not None:
            g, M = r1
            candidates.append(Gap.symmetric([Fraction(g, d)], [M]))
    if r_max >= 2:
        best_vol = min((c.volume for c in candidates), default=10**30)
        r2 = _rank2(np.array(ints, dtype=np.int64), retained, n_prime, best_vol) if max(map(abs, ints)) < 2**40 else None
        if r2 is not None:
            _, g1, g2, M1, M2 = r2
            candidates.append(Gap.symmetric([Fraction(g1, d), Fraction(g2, d)], [M1, M2]))

    chosen = None
    for gap in sorted(candidates, key=lambda c: (c.volume, c.rank, c.generators)):
        covered = tuple(i for i in range(n) if membership(gap, a[i]) is not None)
        if n - len(covered) <= n_prime and is_proper(gap)[0]:
            chosen = (gap, covered)
            break
    if chosen is None:
        return StructureReport(False, None, (), tuple(range(n)), rho, None, None)
    gap, covered = chosen
    exceptions = tuple(i for i in range(n) if i not in set(covered))
    return StructureReport(True, gap, covered, exceptions, rho, ilo_size_bound(rho, n_prime, gap.rank), gap.volume)


@dataclass(frozen=True)
class IloComparison:
    gap_size: int
    ilo_size_bound: Fraction
    ratio: Fraction

    def record(self) -> dict:
        return {"gap_size": self.gap_size, "ilo_size_bound": str(self.ilo_size_bound), "ratio": str(self.ratio)}


def validate_against_ilo(report: StructureReport, a: Sequence | None = None) -> IloComparison:
    """Size of the detected GAP against the inverse-theorem scale (report only)."""
    if not report.found:
        raise InputError("no structure was found; nothing to compare")
    if a is not None:
        a = as_multiset(a)
        for i in report.covered:
            if membership(report.gap, a[i]) is None:
                raise InputError(f"element {i} is not in the reported GAP")
    return IloComparison(report.gap_size, report.ilo_size_bound, Fraction(report.gap_size) / report.ilo_size_bound)


def planted_instance(
    generators: Sequence, bounds: Sequence[int], size: int, outliers: Sequence = (), seed: int = 0
) -> tuple[tuple[Fraction, ...], Gap]:
    """``size`` uniform draws from a symmetric GAP followed by ``outliers``."""
    gap = Gap.symmetric(generators, bounds)
    rng = np.random.default_rng(seed)
    vals = [gap.value([int(rng.integers(-m, m + 1)) for m in gap.upper]) for _ in range(size)]
    return tuple(vals) + tuple(Fraction(o) for o in outliers), gap


def ilo_ratio_table(ns: Sequence[int], generator=3, bound: int = 5, seed: int = 0) -> list[dict]:
    """Detector size vs inverse-theorem scale on a planted rank-1 family."""
    rows = []
    for n in ns:
        a, _ = planted_instance([generator], [bound], n, seed=seed + n)
        rep = detect_structure(a, r_max=1, n_prime=1)
        cmp = validate_against_ilo(rep, a)
        rows.append({"n": n, "gap_size": cmp.gap_size, "ilo_size_bound": str(cmp.ilo_size_bound), "ratio": str(cmp.ratio)})
    return rows
