"""Exact laws and concentration of linear random walks ``S = sum a_i x_i``.

Steps are either Rademacher signs or lazy signs (``+-1`` with probability
mu/2 each, ``0`` otherwise).  Everything is computed with integer weights
over a common denominator, then returned as Fractions.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import budget as _budget
from .errors import InputError
from .gap import Gap, is_proper
from .numeric import common_denominator, parse_rational


@dataclass(frozen=True)
class StepLaw:
    """Law of a single step: ``bernoulli`` or ``lazy`` with parameter mu."""

    kind: str = "bernoulli"
    mu: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in ("bernoulli", "lazy"):
            raise InputError(f"unknown step law {self.kind!r}")
        mu = Fraction(self.mu)
        if self.kind == "bernoulli":
            mu = Fraction(1)
        if not (0 < mu <= 1):
            raise InputError("mu must lie in (0, 1]")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def lazy(cls, mu) -> "StepLaw":
        return cls("lazy", parse_rational(mu) if isinstance(mu, str) else Fraction(mu))

    @property
    def weights(self) -> tuple[int, int, int]:
        """Integer weights of (-1, 0, +1) over :attr:`denominator`.

        ``lazy(1)`` collapses to the Rademacher weights so the two laws are
        identical, not merely equal in distribution.
        """
        if self.mu == 1:
            return (1, 0, 1)
        p, q = self.mu.numerator, self.mu.denominator
        return (p, 2 * (q - p), p)

    @property
    def denominator(self) -> int:
        return sum(self.weights)

    def outcomes(self) -> tuple[tuple[int, int], ...]:
        """(value, weight) pairs with positive weight."""
        return tuple((v, w) for v, w in zip((-1, 0, 1), self.weights) if w)


BERNOULLI = StepLaw()


class DistTable(dict):
    """Exact finite law: value -> probability, probabilities summing to 1."""

    def total(self) -> Fraction:
        return sum(self.values(), Fraction(0))

    def support(self) -> list[Fraction]:
        return sorted(self)


def as_multiset(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(parse_rational(v) if isinstance(v, str) else Fraction(v) for v in values)


def read_multiset(path: str | Path) -> tuple[Fraction, ...]:
    """One rational per line; ``#`` starts a comment; blank lines ignored."""
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse_rational(line))
        except InputError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    return tuple(out)


def _integer_walk_counts(ints: Sequence[int], law: StepLaw, limit: int) -> Counter:
    """Convolution DP; returns value -> integer weight over denominator**n."""
    steps = law.outcomes()
    span = sum(abs(a) for a in ints)
    if span < 2**62 and law.denominator ** len(ints) < 2**62:
        return _numpy_walk_counts(ints, steps, limit)
    table = Counter({0: 1})
    for a in ints:
        nxt: Counter = Counter()
        for s, w in table.items():
            for sign, ws in steps:
                nxt[s + sign * a] += w * ws
        if len(nxt) > limit:
            _budget.check("walk_support", len(nxt), limit)
        table = nxt
    return table


def _numpy_walk_counts(ints, steps, limit) -> Counter:
    vals = np.zeros(1, dtype=np.int64)
    wts = np.ones(1, dtype=np.int64)
    for a in ints:
        if a == 0:
            wts = wts * sum(ws for _, ws in steps)
            continue
        cand_v = np.concatenate([vals + sign * a for sign, _ in steps])
        cand_w = np.concatenate([wts * ws for _, ws in steps])
        vals, inv = np.unique(cand_v, return_inverse=True)
        if vals.size > limit:
            _budget.check("walk_support", int(vals.size), limit)
        wts = np.zeros(vals.size, dtype=np.int64)
        np.add.at(wts, inv.reshape(-1), cand_w)
    return Counter(dict(zip(vals.tolist(), wts.tolist())))


def walk_counts(a: Sequence, law: StepLaw = BERNOULLI, budget: int | None = None) -> tuple[Counter, int, int]:
    """Integer form of the walk law: (counts over scaled ints, scale, total weight)."""
    a = as_multiset(a)
    d = common_denominator(a)
    limit = _budget.resolve("walk_support", budget)
    counts = _integer_walk_counts([int(x * d) for x in a], law, limit)
    return counts, d, law.denominator ** len(a)


def walk_distribution(a: Sequence, law: StepLaw = BERNOULLI, budget: int | None = None) -> DistTable:
    counts, d, total = walk_counts(a, law, budget)
    return DistTable({Fraction(v, d): Fraction(c, total) for v, c in sorted(counts.items())})


def _max_atom(counts: dict, total: int, scale: int = 1) -> tuple[Fraction, Fraction]:
    best = max(counts.values())
    arg = min(v for v, c in counts.items() if c == best)
    return Fraction(best, total), Fraction(arg, scale)


def rho_linear(a: Sequence, law: StepLaw = BERNOULLI, budget: int | None = None) -> tuple[Fraction, Fraction]:
    """Largest point mass of the walk and the least value attaining it."""
    counts, d, total = walk_counts(a, law, budget)
    return _max_atom(counts, total, d)


def erdos_bound(n: int) -> Fraction:
    """``C(n, floor(n/2)) / 2**n``."""
    if n < 1:
        raise InputError("erdos_bound needs n >= 1")
    return Fraction(comb(n, n // 2), 2**n)


def halasz_Rl(a: Sequence, l: int, budget: int | None = None) -> int:
    """Ordered solutions of ``a_i1 + ... + a_il = a_j1 + ... + a_jl``.

    Indices range over [n] independently on both sides.  Counted as the sum
    of squared multiplicities of the l-fold ordered sums.
    """
    a = as_multiset(a)
    if l < 1:
        raise InputError("l must be a positive integer")
    _budget.check("halasz_tuples", len(a) ** (2 * l), budget)
    d = common_denominator(a)
    base = Counter(int(x * d) for x in a)
    sums = Counter({0: 1})
    for _ in range(l):
        nxt: Counter = Counter()
        for s, c in sums.items():
            for v, m in base.items():
                nxt[s + v] += c * m
        sums = nxt
    return sum(c * c for c in sums.values())


def stanley_set(n: int, printed: bool = False) -> tuple[Fraction, ...]:
    """The extremal set for distinct steps: n consecutive integers around 0.

    That is ``{-floor(n/2), ..., ceil(n/2) - 1}``.  For odd n this is the
    symmetric set ``{-floor(n/2), ..., floor(n/2)}``.  For even n the
    symmetric set has n + 1 elements and is beaten from n = 8 on (n = 8:
    7/64 for ``-4..3`` against 13/128); ``printed=True`` returns it anyway.
    """
    h = n // 2
    stop = h + 1 if printed else n - h
    return tuple(Fraction(k) for k in range(-h, stop))


def stanley_reference(n: int, law: StepLaw = BERNOULLI, printed: bool = False) -> Fraction:
    if n < 1:
        raise InputError("stanley_reference needs n >= 1")
    return rho_linear(stanley_set(n, printed), law)[0]


def pigeonhole_lower_bound(g: Gap, n: int) -> Fraction:
    """``1 / (n**r * N)`` for a proper symmetric GAP of rank r and volume N."""
    if not g.is_symmetric:
        raise InputError("pigeonhole bound needs a symmetric GAP")
    proper, _ = is_proper(g)
    if not proper:
        raise InputError("pigeonhole bound needs a proper GAP")
    if n < 1:
        raise InputError("n must be positive")
    return Fraction(1, n**g.rank * g.volume)


def small_ball_linear(a: Sequence, radius, law: StepLaw = BERNOULLI, budget: int | None = None) -> Fraction:
    """``sup_x P(|S - x| <= radius)`` by a sliding window over the support."""
    radius = Fraction(radius)
    if radius < 0:
        raise InputError("radius must be non-negative")
    counts, d, total = walk_counts(a, law, budget)
    vals = sorted(counts)
    width = 2 * radius * d
    best = 0
    acc = 0
    j = 0
    # window [vals[i], vals[i] + 2r]; the optimum can be left-aligned to an atom
    for i, lo in enumerate(vals):
        while j < len(vals) and vals[j] - lo <= width:
            acc += counts[vals[j]]
            j += 1
        best = max(best, acc)
        acc -= counts[lo]
    return Fraction(best, total)
