"""Generalized arithmetic progressions over the rationals.

A GAP is the image of an integer box under ``m -> offset + sum m_i g_i``.
All enumeration is exact and capped; exceeding the cap raises
:class:`~offord.errors.BudgetError` instead of sampling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Iterable, Sequence

import numpy as np

from . import budget as _budget
from .errors import BudgetError, InputError, ProperizationError
from .numeric import common_denominator, integer_kernel, primitive, rank_exact


@dataclass(frozen=True)
class Gap:
    offset: Fraction
    generators: tuple[Fraction, ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "offset", Fraction(self.offset))
        object.__setattr__(self, "generators", tuple(Fraction(g) for g in self.generators))
        object.__setattr__(self, "lower", tuple(int(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(int(x) for x in self.upper))
        if not (len(self.generators) == len(self.lower) == len(self.upper)):
            raise InputError("generators and bounds must have equal length")
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise InputError(f"empty dimension: lower {lo} > upper {hi}")

    @classmethod
    def symmetric(cls, generators: Iterable, bounds: Iterable[int]) -> "Gap":
        bounds = [int(b) for b in bounds]
        if any(b < 0 for b in bounds):
            raise InputError("symmetric bounds must be non-negative")
        return cls(Fraction(0), tuple(generators), tuple(-b for b in bounds), tuple(bounds))

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def volume(self) -> int:
        return prod(hi - lo + 1 for lo, hi in zip(self.lower, self.upper))

    @property
    def is_symmetric(self) -> bool:
        return self.offset == 0 and all(lo == -hi for lo, hi in zip(self.lower, self.upper))

    @property
    def bounds(self) -> tuple[int, ...]:
        """Half-widths M_i of a symmetric GAP."""
        if not self.is_symmetric:
            raise InputError("bounds() needs a symmetric GAP")
        return self.upper

    def value(self, coords: Sequence[int]) -> Fraction:
        return self.offset + sum((m * g for m, g in zip(coords, self.generators)), Fraction(0))

    def to_json(self) -> dict:
        return {
            "offset": str(self.offset),
            "generators": [str(g) for g in self.generators],
            "lower": list(self.lower),
            "upper": list(self.upper),
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> "Gap":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(
                Fraction(str(obj.get("offset", "0"))),
                tuple(Fraction(str(g)) for g in obj["generators"]),
                tuple(obj["lower"]),
                tuple(obj["upper"]),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed GAP record: {exc}") from None


@dataclass(frozen=True)
class GapCoords:
    element: Fraction
    coords: tuple[int, ...]


def _check_cap(g: Gap, cap: int | None) -> None:
    _budget.check("gap_volume", g.volume, cap)


def _scaled(g: Gap) -> tuple[int, int, list[int]]:
    d = common_denominator([g.offset, *g.generators])
    return d, int(g.offset * d), [int(x * d) for x in g.generators]


def _value_grid(offset: int, gens: Sequence[int], lower, upper) -> np.ndarray:
    """All box images in lexicographic coordinate order (last index fastest)."""
    span = sum(abs(x) * max(abs(lo), abs(hi)) for x, lo, hi in zip(gens, lower, upper)) + abs(offset)
    dtype = np.int64 if span < 2**62 else object
    grid = np.full((1,) * len(gens), offset, dtype=dtype)
    for axis, (x, lo, hi) in enumerate(zip(gens, lower, upper)):
        shape = [1] * len(gens)
        shape[axis] = hi - lo + 1
        grid = grid + (np.arange(lo, hi + 1, dtype=np.int64).astype(dtype) * x).reshape(shape)
    return grid.reshape(-1)


def _unravel(g: Gap, flat: int) -> tuple[int, ...]:
    if g.rank == 0:
        return ()
    dims = [hi - lo + 1 for lo, hi in zip(g.lower, g.upper)]
    idx = np.unravel_index(int(flat), dims)
    return tuple(int(i) + lo for i, lo in zip(idx, g.lower))


def elements(g: Gap, cap: int | None = None) -> frozenset[Fraction]:
    """The element set (extensional view) of ``g``."""
    _check_cap(g, cap)
    d, off, gens = _scaled(g)
    vals = _value_grid(off, gens, g.lower, g.upper)
    return frozenset(Fraction(int(v), d) for v in np.unique(vals))


def membership(g: Gap, x, cap: int | None = None) -> GapCoords | None:
    """Coordinates of ``x`` in ``g``, or None.

    For non-proper GAPs the witness is the first one in lexicographic
    coordinate order.
    """
    _check_cap(g, cap)
    x = Fraction(x)
    if g.rank == 0:
        return GapCoords(x, ()) if x == g.offset else None
    d = common_denominator([g.offset, *g.generators, x])
    off = int(g.offset * d)
    gens = [int(v * d) for v in g.generators]
    target = int(x * d)
    # enumerate all but the last coordinate, solve for the last one
    prefix = _value_grid(off, gens[:-1], g.lower[:-1], g.upper[:-1])
    resid = target - prefix
    last, lo, hi = gens[-1], g.lower[-1], g.upper[-1]
    if last == 0:
        ok = resid == 0
        m_last = np.full(resid.shape, lo)
    else:
        ok = resid % last == 0
        m_last = resid // last
        ok &= (m_last >= lo) & (m_last <= hi)
    hits = np.nonzero(ok)[0]
    if hits.size == 0:
        return None
    i = int(hits[0])
    head = _unravel(Gap(0, g.generators[:-1], g.lower[:-1], g.upper[:-1]), i) if g.rank > 1 else ()
    coords = (*head, int(m_last[i]))
    return GapCoords(x, coords)


def is_proper(g: Gap, cap: int | None = None) -> tuple[bool, tuple[tuple[int, ...], tuple[int, ...]] | None]:
    """Whether the coordinate map is injective, plus a collision witness.

    The witness is the pair (earlier, later) for the lexicographically
    first coordinate vector whose value was already produced.
    """
    _check_cap(g, cap)
    if g.rank == 0:
        return True, None
    _, off, gens = _scaled(g)
    vals = _value_grid(off, gens, g.lower, g.upper)
    uniq, first, inverse = np.unique(vals, return_index=True, return_inverse=True)
    if uniq.size == vals.size:
        return True, None
    inverse = np.asarray(inverse).reshape(-1)
    firsts = first[inverse]
    dup = np.nonzero(firsts != np.arange(vals.size))[0]
    j = int(dup[0])
    i = int(firsts[j])
    return False, (_unravel(g, i), _unravel(g, j))


def dilate(g: Gap, n: int) -> Gap:
    """``nP`` for symmetric ``P``: same generators, bounds scaled by ``n``."""
    if not g.is_symmetric:
        raise InputError("dilation is defined for symmetric GAPs")
    if int(n) < 1:
        raise InputError("dilation factor must be a positive integer")
    return Gap.symmetric(g.generators, [int(n) * m for m in g.upper])


def eliminate(g: Gap, relation: Sequence[int], index: int | None = None) -> tuple[Gap, int]:
    """One hyperplane-elimination step.

    Given integer ``relation`` (alpha) and a position with alpha != 0, set
    ``w = g_index / alpha_index`` and replace the other generators by
    ``g_i - alpha_i * w``.  Every point whose coordinates satisfy
    ``alpha . m = 0`` keeps its value with the index coordinate dropped.
    Returns the new GAP and the dropped index.
    """
    alpha = [int(a) for a in relation]
    if len(alpha) != g.rank or not any(alpha):
        raise InputError("relation must be a nonzero vector of length rank")
    if index is None:
        index = _elimination_index(g, alpha)
    if alpha[index] == 0:
        raise InputError("cannot eliminate along a zero relation entry")
    w = g.generators[index] / alpha[index]
    keep = [i for i in range(g.rank) if i != index]
    gens = tuple(g.generators[i] - alpha[i] * w for i in keep)
    return Gap(g.offset, gens, tuple(g.lower[i] for i in keep), tuple(g.upper[i] for i in keep)), index


def _elimination_index(g: Gap, alpha: Sequence[int]) -> int:
    # drop the widest dimension; ties go to the last index
    best = None
    for i, a in enumerate(alpha):
        if a == 0:
            continue
        width = g.upper[i] - g.lower[i]
        if best is None or width >= best[0]:
            best = (width, i)
    return best[1]


def _unimodular_reduce(alpha: Sequence[int]) -> tuple[list[list[int]], list[list[int]], int]:
    """Find unimodular V (with inverse W) such that V @ alpha = +-e_p."""
    r = len(alpha)
    v = list(alpha)
    V = [[int(i == j) for j in range(r)] for i in range(r)]
    W = [[int(i == j) for j in range(r)] for i in range(r)]
    while True:
        nz = [i for i in range(r) if v[i] != 0]
        if len(nz) == 1:
            return V, W, nz[0]
        p = min(nz, key=lambda i: (abs(v[i]), i))
        for j in nz:
            if j == p:
                continue
            q = round(Fraction(v[j], v[p]))
            if q == 0:
                continue
            v[j] -= q * v[p]
            V[j] = [a - q * b for a, b in zip(V[j], V[p])]
            for row in W:
                row[p] += q * row[j]


def _symmetric_container(g: Gap) -> Gap:
    gens = list(g.generators)
    bounds = [max(abs(lo), abs(hi)) for lo, hi in zip(g.lower, g.upper)]
    if g.offset != 0:
        gens.append(g.offset)
        bounds.append(1)
    return Gap.symmetric(gens, bounds)


def _reduce_by_relation(g: Gap, alpha: Sequence[int]) -> Gap:
    """Rank-one-lower symmetric GAP containing every element of symmetric ``g``."""
    V, W, p = _unimodular_reduce(alpha)
    r = g.rank
    M = g.upper
    gens, bounds = [], []
    for j in range(r):
        if j == p:
            continue
        gens.append(sum((W[i][j] * g.generators[i] for i in range(r)), Fraction(0)))
        bounds.append(sum(abs(V[j][i]) * M[i] for i in range(r)))
    return Gap.symmetric(gens, bounds)


def properize(g: Gap, cap: int | None = None) -> tuple[Gap, str]:
    """Heuristic embedding into a proper symmetric GAP.

    Each round takes the collision witness from :func:`is_proper`, turns it
    into a primitive relation among the generators, and changes basis so the
    relation becomes a coordinate axis, which is then dropped.  The whole
    element set is always kept.  Status is ``"proper"`` on success and
    ``"gave-up"`` if the enlarged box would exceed the cap.  Sizes are
    reported, not bounded.  Non-symmetric input is first placed inside a
    symmetric GAP (the offset becomes an extra generator).
    """
    proper, witness = is_proper(g, cap)
    if proper:
        return g, "proper"
    cur = g if g.is_symmetric else _symmetric_container(g)
    for _ in range(cur.rank + 1):
        if cur is not g:
            try:
                proper, witness = is_proper(cur, cap)
            except BudgetError:
                return cur, "gave-up"
            if proper:
                return cur, "proper"
        a, b = witness
        alpha = primitive([x - y for x, y in zip(a, b)])
        cur = _reduce_by_relation(cur, alpha)
    return cur, "gave-up"


def rank_reduce(g: Gap, u: Sequence, cap: int | None = None) -> tuple[Gap, list[GapCoords]]:
    """Shrink a containing GAP until the coordinates of ``u`` span it.

    Repeats: find a primitive integer relation satisfied by all coordinate
    vectors, eliminate one generator along it, and re-properize when the
    result is not proper.  At most ``rank(g)`` rounds.
    """
    if not g.is_symmetric:
        raise InputError("rank_reduce needs a symmetric GAP")
    proper, _ = is_proper(g, cap)
    if not proper:
        raise InputError("rank_reduce needs a proper GAP")
    u = [Fraction(x) for x in u]
    cur = g
    coords = []
    for x in u:
        c = membership(cur, x, cap)
        if c is None:
            raise InputError(f"{x} is not an element of the GAP")
        coords.append(c)
    for _ in range(g.rank + 1):
        r = cur.rank
        mat = [c.coords for c in coords]
        if r == 0 or (mat and rank_exact(mat) == r):
            break
        if mat:
            alpha = integer_kernel(mat)[0]
        else:
            alpha = tuple(int(i == r - 1) for i in range(r))
        nxt, dropped = eliminate(cur, alpha)
        proper, _ = is_proper(nxt, cap)
        if proper:
            cur = nxt
            coords = [GapCoords(c.element, c.coords[:dropped] + c.coords[dropped + 1:]) for c in coords]
            continue
        fixed, status = properize(nxt, cap)
        if status != "proper":
            raise ProperizationError("could not properize after elimination", relation=alpha)
        cur = fixed
        coords = []
        for x in u:
            c = membership(cur, x, cap)
            if c is None:  # pragma: no cover - containment is preserved by construction
                raise ProperizationError("lost an element during properization", relation=alpha)
            coords.append(c)
    return cur, coords
