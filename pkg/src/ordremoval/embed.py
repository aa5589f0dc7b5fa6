"""Order-preserving copy enumeration and counting.

The backtracker assigns pattern vertices left to right.  A pattern vertex
that is the maximum of its edge is only ever placed on a vertex completing
the already-placed prefix to an edge of G, found by bisection in a
prefix index; all other vertices range over an interval.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterator, Mapping, Sequence

from .core import Copy, Edge, HypergraphError, OrderedHypergraph, OrderedMatchingPattern, is_copy

BRUTEFORCE_BOUND = 10**7


class OracleTooLarge(HypergraphError):
    pass


@dataclass(frozen=True)
class CopyCount:
    total: int
    truncated: bool = False

    def __int__(self) -> int:
        return self.total


def _check(G: OrderedHypergraph, H: OrderedMatchingPattern) -> None:
    if G.s != H.s:
        raise HypergraphError(f"uniformity mismatch: host has s={G.s}, pattern has s={H.s}")


def _upper_bounds(n: int, t: int, fixed: Mapping[int, int]) -> list[int]:
    # ub[p]: largest vertex position p may take and still leave room for the rest
    ub = [n - (t - 1 - p) for p in range(t)]
    for q, v in fixed.items():
        ub[q] = min(ub[q], v)
    for p in reversed(range(t - 1)):
        ub[p] = min(ub[p], ub[p + 1] - 1)
    return ub


class _Search:
    """One backtracking search over a host/pattern pair with optional pinned positions."""

    def __init__(self, G, H, fixed: Mapping[int, int] | None = None, first: tuple[int, int] | None = None):
        self.G, self.H = G, H
        self.t = H.t
        self.fixed = dict(fixed or {})
        self.ub = _upper_bounds(G.n, H.t, self.fixed)
        self.first = first
        comp = H.completer
        self.comp = comp
        free_from = self.t
        while free_from > 0 and comp[free_from - 1] is None and (free_from - 1) not in self.fixed:
            free_from -= 1
        self.free_from = free_from

    def _candidates(self, c: list[int], p: int, lo: int):
        hi = self.ub[p]
        if p == 0 and self.first is not None:
            lo, hi = max(lo, self.first[0]), min(hi, self.first[1])
        if lo > hi:
            return ()
        prefix = None if self.comp[p] is None else tuple(c[x - 1] for x in self.comp[p])
        if p in self.fixed:
            v = self.fixed[p]
            if not lo <= v <= hi:
                return ()
            if prefix is not None and prefix + (v,) not in self.G.edges:
                return ()
            return (v,)
        if prefix is not None:
            return self.G.completions(prefix, lo, hi)
        return range(lo, hi + 1)

    def iterate(self) -> Iterator[Copy]:
        if self.t > self.G.n:
            return
        c = [0] * self.t
        last = self.t - 1

        def rec(p: int, lo: int) -> Iterator[Copy]:
            for v in self._candidates(c, p, lo):
                c[p] = v
                if p == last:
                    yield tuple(c)
                else:
                    yield from rec(p + 1, v + 1)

        yield from rec(0, 1)

    def count(self) -> int:
        if self.t > self.G.n:
            return 0
        c = [0] * self.t
        last, free_from, n, t = self.t - 1, self.free_from, self.G.n, self.t
        skip = {v - 1 for v in self.H.isolated} - set(self.fixed)
        if self.first is not None:
            skip.discard(0)

        # Isolated pattern vertices only constrain the order: they are not
        # placed one by one but counted per gap between placed vertices.
        def rec(p: int, prev: int, pending: int) -> int:
            if p >= free_from and not (p == 0 and self.first is not None):
                return math.comb(max(0, n - prev), pending + t - p)
            if p in skip:
                return rec(p + 1, prev, pending + 1)
            cands = self._candidates(c, p, prev + pending + 1)
            if p == last and not pending:
                return len(cands)
            total = 0
            for v in cands:
                c[p] = v
                ways = math.comb(v - prev - 1, pending)
                total += ways if p == last else ways * rec(p + 1, v, 0)
            return total

        return rec(0, 0, 0)


def enumerate_copies(
    G: OrderedHypergraph, H: OrderedMatchingPattern, cap: int | None = None
) -> Iterator[Copy]:
    """Yield every copy of ``H`` in ``G`` once, in lexicographic order of the image tuple."""
    _check(G, H)
    it = _Search(G, H).iterate()
    return it if cap is None else islice(it, cap)


def find_copy(G: OrderedHypergraph, H: OrderedMatchingPattern) -> Copy | None:
    return next(enumerate_copies(G, H, cap=1), None)


def _count_range(G, H, lo: int, hi: int) -> int:
    return _Search(G, H, first=(lo, hi)).count()


def count_copies(
    G: OrderedHypergraph, H: OrderedMatchingPattern, cap: int | None = None, workers: int = 1
) -> CopyCount:
    """Exact number of copies of ``H`` in ``G``.

    With ``cap`` the enumeration stops early and ``truncated`` reports
    whether more than ``cap`` copies exist.  ``workers > 1`` splits the
    search on the image of the first pattern vertex across processes; the
    total does not depend on the split.
    """
    _check(G, H)
    if cap is not None:
        got = sum(1 for _ in islice(_Search(G, H).iterate(), cap + 1))
        return CopyCount(min(got, cap), got > cap)
    if workers <= 1 or H.t > G.n:
        return CopyCount(_Search(G, H).count())
    top = G.n - H.t + 1
    step = -(-top // workers)
    ranges = [(a, min(top, a + step - 1)) for a in range(1, top + 1, step)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_count_range, [G] * len(ranges), [H] * len(ranges),
                              [r[0] for r in ranges], [r[1] for r in ranges]))
    return CopyCount(sum(parts))


def count_copies_bruteforce(
    G: OrderedHypergraph, H: OrderedMatchingPattern, bound: int = BRUTEFORCE_BOUND
) -> CopyCount:
    """Independent oracle: test every ``t``-subset of ``[n]`` with :func:`is_copy`."""
    _check(G, H)
    size = math.comb(G.n, H.t)
    if size > bound:
        raise OracleTooLarge(f"C({G.n},{H.t}) = {size} exceeds oracle bound {bound}")
    return CopyCount(sum(1 for c in combinations(range(1, G.n + 1), H.t) if is_copy(G, H, c)))


def copies_through_edge(G: OrderedHypergraph, H: OrderedMatchingPattern, e: Sequence[int]) -> int:
    """Number of copies whose edge image contains ``e``.

    Pattern edges are disjoint, so a copy maps at most one of them onto
    ``e``; summing the pinned counts over pattern edges counts each copy once.
    """
    _check(G, H)
    e = tuple(sorted(e))
    if e not in G.edges:
        raise HypergraphError(f"edge {list(e)} is not in the host hypergraph")
    total = 0
    for f in H.edges:
        fixed = {x - 1: v for x, v in zip(f, e)}
        total += _Search(G, H, fixed=fixed).count()
    return total


def per_edge_counts(G: OrderedHypergraph, H: OrderedMatchingPattern) -> Counter[Edge]:
    """Copies through each edge, from a single enumeration (edges with zero copies omitted)."""
    counts: Counter[Edge] = Counter()
    for c in enumerate_copies(G, H):
        counts.update(H.image(c))
    return counts
