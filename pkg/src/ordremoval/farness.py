"""Edge-deletion distance from H-freeness.

The deletion number is the minimum hitting set of the copy family, where
each copy is identified with the set of its ``m`` edge images.
"""
from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Edge, HypergraphError, OrderedHypergraph, OrderedMatchingPattern, delete_edges
from .embed import enumerate_copies

DEFAULT_BUDGET = 100_000


class Indeterminate(HypergraphError):
    """The farness bounds straddle the requested threshold."""

    def __init__(self, message: str, report: FarnessReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class FarnessReport:
    n: int
    s: int
    lower: int
    upper: int
    exact: bool
    witness: frozenset[Edge] = field(default_factory=frozenset, repr=False)
    nodes: int = 0

    def __post_init__(self):
        assert self.lower <= self.upper, (self.lower, self.upper)
        assert not self.exact or self.lower == self.upper
        assert len(self.witness) == self.upper

    @property
    def epsilon_lower(self) -> Fraction:
        return Fraction(self.lower, self.n**self.s)


def copy_family(G: OrderedHypergraph, H: OrderedMatchingPattern) -> list[tuple[Edge, ...]]:
    """Edge sets of all copies, in lexicographic copy order."""
    return [tuple(H.image(c)) for c in enumerate_copies(G, H)]


def _packing(family, allowed=None) -> int:
    # greedy maximal set of copies pairwise disjoint on allowed edges
    used: set[Edge] = set()
    size = 0
    for edges in family:
        es = edges if allowed is None else [e for e in edges if allowed(e)]
        if not any(e in used for e in es):
            used.update(es)
            size += 1
    return size


def disjoint_packing(G: OrderedHypergraph, H: OrderedMatchingPattern) -> list[tuple[Edge, ...]]:
    """Greedy maximal family of pairwise edge-disjoint copies (lexicographic scan)."""
    used: set[Edge] = set()
    packed = []
    for edges in copy_family(G, H):
        if not any(e in used for e in edges):
            used.update(edges)
            packed.append(edges)
    return packed


def disjoint_packing_lower(G: OrderedHypergraph, H: OrderedMatchingPattern) -> int:
    return len(disjoint_packing(G, H))


def _greedy(family) -> list[Edge]:
    counts: Counter[Edge] = Counter()
    holders: dict[Edge, list[int]] = {}
    for i, edges in enumerate(family):
        for e in edges:
            counts[e] += 1
            holders.setdefault(e, []).append(i)
    alive = [True] * len(family)
    heap = [(-c, e) for e, c in counts.items()]
    heapq.heapify(heap)
    chosen = []
    while heap:
        negc, e = heapq.heappop(heap)
        cur = counts[e]
        if cur == 0:
            continue
        if -negc != cur:
            heapq.heappush(heap, (-cur, e))
            continue
        chosen.append(e)
        for i in holders[e]:
            if alive[i]:
                alive[i] = False
                for f in family[i]:
                    counts[f] -= 1
    return chosen


def greedy_deletion_upper(G: OrderedHypergraph, H: OrderedMatchingPattern) -> tuple[int, frozenset[Edge]]:
    """Delete the edge lying in the most surviving copies until none remain.

    Ties go to the lexicographically smallest edge.  Returns the number of
    deletions and the deleted edges.
    """
    chosen = _greedy(copy_family(G, H))
    return len(chosen), frozenset(chosen)


class _BudgetExhausted(Exception):
    pass


def exact_deletion_number(
    G: OrderedHypergraph, H: OrderedMatchingPattern, budget: int = DEFAULT_BUDGET
) -> FarnessReport:
    """Branch-and-bound minimum hitting set over the copy family.

    Each node branches on one uncovered copy: the copy containing the
    currently rarest edge (ties by copy order), trying its edges most
    frequent first.  In branch ``i`` the edges tried in branches ``< i``
    are forbidden, so every hitting set is explored at most once.  A node
    is pruned when its deletions plus a greedy packing of the residual
    copies (disjoint on still-allowed edges) cannot beat the incumbent.

    When more than ``budget`` nodes are needed the search stops and the
    report carries the root bounds with ``exact=False``.
    """
    family = copy_family(G, H)
    best = _greedy(family)
    root_lower = _packing(family)
    state = {"nodes": 0, "best": frozenset(best)}

    def solve(residual, deleted: frozenset, forbidden: frozenset) -> None:
        state["nodes"] += 1
        if state["nodes"] > budget:
            raise _BudgetExhausted
        if not residual:
            if len(deleted) < len(state["best"]):
                state["best"] = deleted
            return
        allowed = lambda e: e not in forbidden  # noqa: E731
        counts: Counter[Edge] = Counter()
        for edges in residual:
            free = [e for e in edges if allowed(e)]
            if not free:
                return
            counts.update(free)
        if len(deleted) + _packing(residual, allowed) >= len(state["best"]):
            return
        pick = min(residual, key=lambda edges: min(counts[e] for e in edges if allowed(e)))
        order = sorted((e for e in pick if allowed(e)), key=lambda e: (-counts[e], e))
        tried: list[Edge] = []
        for e in order:
            solve([r for r in residual if e not in r], deleted | {e}, forbidden.union(tried))
            tried.append(e)

    exact = True
    if root_lower < len(best):
        try:
            solve(family, frozenset(), frozenset())
        except _BudgetExhausted:
            exact = False
    witness = state["best"]
    lower = len(witness) if exact else root_lower
    return FarnessReport(G.n, G.s, lower, len(witness), exact, frozenset(witness), state["nodes"])


def farness_bounds(G: OrderedHypergraph, H: OrderedMatchingPattern) -> FarnessReport:
    """Cheap bounds only: greedy packing below, greedy hitting set above."""
    family = copy_family(G, H)
    chosen = _greedy(family)
    lower = _packing(family)
    return FarnessReport(G.n, G.s, lower, len(chosen), lower == len(chosen), frozenset(chosen))


def is_eps_far(
    G: OrderedHypergraph, H: OrderedMatchingPattern, eps: Fraction, budget: int = DEFAULT_BUDGET
) -> tuple[bool, FarnessReport]:
    """Decide whether at least ``eps * n**s`` deletions are needed.

    Returns the decision with the report that certifies it; raises
    :class:`Indeterminate` when the bounds straddle the threshold.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise HypergraphError("eps must be positive")
    threshold = eps * G.n**G.s
    report = exact_deletion_number(G, H, budget)
    if report.lower >= threshold:
        return True, report
    if report.upper < threshold:
        return False, report
    raise Indeterminate(
        f"deletion number in [{report.lower}, {report.upper}] straddles {threshold}", report
    )


def witness_is_valid(G: OrderedHypergraph, H: OrderedMatchingPattern, witness) -> bool:
    from .embed import find_copy

    return find_copy(delete_edges(G, witness), H) is None
