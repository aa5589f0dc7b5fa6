"""Turning one copy in ``G_k`` into a counted family of copies in ``G_0``.

For a copy in ``G_ell`` with vertices ``w_1 < ... < w_m`` in ``I_ell``, the
replacement set of ``w_i`` is the stored L-set of its edge's outside tuple
at the level-``i`` block ``J_i(w_i)``, minus the level-``i+1`` block
containing ``w_i`` (no removal for the last one).  The sets are ordered
left to right, so any choice from their product is again increasing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice, product
from typing import Iterator

from .cleaning import CleaningTrace, Mode, TraceError, _join
from .core import Copy, Edge, HypergraphError, OrderedMatchingPattern, is_copy

DEFAULT_CAP = 10_000
DEFAULT_NODE_BUDGET = 1_000_000


class AmplifyError(HypergraphError):
    pass


@dataclass(frozen=True)
class ReplacementFamily:
    level: int
    base: Copy
    positions: tuple[int, ...]  # 0-based pattern positions landing in I_level
    anchors: tuple[int, ...]  # w_1 < ... < w_m
    tuples: tuple[Edge, ...]  # outside part of the edge through w_i
    sets: tuple[tuple[int, ...], ...]  # L_1, ..., L_m

    @property
    def m(self) -> int:
        return len(self.anchors)

    def count(self) -> int:
        return math.prod(len(L) for L in self.sets)

    def copies(self) -> Iterator[Copy]:
        if not self.sets:
            yield self.base
            return
        c = list(self.base)
        for choice in product(*self.sets):
            for p, w in zip(self.positions, choice):
                c[p] = w
            yield tuple(c)


def replacement_sets(
    trace: CleaningTrace, H: OrderedMatchingPattern, ell: int, copy: Copy
) -> ReplacementFamily:
    sc = trace.scheme
    copy = tuple(copy)
    if H.t > sc.t:
        raise AmplifyError(f"pattern has t={H.t} vertices but the scheme only has {sc.t} levels")
    if not is_copy(trace.stages[ell], H, copy):
        raise AmplifyError(f"{list(copy)} is not a copy of the pattern in G_{ell}")
    top = sc.top(ell)
    positions = tuple(p for p, v in enumerate(copy) if v in top)
    if not positions:
        return ReplacementFamily(ell, copy, (), (), (), ())
    anchors, tuples, sets = [], [], []
    m = len(positions)
    for i, p in enumerate(positions, 1):
        if p + 1 not in H.edge_of:
            raise AmplifyError(
                f"pattern vertex {p + 1} is isolated; replacement needs an incident edge inside I_{ell}"
            )
        w = copy[p]
        img = tuple(copy[x - 1] for x in H.edges[H.edge_of[p + 1]])
        tup = tuple(v for v in img if v != w)
        if any(v in top for v in tup):
            raise AmplifyError(f"edge {list(img)} has two vertices in I_{ell}")
        J = sc.interval_of(w, i)
        L = trace.lsets.get((ell, tup, J))
        if L is None or len(L) != J.threshold:
            raise TraceError(
                f"step {ell}: edge {list(img)} survived but the L-set of {list(tup)} at level {i} "
                f"has size {0 if L is None else len(L)}, expected {J.threshold}"
            )
        if i < m:
            nxt = sc.interval_of(w, i + 1)
            L = tuple(x for x in L if x not in nxt)
        anchors.append(w)
        tuples.append(tup)
        sets.append(tuple(L))
    return ReplacementFamily(ell, copy, positions, tuple(anchors), tuple(tuples), tuple(sets))


@dataclass
class FamilyReport:
    level: int
    m: int
    ordering: bool = True
    sizes: bool = True
    edges: bool = True
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.ordering and self.sizes and self.edges


def _check_family(trace: CleaningTrace, H, fam: ReplacementFamily, sample_cap: int) -> FamilyReport:
    sc = trace.scheme
    ell = fam.level
    rep = FamilyReport(ell, fam.m)
    prev = trace.stages[ell - 1]
    for i in range(fam.m - 1):
        a, b = fam.sets[i], fam.sets[i + 1]
        if a and b and max(a) >= min(b):
            rep.ordering = False
            rep.messages.append(f"level {ell}: L_{i + 1} is not left of L_{i + 2}")
    half_beta = sc.beta / 2
    for i, (w, L) in enumerate(zip(fam.anchors, fam.sets), 1):
        J = sc.interval_of(w, i)
        need = half_beta * len(J)
        if sc.mode is Mode.FLOOR:
            need -= 1
        if len(L) < need:
            rep.sizes = False
            rep.messages.append(f"level {ell}: |L_{i}|={len(L)} < {need}")
        if sc.mode is Mode.EXACT and len(L) < sc.delta * sc.n:
            rep.sizes = False
            rep.messages.append(f"level {ell}: |L_{i}|={len(L)} < delta*n={sc.delta * sc.n}")
    for i, (tup, L) in enumerate(zip(fam.tuples, fam.sets), 1):
        for x in L:
            if _join(tup, x) not in prev.edges:
                rep.edges = False
                rep.messages.append(f"level {ell}: edge {list(_join(tup, x))} for L_{i} missing from G_{ell - 1}")
    for c in islice(fam.copies(), sample_cap):
        if not is_copy(prev, H, c):
            rep.edges = False
            rep.messages.append(f"level {ell}: substituted tuple {list(c)} is not a copy in G_{ell - 1}")
            break
    return rep


def check_replacement_family(
    trace: CleaningTrace, H: OrderedMatchingPattern, ell: int, copy: Copy, sample_cap: int = 1000
) -> FamilyReport:
    """Check ordering, size and edge presence of the replacement sets of ``copy`` at step ``ell``.

    Size means ``|L_i| >= (beta/2)|J_i(w_i)|`` (minus one in floor mode),
    and additionally ``|L_i| >= delta * n`` in exact mode.  Failures are
    collected in the report rather than raised.
    """
    try:
        fam = replacement_sets(trace, H, ell, copy)
    except HypergraphError as exc:
        rep = FamilyReport(ell, -1, edges=False)
        rep.messages.append(str(exc))
        return rep
    return _check_family(trace, H, fam, sample_cap)


def expand_copy(
    trace: CleaningTrace, H: OrderedMatchingPattern, ell: int, copy: Copy, cap: int = DEFAULT_CAP
) -> tuple[list[Copy], int]:
    """Up to ``cap`` substituted copies (each checked in ``G_{ell-1}``) and the exact family size."""
    fam = replacement_sets(trace, H, ell, copy)
    prev = trace.stages[ell - 1]
    out = list(islice(fam.copies(), cap))
    bad = [c for c in out if not is_copy(prev, H, c)]
    if bad:
        raise AmplifyError(f"substituted tuple {list(bad[0])} is not a copy in G_{ell - 1}")
    return out, fam.count()


@dataclass
class AmplificationCertificate:
    base: Copy
    m: dict[int, int]
    level_sizes: dict[int, list[int]]
    min_factor: dict[int, int]
    certified_count: int
    complete: bool
    expansions: int
    family_failures: list[str]
    materialized: list[Copy]

    def to_json(self, sample: int | None = None) -> dict:
        copies = self.materialized if sample is None else self.materialized[:sample]
        return {
            "base": list(self.base),
            "m": {str(k): v for k, v in sorted(self.m.items())},
            "level_set_sizes": {str(k): v for k, v in sorted(self.level_sizes.items())},
            "min_factor": {str(k): v for k, v in sorted(self.min_factor.items())},
            "certified_count": str(self.certified_count),
            "complete": self.complete,
            "expansions": self.expansions,
            "family_failures": list(self.family_failures),
            "materialized": len(self.materialized),
            "sampled_copies": [list(c) for c in copies],
        }


class _Exhausted(Exception):
    pass


def reconstruct_all(
    trace: CleaningTrace,
    H: OrderedMatchingPattern,
    base: Copy,
    cap: int = DEFAULT_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
    check: bool = True,
    sample_cap: int = 1000,
) -> AmplificationCertificate:
    """Expand ``base`` through ``I_k, ..., I_1`` and count the resulting family exactly.

    Copies are expanded depth first; the last expanding level contributes
    its product size without materialization, so the count is exact while
    only the first ``cap`` copies in ``G_0`` are kept.  If more than
    ``node_budget`` expansions would be needed the count is a partial sum
    (still a valid lower bound) and ``complete`` is false.  With ``check``
    every expansion is also run through the family checks.
    """
    sc = trace.scheme
    base = tuple(base)
    if not is_copy(trace.final, H, base):
        raise AmplifyError(f"{list(base)} is not a copy of the pattern in G_{sc.k}")
    m = {ell: sum(1 for v in base if v in sc.top(ell)) for ell in range(1, sc.k + 1)}
    assert sum(m.values()) == H.t
    levels = [ell for ell in range(sc.k, 0, -1) if m[ell]]
    sizes: dict[int, list[int]] = {}
    min_factor: dict[int, int] = {}
    failures: list[str] = []
    materialized: list[Copy] = []
    state = {"count": 0, "expansions": 0}

    def dfs(copy: Copy, idx: int) -> None:
        if idx == len(levels):
            state["count"] += 1
            if len(materialized) < cap:
                materialized.append(copy)
            return
        ell = levels[idx]
        if state["expansions"] >= node_budget:
            raise _Exhausted
        state["expansions"] += 1
        fam = replacement_sets(trace, H, ell, copy)
        if check:
            rep = _check_family(trace, H, fam, sample_cap)
            if not rep.passed and len(failures) < 100:
                failures.extend(rep.messages)
        sizes.setdefault(ell, [len(L) for L in fam.sets])
        factor = fam.count()
        min_factor[ell] = min(min_factor.get(ell, factor), factor)
        if idx == len(levels) - 1:
            state["count"] += factor
            if len(materialized) < cap:
                materialized.extend(islice(fam.copies(), cap - len(materialized)))
            return
        for child in fam.copies():
            dfs(child, idx + 1)

    complete = True
    try:
        dfs(base, 0)
    except _Exhausted:
        complete = False
    return AmplificationCertificate(
        base, m, sizes, min_factor, state["count"], complete, state["expansions"], failures, materialized
    )


def certificate_violations(
    trace: CleaningTrace, H: OrderedMatchingPattern, cert: AmplificationCertificate
) -> list[str]:
    """Materialized copies must be valid in ``G_0``, pairwise distinct, and agree with the base on fixed levels."""
    out = []
    g0 = trace.stages[0]
    for c in cert.materialized:
        if not is_copy(g0, H, c):
            out.append(f"materialized {list(c)} is not a copy in G_0")
            break
    if len(set(cert.materialized)) != len(cert.materialized):
        out.append("materialized copies are not pairwise distinct")
    sc = trace.scheme
    for c in cert.materialized:
        per = [sum(1 for v in c if v in sc.top(ell)) for ell in range(1, sc.k + 1)]
        if per != [cert.m[ell] for ell in range(1, sc.k + 1)]:
            out.append(f"materialized {list(c)} changes the per-interval vertex counts")
            break
    if cert.complete and cert.certified_count < len(cert.materialized):
        out.append("certified count below the number of materialized copies")
    if sc.mode is Mode.EXACT and cert.certified_count < 1:
        out.append("certified count is zero although a base copy exists")
    return out


def headline_count_bound(scheme, t: int) -> Fraction:
    """``(eps/4t)^(t(t+1)) n^t``, the headline count for a ``t``-vertex matching."""
    return (scheme.eps / (4 * t)) ** (t * (t + 1)) * scheme.n**t
