"""Instance generators and the random lower-bound experiment.

Randomness comes from numpy's counter-based Philox bit generator.  Edge
probabilities are rationals ``a/b`` and an edge is kept when an integer
drawn uniformly from ``[0, b)`` is below ``a``, so ``p = 0`` and ``p = 1``
are exact and no floating point enters the instance.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations, compress
from typing import Iterable, Sequence

import numpy as np

from .core import HypergraphError, OrderedHypergraph, OrderedMatchingPattern, build_hypergraph
from .embed import count_copies, per_edge_counts
from .farness import disjoint_packing_lower

GENERATOR = "numpy.random.Philox"
_CHUNK = 1 << 20


class OverlapWarning(UserWarning):
    pass


def as_probability(p) -> Fraction:
    if isinstance(p, str):
        p = Fraction(p.strip())
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise HypergraphError(f"probability {p} outside [0, 1]")
    return p


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_binomial(n: int, s: int, p, seed: int) -> OrderedHypergraph:
    """Each of the ``C(n, s)`` increasing ``s``-tuples is an edge independently with probability ``p``."""
    p = as_probability(p)
    if n < s:
        raise HypergraphError(f"need n >= s, got n={n}, s={s}")
    if p == 0:
        return build_hypergraph(n, s, [])
    rng = _rng(seed)
    total = math.comb(n, s)
    combos = combinations(range(1, n + 1), s)
    kept = []
    for start in range(0, total, _CHUNK):
        size = min(_CHUNK, total - start)
        mask = rng.integers(0, p.denominator, size=size, dtype=np.int64) < p.numerator
        kept.extend(compress(combos, mask.tolist()))
    return OrderedHypergraph(n, s, frozenset(kept))


def complete(n: int, s: int) -> OrderedHypergraph:
    if n < s:
        raise HypergraphError(f"need n >= s, got n={n}, s={s}")
    return OrderedHypergraph(n, s, frozenset(combinations(range(1, n + 1), s)))


def planted(n: int, H: OrderedMatchingPattern, placements: Iterable[Sequence[int]]) -> OrderedHypergraph:
    """Union of the edge images of ``H`` under each increasing placement."""
    edges: set = set()
    shared = False
    for c in placements:
        c = tuple(c)
        if len(c) != H.t or any(a >= b for a, b in zip(c, c[1:])) or (c and (c[0] < 1 or c[-1] > n)):
            raise HypergraphError(f"placement {list(c)} is not an increasing {H.t}-tuple in 1..{n}")
        img = H.image(c)
        if any(e in edges for e in img):
            shared = True
        edges.update(img)
    if shared:
        warnings.warn("planted copies share edges", OverlapWarning, stacklevel=2)
    return build_hypergraph(n, H.s, edges)


@dataclass(frozen=True)
class ExperimentRecord:
    seed: int
    n: int
    s: int
    t: int
    m: int
    p: Fraction
    copies: int
    expected: Fraction
    max_edge_copies: int
    packing_lower: int

    def row(self) -> dict:
        d = asdict(self)
        d["p"] = _q(self.p)
        d["expected"] = _q(self.expected)
        return d


COLUMNS = ["seed", "n", "s", "t", "m", "p", "copies", "expected", "max_edge_copies", "packing_lower"]


def _q(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def expected_copies(n: int, H: OrderedMatchingPattern, p) -> Fraction:
    return math.comb(n, H.t) * as_probability(p) ** H.m


def run_seed(n: int, H: OrderedMatchingPattern, p, seed: int) -> ExperimentRecord:
    p = as_probability(p)
    G = random_binomial(n, H.s, p, seed)
    per_edge = per_edge_counts(G, H)
    copies = count_copies(G, H).total
    assert sum(per_edge.values()) == H.m * copies
    return ExperimentRecord(
        seed, n, H.s, H.t, H.m, p, copies, expected_copies(n, H, p),
        max(per_edge.values(), default=0), disjoint_packing_lower(G, H),
    )


@dataclass(frozen=True)
class ExperimentSummary:
    runs: int
    mean: Fraction
    variance: Fraction  # unbiased sample variance
    expected: Fraction
    within_3se: bool
    edge_scale: Fraction  # n^(t-s) p^(m-1)
    max_edge_ratio: Fraction  # largest max_edge_copies / edge_scale over seeds
    edge_ok_runs: int  # seeds with max_edge_copies <= 5 * edge_scale
    packing_ratio_min: Fraction | None  # min packing_lower / (p n^s)
    generator: str = GENERATOR

    def as_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = _q(v) if isinstance(v, Fraction) else v
        return out


def summarize(records: Sequence[ExperimentRecord]) -> ExperimentSummary:
    """Moment statistics in exact arithmetic.

    The three-standard-error test ``|mean - E| <= 3 sqrt(var/R)`` is decided
    as ``(mean - E)^2 <= 9 var / R`` so it needs no square root.
    """
    R = len(records)
    if R == 0:
        raise ValueError("no records")
    r0 = records[0]
    mean = Fraction(sum(r.copies for r in records), R)
    var = sum((r.copies - mean) ** 2 for r in records) / (R - 1) if R > 1 else Fraction(0)
    expected = r0.expected
    within = (mean - expected) ** 2 <= 9 * var / R
    scale = Fraction(r0.n) ** (r0.t - r0.s) * r0.p ** (r0.m - 1) if r0.m >= 1 else Fraction(0)
    if scale > 0:
        ratio = max(Fraction(r.max_edge_copies) / scale for r in records)
        ok = sum(1 for r in records if r.max_edge_copies <= 5 * scale)
    else:
        ratio, ok = Fraction(0), R
    denom = r0.p * Fraction(r0.n) ** r0.s
    pack = min(Fraction(r.packing_lower) / denom for r in records) if denom > 0 else None
    return ExperimentSummary(R, mean, var, expected, within, scale, ratio, ok, pack)


def proposition_experiment(
    n: int, H: OrderedMatchingPattern, p, seeds: int, first_seed: int = 0, workers: int = 1
) -> tuple[list[ExperimentRecord], ExperimentSummary]:
    """Random binomial instances for seeds ``first_seed .. first_seed+seeds-1``.

    Records come back in seed order whatever ``workers`` is.
    """
    p = as_probability(p)
    seed_list = list(range(first_seed, first_seed + seeds))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_seed, [n] * seeds, [H] * seeds, [p] * seeds, seed_list))
    else:
        records = [run_seed(n, H, p, sd) for sd in seed_list]
    return records, summarize(records)
