"""Interval schemes, the strip step and the nested-partition cleaning chain.

``[n]`` is split into ``k`` top intervals (so ``eps = 1/k``), and each top
interval is refined ``t - 1`` times by a factor ``gamma = eps / 4t``.  All
parameters are kept as :class:`fractions.Fraction` so that every
inequality of the deletion ledger is evaluated exactly.
"""
from __future__ import annotations

import csv
import enum
import json
from bisect import insort
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .core import (
    Edge,
    HypergraphError,
    OrderedHypergraph,
    _subgraph,
    format_hypergraph,
    read_hypergraph,
)


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOOR = "floor"


class SchemeError(HypergraphError):
    pass


class TraceError(HypergraphError):
    pass


@dataclass(frozen=True, order=True)
class Interval:
    """A block ``[start, end]`` of level ``level`` inside top interval ``ell``."""

    ell: int
    level: int
    index: int
    start: int
    end: int
    threshold: int = field(compare=False)

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, v: object) -> bool:
        return isinstance(v, int) and self.start <= v <= self.end

    @property
    def vertices(self) -> range:
        return range(self.start, self.end + 1)


def _split(start: int, end: int, parts: int) -> list[tuple[int, int]]:
    size = end - start + 1
    q = min(parts, size)
    base, extra = divmod(size, q)
    out = []
    a = start
    for i in range(q):
        b = a + base + (1 if i < extra else 0) - 1
        out.append((a, b))
        a = b + 1
    return out


@dataclass(frozen=True, eq=False)
class IntervalScheme:
    n: int
    k: int
    t: int
    mode: Mode
    ratio: int
    levels: tuple[tuple[tuple[Interval, ...], ...], ...]  # [ell-1][j-1]
    _locate: tuple[tuple[Interval | None, ...], ...] = field(repr=False)  # [j-1][v]

    @property
    def eps(self) -> Fraction:
        return Fraction(1, self.k)

    @property
    def gamma(self) -> Fraction:
        return Fraction(1, self.ratio)

    @property
    def beta(self) -> Fraction:
        return 2 * self.gamma

    @property
    def delta(self) -> Fraction:
        return self.gamma ** (self.t + 1)

    def top(self, ell: int) -> Interval:
        return self.levels[ell - 1][0][0]

    def top_index(self, v: int) -> int:
        return self._locate[0][v].ell

    def interval_of(self, v: int, j: int) -> Interval:
        """The level-``j`` interval containing ``v``."""
        if not 1 <= v <= self.n:
            raise SchemeError(f"vertex {v} outside 1..{self.n}")
        if not 1 <= j <= self.t:
            raise SchemeError(f"level {j} outside 1..{self.t}")
        return self._locate[j - 1][v]

    def chain(self, v: int) -> list[Interval]:
        return [self._locate[j][v] for j in range(self.t)]

    def intervals(self, ell: int) -> list[Interval]:
        """All of ``J_ell`` (every level of the refinement of ``I_ell``)."""
        return [J for level in self.levels[ell - 1] for J in level]

    def __contains__(self, J: object) -> bool:
        if not isinstance(J, Interval):
            return False
        try:
            return self.levels[J.ell - 1][J.level - 1][J.index] == J
        except IndexError:
            return False

    def params(self) -> dict:
        out = {"n": self.n, "k": self.k, "t": self.t, "mode": self.mode.value}
        if self.ratio != 4 * self.t * self.k:
            out["ratio"] = self.ratio
        return out


def build_scheme(
    n: int, k: int, t: int, mode: Mode | str = Mode.FLOOR, *, ratio: int | None = None
) -> IntervalScheme:
    """Build the nested interval table.

    Each block is refined into ``r = 1/gamma`` children, ``r = 4tk`` unless
    ``ratio`` overrides it (coarser schemes keep deep blocks non-trivial at
    small ``n``; ``beta = 2/r`` either way).  Exact mode requires ``k | n``
    and ``r**t | 2n/k``, so every level-``j`` block has size
    ``gamma**(j-1) |I|`` and every ``beta |J|`` is an integer.  Floor mode
    splits as evenly as possible (at most ``r`` children, never empty) and
    rounds thresholds up.
    """
    mode = Mode(mode)
    if k < 1 or t < 1:
        raise SchemeError(f"need k >= 1 and t >= 1, got k={k}, t={t}")
    if n < k:
        raise SchemeError(f"need n >= k, got n={n}, k={k}")
    r = 4 * t * k if ratio is None else ratio
    if r < 2:
        raise SchemeError(f"refinement ratio must be at least 2, got {r}")
    if mode is Mode.EXACT:
        if n % k:
            raise SchemeError(f"exact mode: k={k} does not divide n={n}")
        if (2 * (n // k)) % r**t:
            raise SchemeError(f"exact mode: r^t={r**t} does not divide 2n/k={2 * (n // k)} (r={r})")

    def threshold(size: int) -> int:
        q, rem = divmod(2 * size, r)
        if mode is Mode.EXACT:
            assert rem == 0
            return q
        return q + (1 if rem else 0)

    levels = []
    locate: list[list[Interval | None]] = [[None] * (n + 1) for _ in range(t)]
    for ell, (a, b) in enumerate(_split(1, n, k), 1):
        per_level = []
        current = [(a, b)]
        for j in range(1, t + 1):
            blocks = tuple(
                Interval(ell, j, i, lo, hi, threshold(hi - lo + 1)) for i, (lo, hi) in enumerate(current)
            )
            for J in blocks:
                for v in J.vertices:
                    locate[j - 1][v] = J
            per_level.append(blocks)
            current = [piece for lo, hi in current for piece in _split(lo, hi, r)]
        levels.append(tuple(per_level))
    return IntervalScheme(n, k, t, mode, r, tuple(levels), tuple(tuple(x) for x in locate))


def interval_of(scheme: IntervalScheme, v: int, j: int) -> Interval:
    return scheme.interval_of(v, j)


# -- strip and clean -------------------------------------------------------------


def strip_step(G: OrderedHypergraph, scheme: IntervalScheme) -> tuple[OrderedHypergraph, int]:
    """Drop every edge with two or more vertices in one top interval."""
    if G.n != scheme.n:
        raise SchemeError(f"hypergraph has n={G.n}, scheme has n={scheme.n}")
    loc = scheme._locate[0]
    kept = [e for e in G.edges if len({loc[v].ell for v in e}) == len(e)]
    return _subgraph(G, kept), len(G.edges) - len(kept)


def _join(tup: Edge, w: int) -> Edge:
    out = list(tup)
    insort(out, w)
    return tuple(out)


def l_set(
    G_prev: OrderedHypergraph, scheme: IntervalScheme, ell: int, tup: Sequence[int], J: Interval
) -> tuple[int, ...]:
    """Leftmost ``B_J`` vertices ``w`` of ``J`` with ``tup + {w}`` an edge of ``G_prev``.

    Fewer than ``B_J`` such vertices means all of them are returned.
    """
    tup = tuple(tup)
    top = scheme.top(ell)
    if len(tup) != G_prev.s - 1 or any(a >= b for a, b in zip(tup, tup[1:])):
        raise SchemeError(f"tuple {list(tup)} is not an increasing ({G_prev.s - 1})-tuple")
    if any(v in top for v in tup):
        raise SchemeError(f"tuple {list(tup)} meets I_{ell}")
    if J not in scheme or J.ell != ell:
        raise SchemeError(f"{J} is not an interval of J_{ell}")
    out = []
    for w in J.vertices:
        if _join(tup, w) in G_prev.edges:
            out.append(w)
            if len(out) == J.threshold:
                break
    return tuple(out)


LKey = tuple[int, Edge, Interval]


@dataclass
class CleaningStep:
    ell: int
    deletions: int
    per_level: dict[int, int]
    lsets: dict[LKey, tuple[int, ...]]


def _incident(G: OrderedHypergraph, scheme: IntervalScheme, ell: int):
    # (tuple, w, edge) for edges meeting I_ell in exactly one vertex w
    loc = scheme._locate[0]
    groups: dict[Edge, list[tuple[int, Edge]]] = defaultdict(list)
    for e in G.edges:
        inside = [i for i, v in enumerate(e) if loc[v].ell == ell]
        if len(inside) == 1:
            i = inside[0]
            groups[e[:i] + e[i + 1:]].append((e[i], e))
    return groups


def clean_step(
    G_prev: OrderedHypergraph, scheme: IntervalScheme, ell: int
) -> tuple[OrderedHypergraph, CleaningStep]:
    """Cleaning step ``ell`` with snapshot semantics.

    Every L-set is computed against ``G_prev``; the union of the selected
    edges is deleted in one batch.  ``per_level[j]`` attributes each
    selected edge to every level that selected it, so it may exceed the
    per-step total.
    """
    if G_prev.n != scheme.n:
        raise SchemeError(f"hypergraph has n={G_prev.n}, scheme has n={scheme.n}")
    deleted: set[Edge] = set()
    per_level = {j: 0 for j in range(1, scheme.t + 1)}
    lsets: dict[LKey, tuple[int, ...]] = {}
    for tup, pairs in _incident(G_prev, scheme, ell).items():
        pairs.sort()
        for j in range(1, scheme.t + 1):
            loc = scheme._locate[j - 1]
            current = None
            chosen: list[int] = []
            for w, e in pairs:
                J = loc[w]
                if J is not current:
                    if chosen:
                        lsets[(ell, tup, current)] = tuple(chosen)
                    current, chosen = J, []
                if len(chosen) < J.threshold:
                    chosen.append(w)
                    deleted.add(e)
            if chosen:
                lsets[(ell, tup, current)] = tuple(chosen)
    for (_, _, J), ws in lsets.items():
        per_level[J.level] += len(ws)
    G_next = _subgraph(G_prev, G_prev.edges - deleted)
    return G_next, CleaningStep(ell, len(deleted), per_level, lsets)


@dataclass
class DeletionLedger:
    strip_deletions: int = 0
    per_step: dict[int, int] = field(default_factory=dict)
    per_level: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def cleaning_total(self) -> int:
        return sum(self.per_step.values())

    @property
    def total(self) -> int:
        return self.strip_deletions + self.cleaning_total

    def rows(self) -> list[tuple[int, int, int]]:
        """``(step, level, deletions)``; step 0 is the strip, level 0 a step total."""
        out = [(0, 0, self.strip_deletions)]
        for ell in sorted(self.per_step):
            out.append((ell, 0, self.per_step[ell]))
            out.extend((ell, j, c) for (l2, j), c in sorted(self.per_level.items()) if l2 == ell)
        return out


@dataclass
class CleaningTrace:
    scheme: IntervalScheme
    G: OrderedHypergraph
    stages: list[OrderedHypergraph]  # stages[ell] is G_ell, ell = 0..k
    ledger: DeletionLedger
    lsets: dict[LKey, tuple[int, ...]]

    def stage(self, ell: int) -> OrderedHypergraph:
        return self.stages[ell]

    @property
    def final(self) -> OrderedHypergraph:
        return self.stages[-1]

    def deleted_edges(self) -> frozenset[Edge]:
        return self.G.edges - self.final.edges


def clean_all(G: OrderedHypergraph, scheme: IntervalScheme) -> CleaningTrace:
    """Strip, then clean with respect to ``I_1, ..., I_k`` in order."""
    G0, stripped = strip_step(G, scheme)
    ledger = DeletionLedger(stripped)
    stages = [G0]
    lsets: dict[LKey, tuple[int, ...]] = {}
    for ell in range(1, scheme.k + 1):
        nxt, step = clean_step(stages[-1], scheme, ell)
        ledger.per_step[ell] = step.deletions
        for j, c in step.per_level.items():
            ledger.per_level[(ell, j)] = c
        lsets.update(step.lsets)
        assert len(stages[-1]) - len(nxt) == step.deletions
        stages.append(nxt)
    return CleaningTrace(scheme, G, stages, ledger, lsets)


# -- checks ----------------------------------------------------------------------


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: Fraction
    op: str
    rhs: Fraction

    @property
    def passed(self) -> bool:
        if self.op == "<":
            return self.lhs < self.rhs
        if self.op == "<=":
            return self.lhs <= self.rhs
        return self.lhs == self.rhs

    def describe(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name}: {fmt_rational(self.lhs)} {self.op} {fmt_rational(self.rhs)} {verdict}"


def fmt_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class LedgerReport:
    checks: list[Inequality]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Inequality]:
        return [c for c in self.checks if not c.passed]


def verify_ledger(trace: CleaningTrace) -> LedgerReport:
    """Evaluate the strip and cleaning deletion bounds exactly.

    The cleaning total is compared with ``t beta n**s``, which is
    ``(eps/2) n**s`` for the default ratio.  Floor mode adds
    ``t * n**(s-1) * |J_ell|`` per step to absorb the rounded-up
    thresholds; the strip bound needs no slack.
    """
    sc, G = trace.scheme, trace.G
    n, s, t = G.n, G.s, sc.t
    half = sc.eps / 2 * n**s
    led = trace.ledger
    checks = [Inequality("strip", Fraction(led.strip_deletions), "<", half)]
    slack_total = Fraction(0)
    for ell in range(1, sc.k + 1):
        rhs = t * sc.beta * n ** (s - 1) * len(sc.top(ell))
        if sc.mode is Mode.FLOOR:
            slack = Fraction(t * n ** (s - 1) * len(sc.intervals(ell)))
            rhs += slack
            slack_total += slack
        checks.append(Inequality(f"step[{ell}]", Fraction(led.per_step.get(ell, 0)), "<=", rhs))
    budget = t * sc.beta * n**s + slack_total
    checks.append(Inequality("cleaning_total", Fraction(led.cleaning_total), "<", budget))
    stage_sizes = [len(trace.G)] + [len(g) for g in trace.stages]
    expected = [led.strip_deletions] + [led.per_step.get(ell, 0) for ell in range(1, sc.k + 1)]
    for i, d in enumerate(expected):
        name = "strip_count" if i == 0 else f"step_count[{i}]"
        checks.append(Inequality(name, Fraction(d), "==", Fraction(stage_sizes[i] - stage_sizes[i + 1])))
    return LedgerReport(checks)


def stage_chain_violations(trace: CleaningTrace) -> list[str]:
    out = []
    chain = [trace.G] + trace.stages
    names = ["G"] + [f"G_{i}" for i in range(len(trace.stages))]
    for i in range(1, len(chain)):
        if not chain[i].edges <= chain[i - 1].edges:
            out.append(f"{names[i]} is not contained in {names[i - 1]}")
    loc = trace.scheme._locate[0]
    for e in trace.stages[0].edges:
        if len({loc[v].ell for v in e}) != len(e):
            out.append(f"G_0 edge {list(e)} has two vertices in one top interval")
            break
    return out


def survival_violations(trace: CleaningTrace, limit: int | None = None) -> list[str]:
    """Every edge of ``G_ell`` meeting ``I_ell`` at ``w`` must have, at every level ``j``,
    a stored L-set of full size ``B`` lying strictly left of ``w``."""
    sc = trace.scheme
    out: list[str] = []
    for ell in range(1, sc.k + 1):
        for tup, pairs in _incident(trace.stages[ell], sc, ell).items():
            for w, e in pairs:
                for J in sc.chain(w):
                    L = trace.lsets.get((ell, tup, J), ())
                    if len(L) != J.threshold or (L and max(L) >= w):
                        out.append(
                            f"step {ell}: edge {list(e)} survives but L-set at level {J.level} "
                            f"is {list(L)} (B={J.threshold})"
                        )
                        if limit is not None and len(out) >= limit:
                            return out
    return out


# -- trace i/o -------------------------------------------------------------------


def _stage_name(i: int) -> str:
    return f"G{i}.txt"


def save_trace(trace: CleaningTrace, directory, pattern_text: str | None = None) -> Path:
    """Write ``scheme.json``, ``G.txt``, ``G0.txt`` .. ``G{k}.txt``, ``ledger.csv`` and ``lsets.jsonl``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = dict(trace.scheme.params(), s=trace.G.s)
    (d / "scheme.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    (d / "G.txt").write_text(format_hypergraph(trace.G))
    for i, g in enumerate(trace.stages):
        (d / _stage_name(i)).write_text(format_hypergraph(g))
    with open(d / "ledger.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "level", "deletions"])
        w.writerows(trace.ledger.rows())
    lines = []
    for (ell, tup, J), ws in sorted(trace.lsets.items()):
        rec = {"step": ell, "tuple": list(tup), "level": J.level, "index": J.index,
               "start": J.start, "end": J.end, "lset": list(ws)}
        lines.append(json.dumps(rec, separators=(",", ":")))
    (d / "lsets.jsonl").write_text("".join(x + "\n" for x in lines))
    if pattern_text is not None:
        (d / "pattern.txt").write_text(pattern_text)
    return d


def load_trace(directory) -> CleaningTrace:
    d = Path(directory)
    try:
        meta = json.loads((d / "scheme.json").read_text())
    except FileNotFoundError:
        raise TraceError(f"{d} is not a trace directory (no scheme.json)") from None
    scheme = build_scheme(meta["n"], meta["k"], meta["t"], meta["mode"], ratio=meta.get("ratio"))
    G = read_hypergraph(d / "G.txt")
    stages = [read_hypergraph(d / _stage_name(i)) for i in range(scheme.k + 1)]
    ledger = DeletionLedger()
    with open(d / "ledger.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            step, level, count = int(row["step"]), int(row["level"]), int(row["deletions"])
            if step == 0:
                ledger.strip_deletions = count
            elif level == 0:
                ledger.per_step[step] = count
            else:
                ledger.per_level[(step, level)] = count
    lsets: dict[LKey, tuple[int, ...]] = {}
    for line in (d / "lsets.jsonl").read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        J = scheme.levels[rec["step"] - 1][rec["level"] - 1][rec["index"]]
        if (J.start, J.end) != (rec["start"], rec["end"]):
            raise TraceError(f"L-set record names interval [{rec['start']},{rec['end']}] not in scheme")
        lsets[(rec["step"], tuple(rec["tuple"]), J)] = tuple(rec["lset"])
    return CleaningTrace(scheme, G, stages, ledger, lsets)

