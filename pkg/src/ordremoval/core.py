"""Ordered hypergraphs, ordered matching patterns and the shared text format.

Vertices are the integers ``1..n`` under their natural order.  Edges are
stored as strictly increasing tuples, so interval membership and order
checks are plain integer comparisons.
"""
from __future__ import annotations

import warnings
from bisect import bisect_left, bisect_right
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Edge = tuple[int, ...]
Copy = tuple[int, ...]


class HypergraphError(ValueError):
    """Raised for malformed hypergraphs, patterns or copies."""


class FormatError(HypergraphError):
    """Raised when a hypergraph/pattern text file cannot be parsed."""


class IsolatedVertexWarning(UserWarning):
    pass


def _normalize_edges(
    edges: Iterable[Sequence[int]], size: int, s: int, what: str
) -> frozenset[Edge]:
    out = set()
    for raw in edges:
        e = tuple(sorted(int(x) for x in raw))
        if len(e) != s:
            raise HypergraphError(f"{what} edge {list(raw)} has arity {len(e)}, expected {s}")
        if any(a == b for a, b in zip(e, e[1:])):
            raise HypergraphError(f"{what} edge {list(raw)} has a repeated vertex")
        if e[0] < 1 or e[-1] > size:
            raise HypergraphError(f"{what} edge {list(raw)} leaves the vertex range 1..{size}")
        out.add(e)
    return frozenset(out)


@dataclass(frozen=True)
class OrderedHypergraph:
    n: int
    s: int
    edges: frozenset[Edge]

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e: object) -> bool:
        return e in self.edges

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    @cached_property
    def _completions(self) -> dict[Edge, list[int]]:
        # prefix (first s-1 vertices) -> sorted list of last vertices
        index: dict[Edge, list[int]] = defaultdict(list)
        for e in self.edges:
            index[e[:-1]].append(e[-1])
        for v in index.values():
            v.sort()
        return dict(index)

    def completions(self, prefix: Edge, lo: int = 1, hi: int | None = None) -> list[int]:
        """Vertices ``w`` in ``[lo, hi]`` with ``prefix + (w,)`` an edge.

        ``prefix`` must be increasing with every entry below ``lo``.
        """
        row = self._completions.get(prefix)
        if not row:
            return []
        hi = self.n if hi is None else hi
        return row[bisect_left(row, lo):bisect_right(row, hi)]

    def count_completions(self, prefix: Edge, lo: int, hi: int) -> int:
        row = self._completions.get(prefix)
        if not row:
            return 0
        return max(0, bisect_right(row, hi) - bisect_left(row, lo))

    def issubgraph(self, other: OrderedHypergraph) -> bool:
        return self.n == other.n and self.s == other.s and self.edges <= other.edges


def build_hypergraph(n: int, s: int, edges: Iterable[Sequence[int]]) -> OrderedHypergraph:
    """Validate and canonicalize an ordered ``s``-uniform hypergraph on ``[n]``.

    Tuples are sorted and duplicates collapse silently; repeated vertices,
    out-of-range vertices and wrong arity raise :class:`HypergraphError`.
    """
    if not s >= 2:
        raise HypergraphError(f"uniformity must be at least 2, got {s}")
    if not n >= s:
        raise HypergraphError(f"need n >= s, got n={n}, s={s}")
    return OrderedHypergraph(n, s, _normalize_edges(edges, n, s, "hypergraph"))


def _subgraph(G: OrderedHypergraph, edges: Iterable[Edge]) -> OrderedHypergraph:
    # trusted constructor for edge sets already known to be canonical
    return OrderedHypergraph(G.n, G.s, frozenset(edges))


def delete_edges(G: OrderedHypergraph, removal: Iterable[Sequence[int]]) -> OrderedHypergraph:
    """Return ``G`` minus ``removal``; every removed edge must be present."""
    rem = {tuple(sorted(e)) for e in removal}
    missing = rem - G.edges
    if missing:
        raise HypergraphError(f"cannot delete absent edges: {sorted(missing)[:5]}")
    if not rem:
        return G
    return _subgraph(G, G.edges - rem)


@dataclass(frozen=True)
class OrderedMatchingPattern:
    t: int
    s: int
    edges: tuple[Edge, ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def isolated(self) -> tuple[int, ...]:
        covered = {x for e in self.edges for x in e}
        return tuple(p for p in range(1, self.t + 1) if p not in covered)

    @cached_property
    def edge_of(self) -> dict[int, int]:
        """Pattern vertex -> index of the pattern edge containing it."""
        return {x: i for i, e in enumerate(self.edges) for x in e}

    @cached_property
    def completer(self) -> tuple[Edge | None, ...]:
        """For position p (0-based), the other vertices of the edge whose maximum is p+1."""
        out: list[Edge | None] = [None] * self.t
        for e in self.edges:
            out[e[-1] - 1] = e[:-1]
        return tuple(out)

    def image(self, c: Copy) -> list[Edge]:
        """Edge images of the pattern under the copy ``c`` (sorted because ``c`` is increasing)."""
        return [tuple(c[x - 1] for x in e) for e in self.edges]


def validate_pattern(t: int, s: int, edges: Iterable[Sequence[int]]) -> OrderedMatchingPattern:
    """Validate an ordered ``s``-uniform matching on ``[t]``.

    Patterns with isolated vertices are accepted but emit an
    :class:`IsolatedVertexWarning`.
    """
    if not s >= 2:
        raise HypergraphError(f"uniformity must be at least 2, got {s}")
    if not t >= s:
        raise HypergraphError(f"need t >= s, got t={t}, s={s}")
    es = sorted(_normalize_edges(edges, t, s, "pattern"))
    seen: dict[int, Edge] = {}
    for e in es:
        for x in e:
            if x in seen:
                raise HypergraphError(f"pattern edges {list(seen[x])} and {list(e)} share vertex {x}")
            seen[x] = e
    H = OrderedMatchingPattern(t, s, tuple(es))
    if s * H.m < t:
        warnings.warn(
            f"pattern has isolated vertices {list(H.isolated)}", IsolatedVertexWarning, stacklevel=2
        )
    return H


def is_copy(G: OrderedHypergraph, H: OrderedMatchingPattern, c: Sequence[int]) -> bool:
    """True iff ``c`` is strictly increasing in ``[n]`` and maps every H-edge onto a G-edge."""
    c = tuple(c)
    if len(c) != H.t or G.s != H.s:
        return False
    if any(a >= b for a, b in zip(c, c[1:])):
        return False
    if c and (c[0] < 1 or c[-1] > G.n):
        return False
    return all(e in G.edges for e in H.image(c))


# -- text format ---------------------------------------------------------------


def _parse_lines(text: str) -> tuple[int, int, list[list[int]]]:
    rows: list[list[int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer token in {line!r}") from None
    if not rows:
        raise FormatError("missing header line 'n s m'")
    header, body = rows[0], rows[1:]
    if len(header) != 3:
        raise FormatError(f"header must have 3 integers 'n s m', got {header}")
    size, s, m = header
    if len(body) != m:
        raise FormatError(f"header declares {m} edges but {len(body)} edge lines follow")
    for row in body:
        if len(row) != s:
            raise FormatError(f"edge line {row} has arity {len(row)}, expected {s}")
        if any(a >= b for a, b in zip(row, row[1:])):
            raise FormatError(f"edge line {row} is not strictly increasing")
    return size, s, body


def parse_hypergraph(text: str) -> OrderedHypergraph:
    n, s, body = _parse_lines(text)
    try:
        return build_hypergraph(n, s, body)
    except FormatError:
        raise
    except HypergraphError as exc:
        raise FormatError(str(exc)) from None


def parse_pattern(text: str) -> OrderedMatchingPattern:
    t, s, body = _parse_lines(text)
    try:
        return validate_pattern(t, s, body)
    except FormatError:
        raise
    except HypergraphError as exc:
        raise FormatError(str(exc)) from None


def _format(size: int, s: int, edges: Iterable[Edge], comments: Sequence[str] = ()) -> str:
    es = sorted(edges)
    lines = [f"# {c}" for c in comments]
    lines.append(f"{size} {s} {len(es)}")
    lines.extend(" ".join(map(str, e)) for e in es)
    return "\n".join(lines) + "\n"


def format_hypergraph(G: OrderedHypergraph, comments: Sequence[str] = ()) -> str:
    """Canonical text form: header ``n s m`` then edges in lexicographic order."""
    return _format(G.n, G.s, G.edges, comments)


def format_pattern(H: OrderedMatchingPattern, comments: Sequence[str] = ()) -> str:
    return _format(H.t, H.s, H.edges, comments)


def read_hypergraph(path) -> OrderedHypergraph:
    with open(path, encoding="utf-8") as fh:
        return parse_hypergraph(fh.read())


def read_pattern(path) -> OrderedMatchingPattern:
    with open(path, encoding="utf-8") as fh:
        return parse_pattern(fh.read())


def write_hypergraph(G: OrderedHypergraph, path, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_hypergraph(G, comments))
