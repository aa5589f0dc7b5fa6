from __future__ import annotations

import random
import warnings
from itertools import combinations

import hypothesis.strategies as st
import pytest

from ordremoval.core import IsolatedVertexWarning, build_hypergraph, validate_pattern

ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def report_criterion():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} {detail}".rstrip())

    return record


def random_matching(rng: random.Random, t: int, s: int, allow_isolated: bool = True):
    """Random ordered s-uniform matching on [t] (at least one edge)."""
    verts = list(range(1, t + 1))
    rng.shuffle(verts)
    m_max = t // s
    m = rng.randint(1, m_max) if allow_isolated else m_max
    edges = [sorted(verts[i * s:(i + 1) * s]) for i in range(m)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IsolatedVertexWarning)
        return validate_pattern(t, s, edges)


def random_hypergraph(rng: random.Random, n: int, s: int, p: float):
    return build_hypergraph(n, s, [e for e in combinations(range(1, n + 1), s) if rng.random() < p])


@st.composite
def hypergraphs(draw, max_n=9, s=None):
    s = draw(st.sampled_from([2, 3])) if s is None else s
    n = draw(st.integers(min_value=s, max_value=max_n))
    candidates = list(combinations(range(1, n + 1), s))
    edges = draw(st.lists(st.sampled_from(candidates), max_size=min(len(candidates), 30)))
    return build_hypergraph(n, s, edges)


@st.composite
def patterns(draw, s, max_t=6):
    t = draw(st.integers(min_value=s, max_value=max(s, max_t)))
    order = draw(st.permutations(list(range(1, t + 1))))
    m = draw(st.integers(min_value=1, max_value=t // s))
    edges = [sorted(order[i * s:(i + 1) * s]) for i in range(m)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IsolatedVertexWarning)
        return validate_pattern(t, s, edges)


@st.composite
def host_and_pattern(draw, max_n=9, max_t=5):
    G = draw(hypergraphs(max_n=max_n))
    H = draw(patterns(G.s, max_t=max_t))
    return G, H
