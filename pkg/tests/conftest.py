import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from leadersel.graph import build_graph, derive_matrices

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

EXAMPLE_EDGES = [(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 5)]


@pytest.fixture
def example_graph():
    return build_graph(5, EXAMPLE_EDGES)


@pytest.fixture
def example_matrices(example_graph):
    return derive_matrices(example_graph)


@st.composite
def connected_graphs(draw, n_min=2, n_max=8):
    """Random spanning tree plus extra edges, log-uniform weights in [0.1, 10]."""
    n = draw(st.integers(n_min, n_max))
    order = draw(st.permutations(range(1, n + 1)))
    pairs = set()
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        a, b = order[i], order[j]
        pairs.add((min(a, b), max(a, b)))
    extra = draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n)), max_size=2 * n))
    pairs |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    logw = draw(st.lists(st.floats(-1.0, 1.0), min_size=len(pairs), max_size=len(pairs)))
    edges = [(a, b, float(10.0 ** w)) for (a, b), w in zip(sorted(pairs), logw)]
    return build_graph(n, edges)


@st.composite
def graphs_with_leaders(draw, n_max=8, m_max=4):
    g = draw(connected_graphs(n_max=n_max))
    m = draw(st.integers(1, min(m_max, g.n)))
    leaders = sorted(draw(st.sets(st.integers(1, g.n), min_size=m, max_size=m)))
    r = draw(st.integers(0, m))
    demoted = sorted(draw(st.sets(st.sampled_from(leaders), min_size=r, max_size=r))) if r else []
    return g, leaders, demoted


def rng(seed=0):
    return np.random.default_rng(seed)


# Lines recorded by the acceptance module, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
