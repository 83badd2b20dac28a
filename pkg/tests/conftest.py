import numpy as np
import pytest
from hypothesis import strategies as st

from dynim.graph import build_snapshot


def star(directed=False):
    return build_snapshot([(0, 1), (0, 2), (0, 3)], 4, directed)


def triangle():
    return build_snapshot([(0, 1), (1, 2), (0, 2)], 3, False)


def path(n, directed=False):
    return build_snapshot([(i, i + 1) for i in range(n - 1)], n, directed)


@pytest.fixture
def k13():
    return star()


@pytest.fixture
def k3():
    return triangle()


@st.composite
def simple_graphs(draw, max_nodes=30, directed=False, min_nodes=1):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    edges = draw(st.lists(pairs, max_size=3 * n))
    return build_snapshot(edges, n, directed)


def random_graph(rng: np.random.Generator, n: int, m: int, directed=False):
    edges = rng.integers(0, n, size=(m, 2))
    return build_snapshot(edges, n, directed)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
