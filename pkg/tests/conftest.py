import itertools

import pytest
from hypothesis import strategies as st

from hmgf.graph import GraphBuilder, parse_graph

GRAPH_X = """\
# desk example
F 1 2
F 2 3
F 3 4
F 4 5
F 2 4
P 1 3 0.9
P 1 4 0.5
P 3 5 0.8
P 1 5 0.2
"""


@pytest.fixture
def gx():
    return parse_graph(GRAPH_X)


def ids(g, labels):
    return tuple(sorted(g.index(str(x)) for x in labels))


def labels(g, group):
    return sorted((g.labels[v] for v in group), key=int)


@st.composite
def small_graphs(draw, max_n=8):
    """Random heterogeneous graphs with labels "0".."n-1" in index order."""
    n = draw(st.integers(1, max_n))
    b = GraphBuilder()
    for i in range(n):
        b.add_vertex(str(i))
    for u, v in itertools.combinations(range(n), 2):
        kind = draw(st.sampled_from("FPP..."))
        if kind == "F":
            b.add_friend(str(u), str(v))
        elif kind == "P":
            w = draw(st.floats(min_value=1e-9, max_value=1.0))
            b.add_potential(str(u), str(v), w)
    return b.build()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
