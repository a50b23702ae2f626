import itertools

import pytest
from hypothesis import strategies as st

from stabilis.engine import SchedulerSpec
from stabilis.protocols import Action, ProtocolSpec, Variable
from stabilis.topology import build_graph, greedy_local_coloring, random_connected

ALL_SCHEDULERS = [
    SchedulerSpec("synchronous"),
    SchedulerSpec("random_subset", 0.5),
    SchedulerSpec("round_robin"),
]


@pytest.fixture(params=ALL_SCHEDULERS, ids=lambda s: s.describe())
def scheduler(request):
    return request.param


@st.composite
def connected_graphs(draw, min_n=2, max_n=10):
    n = draw(st.integers(min_n, max_n))
    p = draw(st.floats(0.15, 0.9))
    seed = draw(st.integers(0, 10_000))
    return random_connected(n, p, seed=seed)


@st.composite
def colored_graphs(draw, min_n=2, max_n=10):
    g = draw(connected_graphs(min_n, max_n))
    return g.with_colors(greedy_local_coloring(g, draw(st.integers(0, 1000))))


def all_connected_graphs(n):
    """Every connected labeled simple graph on ``n`` processes."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for mask in range(1, 1 << len(pairs)):
        edges = [e for i, e in enumerate(pairs) if mask >> i & 1]
        if len({v for e in edges for v in e}) != n:
            continue
        try:
            out.append(build_graph(edges, n=n))
        except Exception:
            continue
    return out


def naive_protocol():
    """Test double: every action inspects all neighbors, so one step reads Δ of them."""

    def look_all(v):
        return all(v.at(i, "X") is not None for i in range(1, v.degree + 1))

    return ProtocolSpec(
        name="naive",
        comm_vars=(Variable("X", lambda g, p: (0, 1)),),
        internal_vars=(),
        constants=(),
        actions=(
            Action("flip", lambda v: look_all(v) and v.own("X") == 0,
                   lambda v, rng: {"X": 1}, frozenset({"X"}), frozenset({("*", "X")})),
            Action("noop", look_all, lambda v, rng: {}, frozenset(), frozenset({("*", "X")})),
        ),
        predicate_id="none",
    )


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
