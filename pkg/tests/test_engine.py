import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabilis.engine import (
    Scheduler,
    SchedulerSpec,
    execute_step,
    init_configuration,
    round_boundaries,
    rounds,
    run,
    spawn_streams,
)
from stabilis.errors import (
    DomainViolation,
    EmptySelection,
    IllegalWrite,
    InvalidParams,
    MissingColors,
    NotLocallyProper,
)
from stabilis.protocols import (
    DOMINATED,
    DOMINATOR,
    coloring_protocol,
    get_protocol,
    matching_protocol,
    mis_protocol,
)
from stabilis.topology import path, ring

from conftest import ALL_SCHEDULERS, colored_graphs


def oracle_rounds(selections, n):
    """Completed rounds, recounted with a per-process last-seen scan."""
    count, start = 0, 0
    for i in range(len(selections)):
        seen = set()
        for s in selections[start:i + 1]:
            seen.update(s)
        if len(seen) == n:
            count += 1
            start = i + 1
    return count


# -- initialization -----------------------------------------------------------

def test_init_explicit_coloring_conflict():
    cfg = init_configuration(path(2), coloring_protocol(), "explicit",
                             states=[{"C": 1, "cur": 1}, {"C": 1, "cur": 1}])
    assert cfg.values("C") == (1, 1)


def test_init_uniform_mis_in_domain():
    g = ring(7).with_colors((1, 2, 1, 2, 1, 2, 3))
    for seed in range(20):
        cfg = init_configuration(g, mis_protocol(), "uniform", seed=seed)
        assert set(cfg.values("S")) <= {DOMINATOR, DOMINATED}
        assert all(1 <= c <= g.degree(p) for p, c in enumerate(cfg.values("cur")))


def test_init_errors():
    with pytest.raises(DomainViolation):
        init_configuration(path(2), coloring_protocol(), "explicit",
                           states=[{"C": 1, "cur": 0}, {"C": 2, "cur": 1}])
    with pytest.raises(DomainViolation):
        init_configuration(path(2), coloring_protocol(), "explicit",
                           states=[{"C": 3, "cur": 1}, {"C": 2, "cur": 1}])
    with pytest.raises(DomainViolation):
        init_configuration(path(2), coloring_protocol(), "explicit", states=[{"C": 1, "cur": 1}])
    with pytest.raises(MissingColors):
        init_configuration(path(3), mis_protocol(), "uniform")
    with pytest.raises(NotLocallyProper):
        init_configuration(path(3).with_colors((1, 1, 2)), mis_protocol(), "uniform")
    with pytest.raises(InvalidParams):
        init_configuration(path(3), coloring_protocol(), "adversarial", fixture="nope")


def test_init_adversarial():
    g = path(3).with_colors((1, 2, 3))
    cfg = init_configuration(g, matching_protocol(), "adversarial", fixture="misdirected")
    assert cfg.values("PR") == (1, 2, 1)
    assert cfg.values("M") == (True, True, True)


# -- steps --------------------------------------------------------------------

def coloring_cfg(colors, curs, g=None):
    g = g or path(len(colors))
    return g, init_configuration(g, coloring_protocol(), "explicit",
                                 states=[{"C": c, "cur": k} for c, k in zip(colors, curs)])


def test_step_coloring_conflict_redraws():
    g, cfg = coloring_cfg([2, 2, 1], [1, 1, 1])
    _, rngs = spawn_streams(0, 3)
    new, rec = execute_step(g, cfg, {1}, coloring_protocol(), rngs)
    assert rec.fired == {1: 1}
    assert rec.reads[1] == (0,)
    assert new.value(1, "cur") == 2
    assert new.value(1, "C") in (1, 2, 3)
    assert [w[0] for w in rec.writes[1]] == ["C", "cur"]


def test_step_coloring_proper_advances():
    g, cfg = coloring_cfg([1, 2], [1, 1])
    new, rec = execute_step(g, cfg, {0}, coloring_protocol())
    assert rec.fired == {0: 2}
    assert len(rec.reads[0]) == 1
    assert new.values("C") == (1, 2) and rec.comm_writers == ()


def test_step_mis_dominated_disabled():
    g = path(2).with_colors((1, 2))
    cfg = init_configuration(g, mis_protocol(), "explicit",
                             states=[{"S": DOMINATOR, "cur": 1}, {"S": DOMINATED, "cur": 1}])
    new, rec = execute_step(g, cfg, {1}, mis_protocol())
    assert rec.fired == {1: None}
    assert rec.to_json()["fired"] == {"1": "disabled"}
    assert rec.reads[1] == (0,)
    assert new == cfg


def test_empty_selection():
    g, cfg = coloring_cfg([1, 2], [1, 1])
    with pytest.raises(EmptySelection):
        execute_step(g, cfg, set(), coloring_protocol())


def test_undeclared_write_rejected():
    proto = coloring_protocol()
    bad = proto.actions[1].__class__(
        "sneak", lambda v: True, lambda v, rng: {"C": 1}, frozenset({"cur"}))
    proto = proto.__class__(proto.name, proto.comm_vars, proto.internal_vars, proto.constants,
                            (bad,), proto.predicate_id)
    g, cfg = coloring_cfg([1, 2], [1, 1])
    with pytest.raises(IllegalWrite):
        execute_step(g, cfg, {0}, proto)


def test_pre_step_semantics():
    # both evaluate against the pre-step configuration, so both rise together
    g = path(2).with_colors((1, 2))
    proto = mis_protocol()
    cfg = init_configuration(g, proto, "explicit",
                             states=[{"S": DOMINATED, "cur": 1}, {"S": DOMINATED, "cur": 1}])
    new, rec = execute_step(g, cfg, {0, 1}, proto)
    assert rec.fired == {0: 2, 1: 2}
    assert new.values("S") == (DOMINATOR, DOMINATOR)


# -- schedulers ---------------------------------------------------------------

def test_scheduler_sync_and_rr():
    rng = np.random.default_rng(0)
    s = Scheduler(SchedulerSpec("synchronous"), 4, rng)
    assert all(s.next_selection() == (0, 1, 2, 3) for _ in range(10))
    r = Scheduler(SchedulerSpec("round_robin"), 3, rng)
    assert [r.next_selection() for _ in range(7)] == [(0,), (1,), (2,), (0,), (1,), (2,), (0,)]


@pytest.mark.parametrize("p", [0.05, 0.5])
def test_scheduler_random_window(p):
    n, w = 10, 16
    s = Scheduler(SchedulerSpec("random_subset", p, w), n, np.random.default_rng(3))
    sels = [s.next_selection() for _ in range(3000)]
    assert all(sels)
    for i in range(len(sels) - w + 1):
        seen = set().union(*sels[i:i + w])
        assert seen == set(range(n))


def test_default_window():
    assert SchedulerSpec("random_subset", 0.3).fairness_window(5) == 40
    assert SchedulerSpec("synchronous").fairness_window(5) == 1
    assert SchedulerSpec("round_robin").fairness_window(5) == 5
    with pytest.raises(InvalidParams):
        SchedulerSpec("random_subset", 0.0)
    with pytest.raises(InvalidParams):
        SchedulerSpec("lottery")


# -- rounds -------------------------------------------------------------------

def test_rounds_examples():
    assert round_boundaries([(0, 1, 2)] * 5, 3) == [1, 2, 3, 4, 5]
    assert round_boundaries([(0,), (1,), (2,)] * 2 + [(0,)], 3) == [3, 6]


@given(st.lists(st.sets(st.integers(0, 4), min_size=1), max_size=60))
def test_rounds_match_oracle(sels):
    sels = [tuple(sorted(s)) for s in sels]
    assert len(round_boundaries(sels, 5)) == oracle_rounds(sels, 5)


def test_rounds_of_traces():
    g = ring(5)
    proto = coloring_protocol()
    init = init_configuration(g, proto, "uniform", seed=2)
    t = run(g, proto, SchedulerSpec("synchronous"), init, seed=2, max_steps=13, stop="max_steps")
    assert len(t.steps) == 13 and rounds(t) == 13
    t = run(g, proto, SchedulerSpec("random_subset", 0.3), init, seed=2, max_steps=200,
            stop="max_steps")
    assert rounds(t) == oracle_rounds(t.selections, g.n)


# -- runs ---------------------------------------------------------------------

def test_run_proper_coloring_silent_at_zero(scheduler):
    g, cfg = coloring_cfg([1, 2, 1, 2, 3], [1, 2, 1, 2, 1], ring(5))
    t = run(g, coloring_protocol(), scheduler, cfg, seed=4)
    assert t.converged and t.silence_step == 0
    assert t.comm_write_steps() == []
    assert t.convergence_rounds() == 0


def test_run_mis_single_edge():
    g = path(2).with_colors((1, 2))
    proto = mis_protocol()
    cfg = init_configuration(g, proto, "explicit",
                             states=[{"S": DOMINATED, "cur": 1}, {"S": DOMINATED, "cur": 1}])
    t = run(g, proto, SchedulerSpec("synchronous"), cfg)
    assert t.converged
    assert t.final.values("S") == (DOMINATOR, DOMINATED)
    assert t.steps[0].fired == {0: 2, 1: 2}
    assert t.steps[1].fired == {0: 3, 1: 1}


def test_run_precondition():
    g, cfg = coloring_cfg([1, 2], [1, 1])
    with pytest.raises(InvalidParams):
        run(g, coloring_protocol(), SchedulerSpec(), cfg, max_steps=0)


def test_budget_exhausted_not_an_error():
    g = ring(8).with_colors((1, 2, 1, 2, 1, 2, 1, 3))
    proto = matching_protocol()
    cfg = init_configuration(g, proto, "adversarial", fixture="misdirected")
    t = run(g, proto, SchedulerSpec("round_robin"), cfg, max_steps=1)
    assert not t.converged and t.silence_step is None and len(t.steps) == 1


def test_verification_window(scheduler):
    g = ring(6).with_colors((1, 2, 1, 2, 1, 2))
    proto = mis_protocol()
    t = run(g, proto, scheduler, init_configuration(g, proto, "uniform", seed=8), seed=8)
    assert t.converged
    counts = np.zeros(g.n, dtype=int)
    for s in t.steps[t.silence_step:]:
        counts[list(s.selected)] += 1
    assert counts.min() >= 2 * g.max_degree


@settings(max_examples=25, deadline=None)
@given(colored_graphs(max_n=9), st.integers(0, 10_000), st.sampled_from(ALL_SCHEDULERS),
       st.sampled_from(["coloring", "mis", "matching"]))
def test_trace_invariants(g, seed, sched, name):
    proto = get_protocol(name)
    t = run(g, proto, sched, init_configuration(g, proto, "uniform", seed=seed), seed=seed)
    # replay reproduces every configuration and the final one
    assert t.replay() == t.final
    cfgs = list(t.configurations())
    assert len(cfgs) == len(t.steps) + 1
    for before, after, step in zip(cfgs, cfgs[1:], t.steps):
        sel = set(step.selected)
        assert set(step.writes) <= sel and set(step.reads) == sel
        for p in range(g.n):
            if p not in step.writes:
                assert before[p] == after[p]
        for p, r in step.reads.items():
            assert set(r) <= set(g.channel[p])
        if all(a is None for a in step.fired.values()):
            assert before == after


def test_determinism_and_jsonl(scheduler):
    g = ring(7).with_colors((1, 2, 1, 2, 1, 2, 3))
    proto = matching_protocol()
    a = run(g, proto, scheduler, init_configuration(g, proto, "uniform", seed=11), seed=11)
    b = run(g, proto, scheduler, init_configuration(g, proto, "uniform", seed=11), seed=11)
    assert a.digest() == b.digest()
    lines = a.to_jsonl().splitlines()
    assert len(lines) == len(a.steps) + 1
    first = json.loads(lines[0])
    assert set(first) == {"step", "selected", "fired", "reads", "writes"}
    footer = json.loads(lines[-1])["summary"]
    assert footer["round_boundaries"] == a.round_boundaries()
    assert footer["scheduler"] == scheduler.describe()


def test_seed_changes_coloring_run():
    g = ring(6)
    proto = coloring_protocol()
    init = init_configuration(g, proto, "adversarial", fixture="monochrome")
    digests = {run(g, proto, SchedulerSpec("synchronous"), init, seed=s).digest() for s in range(5)}
    assert len(digests) > 1
