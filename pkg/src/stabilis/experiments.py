"""Trial harness shared by the acceptance suite and the scripts in ``scripts/``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import (
    matching_round_bound,
    matching_stable_lower_bound,
    mis_round_bound,
    mis_stable_lower_bound,
    stability_profile,
)
from .engine import SchedulerSpec, Trace, init_configuration, run
from .predicates import predicate_for
from .protocols import get_protocol
from .topology import Graph, greedy_local_coloring, random_connected

SCHEDULERS = (
    SchedulerSpec("synchronous"),
    SchedulerSpec("random_subset", 0.5),
    SchedulerSpec("round_robin"),
)


@dataclass(frozen=True)
class TrialResult:
    protocol: str
    seed: int
    scheduler: str
    n: int
    m: int
    max_degree: int
    num_colors: int | None
    converged: bool
    steps: int | None
    rounds: int | None
    round_bound: int | None
    max_reads: int
    predicate_ok: bool
    one_stable_count: int | None
    stable_lb: int | None
    scans_all: bool | None

    @property
    def within_bound(self) -> bool | None:
        if self.round_bound is None or self.rounds is None:
            return None
        return self.rounds <= self.round_bound


def random_instance(seed: int, n_range: tuple[int, int] = (2, 30),
                    p_range: tuple[float, float] = (0.1, 0.6)) -> Graph:
    """Random connected graph with a greedy local coloring, all drawn from ``seed``."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0FFEE]))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = float(rng.uniform(*p_range))
    g = random_connected(n, p, seed=seed)
    return g.with_colors(greedy_local_coloring(g, seed))


def summarize(t: Trace, with_lmax: bool = True) -> TrialResult:
    g = t.graph
    name = t.protocol.name
    round_bound = {"mis": mis_round_bound, "matching": matching_round_bound}.get(name)
    stable_lb = None
    if name == "mis" and with_lmax:
        stable_lb = mis_stable_lower_bound(g)
    elif name == "matching":
        stable_lb = matching_stable_lower_bound(g)
    one_stable = scans_all = None
    if t.converged:
        prof = stability_profile(t)
        one_stable = prof.one_stable_count
        scans_all = all(len(r) == g.degree(p) for p, r in enumerate(prof.read_sets))
    return TrialResult(
        protocol=name,
        seed=t.seed,
        scheduler=t.scheduler.describe(),
        n=g.n,
        m=g.m,
        max_degree=g.max_degree,
        num_colors=g.num_colors,
        converged=t.converged,
        steps=t.silence_step,
        rounds=t.convergence_rounds(),
        round_bound=None if round_bound is None else round_bound(g),
        max_reads=max((len(r) for s in t.steps for r in s.reads.values()), default=0),
        predicate_ok=predicate_for(t.protocol.predicate_id)(g, t.final),
        one_stable_count=one_stable,
        stable_lb=stable_lb,
        scans_all=scans_all,
    )


def run_trial(protocol: str, g: Graph, sched: SchedulerSpec, seed: int,
              max_steps: int = 100_000, with_lmax: bool = True) -> TrialResult:
    proto = get_protocol(protocol)
    cfg = init_configuration(g, proto, "uniform", seed=seed)
    return summarize(run(g, proto, sched, cfg, seed=seed, max_steps=max_steps), with_lmax)


def bound_sweep(protocol: str, trials: int, n_range: tuple[int, int] = (2, 30),
                p_range: tuple[float, float] = (0.1, 0.6), max_steps: int = 100_000,
                base_seed: int = 0, with_lmax: bool = True) -> list[TrialResult]:
    """Random instances cycling through the three schedulers."""
    results = []
    for i in range(trials):
        seed = base_seed + i
        g = random_instance(seed, n_range, p_range)
        sched = SCHEDULERS[i % len(SCHEDULERS)]
        results.append(run_trial(protocol, g, sched, seed, max_steps, with_lmax))
    return results
