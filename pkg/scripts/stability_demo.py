"""Eventual 1-stability on the lower-bound fixtures, and COLORING for contrast.

Prints, per run, which processes end up reading a single neighbor forever.
"""

import sys

from stabilis.analysis import stability_profile
from stabilis.engine import SchedulerSpec, init_configuration, run
from stabilis.experiments import summarize
from stabilis.protocols import get_protocol
from stabilis.topology import exds_fixture, exmatching_fixture, greedy_local_coloring, star_caterpillar


def show(label, g, name, sched, seed):
    proto = get_protocol(name)
    t = run(g, proto, sched, init_configuration(g, proto, "uniform", seed=seed), seed=seed)
    prof = stability_profile(t)
    r = summarize(t)
    lb = "-" if r.stable_lb is None else r.stable_lb
    print(f"{label:22s} {name:9s} {sched.describe():10s} rounds={r.rounds:<4} "
          f"1-stable={prof.one_stable_count:<3} lower_bound={lb:<3} levels={list(prof.levels)}")


def main():
    sched = SchedulerSpec("random_subset", 0.5)
    for seed in range(3):
        show("exds (P5, 1-2-1-2-1)", exds_fixture(), "mis", sched, seed)
    g = exmatching_fixture()
    for seed in range(3):
        show("exmatching (m=14)", g.with_colors(greedy_local_coloring(g, seed)), "matching",
             sched, seed)
    for delta in (2, 3, 4):
        show(f"star_caterpillar({delta})", star_caterpillar(delta), "coloring", sched, delta)
    return 0


if __name__ == "__main__":
    sys.exit(main())
