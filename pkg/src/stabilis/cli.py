"""Command-line front end: ``run``, ``sweep`` and ``enumerate``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import topology
from .analysis import (
    STATE_CAP,
    build_report,
    enumerate_silent_configs,
    neighbor_completeness_witness,
)
from .engine import SchedulerSpec, init_configuration, run
from .errors import StabilisError, StateSpaceTooLarge
from .protocols import PROTOCOLS, get_protocol
from .topology import Graph

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_TOO_LARGE = 3
EXIT_PREDICATE = 4

FIXTURES = {
    "exds": topology.exds_fixture,
    "exmatching": topology.exmatching_fixture,
    "fivechain": topology.five_chain,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def default_seed() -> int:
    raw = os.environ.get("STABILIS_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"STABILIS_SEED must be an integer, got {raw!r}") from None


# -- specifier parsing --------------------------------------------------------

def _n_from(token: str, rng: np.random.Generator | None) -> int:
    if "-" in token:
        lo, hi = (int(x) for x in token.split("-", 1))
        if lo > hi:
            raise UsageError(f"empty range {token!r}")
        if rng is None:
            return hi
        return int(rng.integers(lo, hi + 1))
    return int(token)


def parse_graph(spec: str, seed: int = 0) -> Graph:
    """Build a graph from a specifier such as ``path:9`` or ``rand:5-20:0.3``.

    In ``rand`` specifiers ``n`` may be a range ``LO-HI``, drawn per seed.
    """
    kind, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "edge":
            return topology.path(2)
        if kind in ("path", "ring", "clique"):
            return topology.generate(kind, int(args[0]))
        if kind == "rand":
            rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
            n = _n_from(args[0], rng)
            return topology.random_connected(n, float(args[1]), seed=seed)
        if kind == "caterpillar":
            return topology.star_caterpillar(int(args[0]))
        if kind == "file":
            return topology.read_graph(rest)
        if kind == "fixture":
            if rest not in FIXTURES:
                raise UsageError(f"unknown fixture {rest!r}; choose from {sorted(FIXTURES)}")
            return FIXTURES[rest]()
    except (IndexError, ValueError) as exc:
        if isinstance(exc, StabilisError):
            raise
        raise UsageError(f"malformed graph specifier {spec!r}") from None
    raise UsageError(f"unknown graph kind in {spec!r}")


def parse_scheduler(spec: str) -> SchedulerSpec:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "sync":
            return SchedulerSpec("synchronous")
        if kind == "rr":
            return SchedulerSpec("round_robin")
        if kind == "random":
            parts = rest.split(":") if rest else []
            p = float(parts[0]) if parts else 0.5
            w = int(parts[1]) if len(parts) > 1 else None
            return SchedulerSpec("random_subset", p, w)
    except ValueError:
        raise UsageError(f"malformed scheduler specifier {spec!r}") from None
    raise UsageError(f"unknown scheduler {spec!r}; use sync, rr or random:p[:W]")


def colored(g: Graph, protocol: str, color_seed: int | None, seed: int) -> tuple[Graph, int | None]:
    """Attach greedy colors when the protocol needs them and the graph has none
    (or when a color seed is given explicitly)."""
    if not get_protocol(protocol).requires_colors and color_seed is None:
        return g, None
    if g.colors is not None and color_seed is None:
        return g, None
    cs = seed if color_seed is None else color_seed
    return g.with_colors(topology.greedy_local_coloring(g, cs)), cs


# -- commands -----------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", required=True, choices=sorted(PROTOCOLS))
    p.add_argument("--graph", required=True, help="path:n ring:n clique:n rand:n:p caterpillar:D "
                   "edge file:PATH fixture:exds|exmatching|fivechain")
    p.add_argument("--color-seed", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="defaults to $STABILIS_SEED or 0")


def _add_run_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheduler", default="sync", help="sync | rr | random:p[:W]")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--init", default="random",
                   help="'random' or a named adversarial start of the protocol")


def _initial(g, proto, init: str, seed: int):
    if init == "random":
        return init_configuration(g, proto, "uniform", seed=seed)
    return init_configuration(g, proto, "adversarial", fixture=init)


def single_run(protocol: str, graph: str, scheduler: str, seed: int, max_steps: int,
               init: str = "random", color_seed: int | None = None):
    g, cs = colored(parse_graph(graph, seed), protocol, color_seed, seed)
    proto = get_protocol(protocol)
    sched = parse_scheduler(scheduler)
    trace = run(g, proto, sched, _initial(g, proto, init, seed), seed=seed, max_steps=max_steps)
    report = build_report(trace)
    report.extra["color_seed"] = cs
    report.extra["colors_auto"] = cs is not None
    report.extra["graph_spec"] = graph
    return trace, report


def cmd_run(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    if args.max_steps < 1:
        raise UsageError("--max-steps must be >= 1")
    trace, report = single_run(args.protocol, args.graph, args.scheduler, seed,
                               args.max_steps, args.init, args.color_seed)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_jsonl())
    out = report.to_json()
    if args.timestamp:
        out["timestamp"] = datetime.now(timezone.utc).isoformat()
    print(json.dumps(out, sort_keys=True, indent=2))
    if not report.converged:
        return EXIT_BUDGET
    return EXIT_OK if report.predicate_ok else EXIT_PREDICATE


SWEEP_COLUMNS = ["trial", "seed", "n", "m", "max_degree", "num_colors", "converged", "steps",
                 "rounds", "bound", "within_bound", "one_stable_count", "stable_lb"]


def _sweep_row(job) -> dict:
    trial, protocol, graph, scheduler, seed, max_steps, init, color_seed = job
    _, r = single_run(protocol, graph, scheduler, seed, max_steps, init, color_seed)
    bound = {"mis": r.bounds["mis_round_bound"],
             "matching": r.bounds["matching_round_bound"]}.get(protocol)
    return {
        "trial": trial, "seed": seed, "n": r.graph["n"], "m": r.graph["m"],
        "max_degree": r.graph["max_degree"], "num_colors": r.graph["num_colors"],
        "converged": r.converged, "steps": r.steps, "rounds": r.rounds, "bound": bound,
        "within_bound": r.within_bound, "one_stable_count": r.one_stable_count,
        "stable_lb": r.stable_lb,
    }


def cmd_sweep(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    base = default_seed() if args.seed is None else args.seed
    parse_scheduler(args.scheduler)
    jobs = [(i, args.protocol, args.graph, args.scheduler, base + i, args.max_steps,
             args.init, args.color_seed) for i in range(args.trials)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    sys.stdout.write(buf.getvalue())

    converged = sum(r["converged"] for r in rows)
    bound_viol = sum(r["within_bound"] is False for r in rows)
    stable_viol = sum(r["stable_lb"] is not None and r["one_stable_count"] is not None
                      and r["one_stable_count"] < r["stable_lb"] for r in rows)
    print(f"# trials={len(rows)} converged={converged} convergence_rate={converged / len(rows):.4f} "
          f"bound_violations={bound_viol} stable_lb_violations={stable_viol}", file=sys.stderr)
    return EXIT_OK if converged == len(rows) else EXIT_BUDGET


def _fmt_comm(proto, comm) -> str:
    names = [v.name for v in proto.comm_vars]
    return " | ".join(
        f"{p}: " + ",".join(f"{k}={v}" for k, v in zip(names, state))
        for p, state in enumerate(comm)
    )


def cmd_enumerate(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    g = parse_graph(args.graph, seed)
    proto = get_protocol(args.protocol)
    colorings = None
    if proto.requires_colors:
        if args.color_seed is not None:
            g, _ = colored(g, args.protocol, args.color_seed, seed)
        elif g.colors is None:
            colorings = "all"
    try:
        silent = enumerate_silent_configs(g, proto, args.max_states, colorings)
        witness = None
        if args.witness:
            witness = neighbor_completeness_witness(g, proto, max_states=args.max_states,
                                                    colorings=colorings)
    except StateSpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    if colorings == "all":
        print("colorings: one per acyclic orientation")
    print(f"silent communication configurations: {len(silent)}")
    for comm in silent:
        print("  " + _fmt_comm(proto, comm))
    if args.witness:
        if witness is None:
            print("neighbor-completeness witness: none")
        else:
            print("neighbor-completeness witness:")
            print(witness.describe(proto))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stabilis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate once and print a JSON metrics report")
    _add_common(p)
    _add_run_opts(p)
    p.add_argument("--trace", help="write the step trace as JSON lines to this file")
    p.add_argument("--timestamp", action="store_true", help="stamp the report with wall time")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat runs over seeds and print CSV")
    _add_common(p)
    _add_run_opts(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("enumerate", help="list silent communication configurations")
    _add_common(p)
    p.add_argument("--witness", action="store_true", help="also search a neighbor-completeness witness")
    p.add_argument("--max-states", type=int, default=STATE_CAP)
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateSpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except StabilisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
