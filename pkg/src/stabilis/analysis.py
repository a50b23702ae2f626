"""Silence detection, communication-efficiency metrics and exhaustive
searches over small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence, Union

from .engine import Configuration, ProcessState, Trace, View, first_enabled
from .errors import InvalidParams, StateSpaceTooLarge, SuffixTooShort, TooLarge
from .predicates import predicate_for
from .protocols import ProtocolSpec
from .topology import Graph, longest_elementary_path, orientation_colorings

STATE_CAP = 10**6


class _NoRandomness:
    """Stand-in generator for closure exploration: internal-only moves must be
    deterministic for the closure to be exact."""

    def __getattr__(self, name):
        raise RuntimeError("internal-only action used randomness during closure exploration")


_NO_RNG = _NoRandomness()


def _quiet_closure(g: Graph, proto: ProtocolSpec, states: Sequence[ProcessState], p: int,
                   start: ProcessState, budget: list[int]) -> bool:
    """True iff no internal state of ``p`` reachable from ``start`` while all
    communication variables stay put enables a communication-writing action.

    Guards never see a neighbor's internal variables, so with communication
    frozen each process evolves on its own and the joint closure factors into
    per-process closures.
    """
    comm = proto.comm_names
    seen = {start.internal_key()}
    stack = [start]
    while stack:
        st = stack.pop()
        view = View(g, states, p, st)
        hit = first_enabled(proto, view)
        if hit is None:
            continue
        action = hit[1]
        if action.writes & comm:
            return False
        nxt = st.updated(action.effect(view, _NO_RNG))
        key = nxt.internal_key()
        if key not in seen:
            budget[0] -= 1
            if budget[0] < 0:
                raise StateSpaceTooLarge("internal closure exceeded the state cap")
            seen.add(key)
            stack.append(nxt)
    return True


def is_silent(g: Graph, proto: ProtocolSpec, cfg: Configuration, cap: int = STATE_CAP) -> bool:
    """True iff no fair continuation of ``cfg`` ever writes a communication variable."""
    budget = [cap]
    return all(_quiet_closure(g, proto, cfg.states, p, cfg.states[p], budget)
               for p in range(g.n))


# -- metrics over traces ------------------------------------------------------

def efficiency_k(t: Trace) -> int:
    """Largest number of distinct neighbors any selected process read in one step."""
    if not t.steps:
        raise InvalidParams("efficiency of an empty trace is undefined")
    return max(len(r) for step in t.steps for r in step.reads.values())


@dataclass(frozen=True)
class StabilityProfile:
    suffix_start: int
    read_sets: tuple[frozenset[int], ...]
    convergence_step: int | None = None
    convergence_rounds: int | None = None

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.read_sets)

    def count_at_most(self, k: int) -> int:
        return sum(1 for lvl in self.levels if lvl <= k)

    @property
    def one_stable_count(self) -> int:
        return self.count_at_most(1)

    def one_stable(self) -> list[int]:
        return [p for p, lvl in enumerate(self.levels) if lvl <= 1]


def stability_profile(t: Trace, suffix_start: int | None = None) -> StabilityProfile:
    """Per-process union of neighbors read from ``suffix_start`` on.

    The suffix must select every process at least ``2Δ`` times so that scanning
    pointers complete full cycles.
    """
    if suffix_start is None:
        if t.silence_step is None:
            raise SuffixTooShort("trace never became silent; give suffix_start explicitly")
        suffix_start = t.silence_step
    g = t.graph
    need = 2 * g.max_degree
    counts = [0] * g.n
    unions: list[set[int]] = [set() for _ in range(g.n)]
    for step in t.steps[suffix_start:]:
        for p in step.selected:
            counts[p] += 1
        for p, r in step.reads.items():
            unions[p].update(r)
    short = [p for p in range(g.n) if counts[p] < need]
    if short:
        raise SuffixTooShort(
            f"processes {short[:5]} selected fewer than {need} times after step {suffix_start}"
        )
    return StabilityProfile(
        suffix_start=suffix_start,
        read_sets=tuple(frozenset(u) for u in unions),
        convergence_step=t.silence_step,
        convergence_rounds=t.convergence_rounds(),
    )


# -- bounds -------------------------------------------------------------------

def mis_round_bound(g: Graph) -> int | None:
    return None if g.colors is None else g.max_degree * g.num_colors


def matching_round_bound(g: Graph) -> int:
    return (g.max_degree + 1) * g.n + 2


def mis_stable_lower_bound(g: Graph) -> int | None:
    try:
        return (longest_elementary_path(g) + 1) // 2
    except TooLarge:
        return None


def matching_stable_lower_bound(g: Graph) -> int:
    return 2 * math.ceil(g.m / (2 * g.max_degree - 1))


@dataclass
class MetricsReport:
    protocol: str
    converged: bool
    steps: int | None
    total_steps: int
    rounds: int | None
    efficiency_k: int | None
    one_stable_count: int | None
    predicate_ok: bool
    bounds: dict[str, int | None]
    within_bound: bool | None
    stable_lb: int | None
    graph: dict[str, int | None] = field(default_factory=dict)
    scheduler: str = ""
    seed: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d.update(d.pop("extra"))
        return d


def build_report(t: Trace, with_lmax: bool = True) -> MetricsReport:
    g = t.graph
    proto = t.protocol
    bounds = {
        "mis_round_bound": mis_round_bound(g),
        "matching_round_bound": matching_round_bound(g),
        "mis_stable_lb": mis_stable_lower_bound(g) if with_lmax else None,
        "matching_stable_lb": matching_stable_lower_bound(g),
    }
    rounds = t.convergence_rounds()
    one_stable = None
    if t.converged:
        one_stable = stability_profile(t).one_stable_count
    round_bound = {"mis": bounds["mis_round_bound"],
                   "matching": bounds["matching_round_bound"]}.get(proto.name)
    stable_lb = {"mis": bounds["mis_stable_lb"],
                 "matching": bounds["matching_stable_lb"]}.get(proto.name)
    within = None
    if round_bound is not None and rounds is not None:
        within = rounds <= round_bound
    return MetricsReport(
        protocol=proto.name,
        converged=t.converged,
        steps=t.silence_step,
        total_steps=len(t.steps),
        rounds=rounds,
        efficiency_k=efficiency_k(t) if t.steps else None,
        one_stable_count=one_stable,
        predicate_ok=predicate_for(proto.predicate_id)(g, t.final),
        bounds=bounds,
        within_bound=within,
        stable_lb=stable_lb,
        graph={"n": g.n, "m": g.m, "max_degree": g.max_degree, "num_colors": g.num_colors},
        scheduler=t.scheduler.describe(),
        seed=t.seed,
    )


# -- exhaustive enumeration ---------------------------------------------------

def _space_size(g: Graph, proto: ProtocolSpec) -> int:
    return math.prod(len(proto.comm_domain(g, p)) for p in range(g.n))


def _state(proto: ProtocolSpec, comm: tuple, internal: tuple, constants) -> ProcessState:
    return ProcessState(
        dict(zip((v.name for v in proto.comm_vars), comm)),
        dict(zip((v.name for v in proto.internal_vars), internal)),
        constants,
    )


def _constants(g: Graph, proto: ProtocolSpec, p: int) -> dict[str, Any]:
    if not proto.constants:
        return {}
    from .engine import _constants_for
    return _constants_for(g, proto, p)


class _SilenceOracle:
    """Memoized test: can process ``p`` sit silently given its own and its
    neighbors' communication states (for some internal state)?"""

    def __init__(self, g: Graph, proto: ProtocolSpec, cap: int):
        self.g = g
        self.proto = proto
        self.cap = cap
        self.consts = [_constants(g, proto, p) for p in range(g.n)]
        self.internals = [proto.internal_domain(g, p) for p in range(g.n)]
        self.memo: dict[tuple, tuple | None] = {}

    def quiet_internal(self, comm: Sequence[tuple], p: int) -> tuple | None:
        key = (p, comm[p], tuple(comm[q] for q in self.g.channel[p]))
        if key in self.memo:
            return self.memo[key]
        states = [_state(self.proto, comm[q], self.internals[q][0], self.consts[q])
                  if q != p else None for q in range(self.g.n)]
        found = None
        for internal in self.internals[p]:
            own = _state(self.proto, comm[p], internal, self.consts[p])
            states[p] = own
            if _quiet_closure(self.g, self.proto, states, p, own, [self.cap]):
                found = internal
                break
        self.memo[key] = found
        return found

    def extend(self, comm: Sequence[tuple]) -> Configuration | None:
        internals = []
        for p in range(self.g.n):
            internal = self.quiet_internal(comm, p)
            if internal is None:
                return None
            internals.append(internal)
        return Configuration(self.proto.name, tuple(
            _state(self.proto, comm[p], internals[p], self.consts[p]) for p in range(self.g.n)
        ))


Colorings = Union[str, Sequence[Sequence[int]], None]


def colored_instances(g: Graph, proto: ProtocolSpec, colorings: Colorings = None) -> list[Graph]:
    """Graphs to quantify over: ``g`` itself, or ``g`` under each coloring.

    ``colorings="all"`` stands for one coloring per acyclic orientation.
    Protocols without color constants ignore the argument.
    """
    if not proto.requires_colors or colorings is None:
        return [g]
    if isinstance(colorings, str):
        if colorings != "all":
            raise InvalidParams(f"unknown coloring family {colorings!r}")
        colorings = orientation_colorings(g)
    return [g.with_colors(c) for c in dict.fromkeys(tuple(c) for c in colorings)]


def _silent_sources(g: Graph, proto: ProtocolSpec, colorings: Colorings,
                    max_states: int) -> dict[tuple, Configuration]:
    instances = colored_instances(g, proto, colorings)
    size = _space_size(g, proto) * len(instances)
    if size > max_states:
        raise StateSpaceTooLarge(f"{size} communication configurations exceed cap {max_states}")
    sources: dict[tuple, Configuration] = {}
    for inst in instances:
        oracle = _SilenceOracle(inst, proto, max_states)
        for comm in itertools.product(*(proto.comm_domain(inst, p) for p in range(inst.n))):
            if comm in sources:
                continue
            if all(oracle.quiet_internal(comm, p) is not None for p in range(inst.n)):
                sources[comm] = oracle.extend(comm)
    return dict(sorted(sources.items(), key=lambda kv: repr(kv[0])))


def enumerate_silent_configs(g: Graph, proto: ProtocolSpec, max_states: int = STATE_CAP,
                             colorings: Colorings = None) -> list[tuple[tuple, ...]]:
    """Every communication configuration that some choice of internal
    variables makes silent, in sorted order.

    With ``colorings`` the search runs on each colored instance and returns the
    union of the communication configurations found.
    """
    return list(_silent_sources(g, proto, colorings, max_states))


def extend_to_silent(g: Graph, proto: ProtocolSpec, comm: Sequence[tuple],
                     max_states: int = STATE_CAP) -> Configuration | None:
    """A full silent configuration with communication configuration ``comm``, if any."""
    return _SilenceOracle(g, proto, max_states).extend(comm)


@dataclass(frozen=True)
class NeighborCompletenessWitness:
    process: int
    alpha_p: tuple
    partners: dict[int, tuple]
    silent_configs: dict[int, Configuration]

    def describe(self, proto: ProtocolSpec) -> str:
        names = [v.name for v in proto.comm_vars]

        def fmt(alpha):
            return ", ".join(f"{k}={v}" for k, v in zip(names, alpha))

        lines = [f"process {self.process}: alpha_p = ({fmt(self.alpha_p)})"]
        for q, alpha_q in self.partners.items():
            lines.append(f"  neighbor {q}: alpha_q = ({fmt(alpha_q)})")
        return "\n".join(lines)


def _always_violated(instances: list[Graph], proto: ProtocolSpec, predicate: Callable, p: int,
                     alpha_p: tuple, q: int, alpha_q: tuple, max_states: int) -> bool:
    """Every configuration (any instance, any other states) with ``alpha_p`` at
    ``p`` and ``alpha_q`` at ``q`` violates the predicate."""
    for g in instances:
        choices = []
        for r in range(g.n):
            comms = [alpha_p] if r == p else [alpha_q] if r == q else proto.comm_domain(g, r)
            choices.append([(c, i) for c in comms for i in proto.internal_domain(g, r)])
        size = math.prod(len(c) for c in choices)
        if size > max_states:
            raise StateSpaceTooLarge(f"{size} configurations exceed cap {max_states}")
        consts = [_constants(g, proto, r) for r in range(g.n)]
        for combo in itertools.product(*choices):
            cfg = Configuration(proto.name, tuple(
                _state(proto, c, i, consts[r]) for r, (c, i) in enumerate(combo)
            ))
            if predicate(g, cfg):
                return False
    return True


def _witness_for(g, proto, predicate, p, sources, instances, max_states):
    occurring = [sorted({c[r] for c in sources}, key=repr) for r in range(g.n)]
    for alpha_p in occurring[p]:
        partners = {}
        for q in g.channel[p]:
            for alpha_q in occurring[q]:
                if _always_violated(instances, proto, predicate, p, alpha_p, q, alpha_q,
                                    max_states):
                    partners[q] = alpha_q
                    break
            else:
                break
        if len(partners) == g.degree(p):
            configs = {p: next(cfg for c, cfg in sources.items() if c[p] == alpha_p)}
            for q, alpha_q in partners.items():
                configs[q] = next(cfg for c, cfg in sources.items() if c[q] == alpha_q)
            return NeighborCompletenessWitness(p, alpha_p, partners, configs)
    return None


def neighbor_completeness_witness(
    g: Graph,
    proto: ProtocolSpec,
    predicate: Callable | None = None,
    max_states: int = STATE_CAP,
    colorings: Colorings = None,
) -> NeighborCompletenessWitness | None:
    """First process (by id) with a state occurring in a silent configuration
    that clashes, for each neighbor, with a silent-occurring neighbor state."""
    predicate = predicate or predicate_for(proto.predicate_id)
    sources = _silent_sources(g, proto, colorings, max_states)
    instances = colored_instances(g, proto, colorings)
    for p in range(g.n):
        w = _witness_for(g, proto, predicate, p, sources, instances, max_states)
        if w is not None:
            return w
    return None


def neighbor_completeness_witnesses(
    g: Graph,
    proto: ProtocolSpec,
    predicate: Callable | None = None,
    max_states: int = STATE_CAP,
    colorings: Colorings = None,
) -> dict[int, NeighborCompletenessWitness | None]:
    """Witness per process; the instance is neighbor-complete iff none is missing."""
    predicate = predicate or predicate_for(proto.predicate_id)
    sources = _silent_sources(g, proto, colorings, max_states)
    instances = colored_instances(g, proto, colorings)
    return {p: _witness_for(g, proto, predicate, p, sources, instances, max_states)
            for p in range(g.n)}
