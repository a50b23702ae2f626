"""Execution of guarded-action protocols under fair distributed schedulers.

A step evaluates the guards of every selected process against the pre-step
configuration, fires the first enabled action of each, and applies all
writes at once. Every dereference of a neighbor's communication variable or
constant is recorded, so a trace carries the per-step read sets needed by
the communication metrics.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DomainViolation,
    EmptySelection,
    IllegalRead,
    IllegalWrite,
    InvalidParams,
    MissingColors,
    NotLocallyProper,
)
from .topology import Graph

if TYPE_CHECKING:
    from .protocols import Action, ProtocolSpec


# -- states -------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessState:
    comm: Mapping[str, Any]
    internal: Mapping[str, Any]
    constants: Mapping[str, Any] = field(default_factory=dict)

    def get(self, name: str) -> Any:
        if name in self.comm:
            return self.comm[name]
        if name in self.internal:
            return self.internal[name]
        return self.constants[name]

    def updated(self, writes: Mapping[str, Any]) -> ProcessState:
        if not writes:
            return self
        comm = dict(self.comm)
        internal = dict(self.internal)
        for name, value in writes.items():
            if name in comm:
                comm[name] = value
            elif name in internal:
                internal[name] = value
            else:
                raise IllegalWrite(f"no writable variable {name!r}")
        return ProcessState(comm, internal, self.constants)

    def comm_key(self) -> tuple:
        return tuple(self.comm.values())

    def internal_key(self) -> tuple:
        return tuple(self.internal.values())

    def as_dict(self) -> dict[str, Any]:
        return {**self.comm, **self.internal}


@dataclass(frozen=True)
class Configuration:
    protocol: str
    states: tuple[ProcessState, ...]

    @property
    def n(self) -> int:
        return len(self.states)

    def __getitem__(self, p: int) -> ProcessState:
        return self.states[p]

    def value(self, p: int, name: str) -> Any:
        return self.states[p].get(name)

    def values(self, name: str) -> tuple:
        return tuple(st.get(name) for st in self.states)

    def comm_config(self) -> tuple[tuple, ...]:
        return tuple(st.comm_key() for st in self.states)

    def key(self) -> tuple:
        return tuple((st.comm_key(), st.internal_key()) for st in self.states)

    def replace(self, updates: Mapping[int, Mapping[str, Any]]) -> Configuration:
        if not updates:
            return self
        states = list(self.states)
        for p, writes in updates.items():
            states[p] = states[p].updated(writes)
        return Configuration(self.protocol, tuple(states))


class View:
    """What process ``p`` may see: all of its own variables, plus the
    communication variables and constants of a neighbor named by local index.

    Neighbor dereferences are accumulated in ``reads``.
    """

    __slots__ = ("g", "states", "p", "state", "reads", "action")

    def __init__(self, g: Graph, states: Sequence[ProcessState], p: int,
                 state: ProcessState | None = None):
        self.g = g
        self.states = states
        self.p = p
        self.state = states[p] if state is None else state
        self.reads: set[int] = set()
        self.action: Action | None = None

    @property
    def degree(self) -> int:
        return len(self.g.channel[self.p])

    @property
    def max_degree(self) -> int:
        return self.g.max_degree

    def own(self, name: str) -> Any:
        return self.state.get(name)

    def at(self, index: int, name: str) -> Any:
        """Read variable ``name`` of the neighbor behind local index ``index``."""
        ch = self.g.channel[self.p]
        if not isinstance(index, (int, np.integer)) or not 1 <= index <= len(ch):
            raise IllegalRead(f"process {self.p} has no channel {index!r}")
        q = ch[index - 1]
        action = self.action
        if action is not None and not any(
            var == name and (ptr == "*" or self.state.get(ptr) == index)
            for ptr, var in action.reads
        ):
            raise IllegalRead(f"action {action.name!r} did not declare reading {name!r} there")
        st = self.states[q]
        if name in st.comm:
            value = st.comm[name]
        elif name in st.constants:
            value = st.constants[name]
        else:
            raise IllegalRead(f"{name!r} of process {q} is not readable by neighbors")
        self.reads.add(q)
        return value

    def my_index_at(self, index: int) -> int:
        """Local index under which the neighbor behind ``index`` knows ``p``."""
        q = self.g.channel[self.p][index - 1]
        return self.g.local_index(q, self.p)

    def advance(self, name: str = "cur") -> int:
        return self.own(name) % self.degree + 1


def first_enabled(proto: ProtocolSpec, view: View) -> tuple[int, Action] | None:
    """Index (1-based) and action of the highest-priority enabled action."""
    for i, action in enumerate(proto.actions, start=1):
        view.action = action
        if action.guard(view):
            return i, action
    return None


# -- initial configurations ---------------------------------------------------

def _constants_for(g: Graph, proto: ProtocolSpec, p: int) -> dict[str, Any]:
    if not proto.constants:
        return {}
    if g.colors is None:
        raise MissingColors(f"protocol {proto.name!r} needs color constants on the graph")
    return {var.name: g.colors[p] for var in proto.constants}


def _check_colors(g: Graph, proto: ProtocolSpec) -> None:
    if proto.constants:
        if g.colors is None:
            raise MissingColors(f"protocol {proto.name!r} needs color constants on the graph")
        if not g.is_locally_proper():
            raise NotLocallyProper("color constants are not locally proper")


def make_state(g: Graph, proto: ProtocolSpec, p: int, values: Mapping[str, Any]) -> ProcessState:
    comm, internal = {}, {}
    for var in proto.comm_vars:
        comm[var.name] = _checked(g, p, var, values)
    for var in proto.internal_vars:
        internal[var.name] = _checked(g, p, var, values)
    extra = set(values) - set(comm) - set(internal)
    if extra:
        raise DomainViolation(f"process {p}: unknown variables {sorted(extra)}")
    return ProcessState(comm, internal, _constants_for(g, proto, p))


def _checked(g: Graph, p: int, var, values: Mapping[str, Any]) -> Any:
    if var.name not in values:
        raise DomainViolation(f"process {p}: missing value for {var.name!r}")
    value = values[var.name]
    if value not in var.domain(g, p):
        raise DomainViolation(
            f"process {p}: {var.name}={value!r} outside domain {list(var.domain(g, p))}"
        )
    return value


def init_configuration(
    g: Graph,
    proto: ProtocolSpec,
    mode: str = "uniform",
    *,
    seed: int = 0,
    states: Sequence[Mapping[str, Any]] | None = None,
    fixture: str | None = None,
) -> Configuration:
    """Initial configuration in one of three modes.

    ``uniform`` draws every variable independently and uniformly from its
    domain, ``explicit`` takes one value mapping per process, and
    ``adversarial`` builds one of the protocol's named bad starts.
    """
    _check_colors(g, proto)
    if mode == "uniform":
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1A17]))
        per_process = []
        for p in range(g.n):
            values = {}
            for var in (*proto.comm_vars, *proto.internal_vars):
                dom = tuple(var.domain(g, p))
                values[var.name] = dom[int(rng.integers(len(dom)))]
            per_process.append(values)
    elif mode == "explicit":
        if states is None or len(states) != g.n:
            raise DomainViolation(f"explicit mode needs exactly {g.n} state mappings")
        per_process = list(states)
    elif mode == "adversarial":
        if fixture not in proto.fixtures:
            raise InvalidParams(
                f"unknown fixture {fixture!r} for {proto.name}; choose from {sorted(proto.fixtures)}"
            )
        per_process = [proto.fixtures[fixture](g, p) for p in range(g.n)]
    else:
        raise InvalidParams(f"unknown init mode {mode!r}")
    return Configuration(
        proto.name, tuple(make_state(g, proto, p, v) for p, v in enumerate(per_process))
    )


# -- steps --------------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    index: int
    selected: tuple[int, ...]
    fired: dict[int, int | None]
    reads: dict[int, tuple[int, ...]]
    writes: dict[int, tuple[tuple[str, Any, Any], ...]]
    comm_writers: tuple[int, ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "step": self.index,
            "selected": list(self.selected),
            "fired": {str(p): ("disabled" if a is None else a) for p, a in self.fired.items()},
            "reads": {str(p): list(r) for p, r in self.reads.items()},
            "writes": {str(p): [list(w) for w in ws] for p, ws in self.writes.items()},
        }


def execute_step(
    g: Graph,
    cfg: Configuration,
    selected: Sequence[int],
    proto: ProtocolSpec,
    rngs: Sequence[np.random.Generator] | None = None,
    index: int = 0,
) -> tuple[Configuration, StepRecord]:
    """One atomic step: every selected process fires its highest-priority
    enabled action, all evaluated against ``cfg``."""
    chosen = tuple(sorted(set(selected)))
    if not chosen:
        raise EmptySelection("a step needs a nonempty selection")
    comm_names = proto.comm_names
    fired: dict[int, int | None] = {}
    reads: dict[int, tuple[int, ...]] = {}
    writes: dict[int, tuple[tuple[str, Any, Any], ...]] = {}
    updates: dict[int, dict[str, Any]] = {}
    comm_writers = []
    for p in chosen:
        view = View(g, cfg.states, p)
        hit = first_enabled(proto, view)
        if hit is None:
            fired[p] = None
        else:
            i, action = hit
            new = action.effect(view, None if rngs is None else rngs[p])
            if not set(new) <= action.writes:
                raise IllegalWrite(
                    f"action {i} of {proto.name} wrote {sorted(set(new) - action.writes)}"
                )
            fired[p] = i
            own = cfg.states[p]
            writes[p] = tuple((name, own.get(name), value) for name, value in new.items())
            updates[p] = new
            if comm_names.intersection(new):
                comm_writers.append(p)
        reads[p] = tuple(sorted(view.reads))
    record = StepRecord(index, chosen, fired, reads, writes, tuple(comm_writers))
    return cfg.replace(updates), record


# -- schedulers ---------------------------------------------------------------

SCHEDULER_KINDS = ("synchronous", "random_subset", "round_robin")


@dataclass(frozen=True)
class SchedulerSpec:
    kind: str = "synchronous"
    p_select: float = 0.5
    window: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULER_KINDS:
            raise InvalidParams(f"unknown scheduler {self.kind!r}")
        if self.kind == "random_subset" and not 0 < self.p_select <= 1:
            raise InvalidParams("p_select must be in (0, 1]")
        if self.window is not None and self.window < 1:
            raise InvalidParams("fairness window must be >= 1")

    def fairness_window(self, n: int) -> int:
        if self.kind == "synchronous":
            return 1
        if self.kind == "round_robin":
            return n
        return self.window if self.window is not None else 8 * n

    def describe(self) -> str:
        if self.kind == "random_subset":
            w = "" if self.window is None else f":{self.window}"
            return f"random:{self.p_select:g}{w}"
        return {"synchronous": "sync", "round_robin": "rr"}[self.kind]


class Scheduler:
    """Stateful selection stream; any process left out for ``W - 1``
    consecutive steps is forced into the next selection."""

    def __init__(self, spec: SchedulerSpec, n: int, rng: np.random.Generator):
        if n < 1:
            raise InvalidParams("scheduler needs n >= 1")
        self.spec = spec
        self.n = n
        self.rng = rng
        self.window = spec.fairness_window(n)
        self.idle = np.zeros(n, dtype=np.int64)
        self.step = 0

    def next_selection(self) -> tuple[int, ...]:
        n = self.n
        kind = self.spec.kind
        if kind == "synchronous":
            chosen = np.ones(n, dtype=bool)
        elif kind == "round_robin":
            chosen = np.zeros(n, dtype=bool)
            chosen[self.step % n] = True
        else:
            chosen = self.rng.random(n) < self.spec.p_select
            chosen |= self.idle >= self.window - 1
            if not chosen.any():
                chosen[int(self.rng.integers(n))] = True
        self.idle = np.where(chosen, 0, self.idle + 1)
        self.step += 1
        return tuple(np.flatnonzero(chosen).tolist())


def next_selection(sched: Scheduler) -> tuple[int, ...]:
    return sched.next_selection()


def spawn_streams(seed: int, n: int) -> tuple[np.random.Generator, list[np.random.Generator]]:
    """Split one root seed into a scheduler stream and one stream per process."""
    children = np.random.SeedSequence(seed).spawn(n + 1)
    gens = [np.random.default_rng(c) for c in children]
    return gens[0], gens[1:]


# -- rounds -------------------------------------------------------------------

def round_boundaries(selections: Sequence[Sequence[int]], n: int) -> list[int]:
    """Step counts at which rounds close: boundary ``b`` means the round ended
    with step ``b - 1`` (0-based), i.e. after ``b`` steps."""
    bounds = []
    pending = set(range(n))
    for i, sel in enumerate(selections):
        pending.difference_update(sel)
        if not pending:
            bounds.append(i + 1)
            pending = set(range(n))
    return bounds


def rounds_elapsed(selections: Sequence[Sequence[int]], n: int, upto: int) -> int:
    """Rounds touched by the first ``upto`` steps, a trailing partial round included."""
    bounds = round_boundaries(selections[:upto], n)
    done = len(bounds)
    last = bounds[-1] if bounds else 0
    return done + (1 if upto > last else 0)


# -- traces -------------------------------------------------------------------

@dataclass
class Trace:
    graph: Graph
    protocol: ProtocolSpec
    scheduler: SchedulerSpec
    seed: int
    initial: Configuration
    steps: list[StepRecord]
    final: Configuration
    converged: bool
    silence_step: int | None
    max_steps: int

    @property
    def selections(self) -> list[tuple[int, ...]]:
        return [s.selected for s in self.steps]

    def round_boundaries(self) -> list[int]:
        return round_boundaries(self.selections, self.graph.n)

    def convergence_rounds(self) -> int | None:
        if self.silence_step is None:
            return None
        return rounds_elapsed(self.selections, self.graph.n, self.silence_step)

    def configurations(self) -> Iterator[Configuration]:
        """Replay writes from the initial configuration: yields every γ_i."""
        cfg = self.initial
        yield cfg
        for step in self.steps:
            cfg = cfg.replace({p: {name: new for name, _, new in ws}
                               for p, ws in step.writes.items()})
            yield cfg

    def replay(self) -> Configuration:
        cfg = self.initial
        for cfg in self.configurations():
            pass
        return cfg

    def comm_write_steps(self) -> list[int]:
        return [s.index for s in self.steps if s.comm_writers]

    def to_jsonl(self) -> str:
        lines = [json.dumps(s.to_json(), sort_keys=True) for s in self.steps]
        summary = {
            "protocol": self.protocol.name,
            "scheduler": self.scheduler.describe(),
            "seed": self.seed,
            "steps": len(self.steps),
            "round_boundaries": self.round_boundaries(),
            "rounds": len(self.round_boundaries()),
            "converged": self.converged,
            "silence_step": self.silence_step,
            "initial": [st.as_dict() for st in self.initial.states],
        }
        lines.append(json.dumps({"summary": summary}, sort_keys=True, default=_jsonable))
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


def _jsonable(x: Any) -> Any:
    if isinstance(x, np.integer):
        return int(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def rounds(t: Trace) -> int:
    """Completed rounds in the whole trace."""
    return len(t.round_boundaries())


# -- runs ---------------------------------------------------------------------

def verification_window_done(counts: np.ndarray, max_degree: int) -> bool:
    return bool((counts >= 2 * max_degree).all())


def run(
    g: Graph,
    proto: ProtocolSpec,
    sched: SchedulerSpec,
    init: Configuration,
    *,
    seed: int = 0,
    max_steps: int = 100_000,
    stop: str = "silence",
) -> Trace:
    """Run from ``init``.

    With ``stop="silence"`` the run halts once the current configuration is
    silent, after appending a verification window in which every process is
    selected at least ``2Δ`` times. With ``stop="max_steps"`` exactly
    ``max_steps`` steps are executed. A run that exhausts its budget comes
    back with ``converged=False``.
    """
    from .analysis import is_silent

    if max_steps < 1:
        raise InvalidParams("max_steps must be >= 1")
    if stop not in ("silence", "max_steps"):
        raise InvalidParams(f"unknown stop rule {stop!r}")
    if init.protocol != proto.name:
        raise InvalidParams(f"initial configuration belongs to {init.protocol!r}")
    sched_rng, proc_rngs = spawn_streams(seed, g.n)
    scheduler = Scheduler(sched, g.n, sched_rng)

    cfg = init
    steps: list[StepRecord] = []
    silence_step = 0 if is_silent(g, proto, cfg) else None

    while len(steps) < max_steps:
        if stop == "silence" and silence_step is not None:
            break
        cfg, rec = execute_step(g, cfg, scheduler.next_selection(), proto, proc_rngs, len(steps))
        steps.append(rec)
        if silence_step is None and is_silent(g, proto, cfg):
            silence_step = len(steps)

    if stop == "silence" and silence_step is not None:
        counts = np.zeros(g.n, dtype=np.int64)
        while not verification_window_done(counts, g.max_degree):
            cfg, rec = execute_step(g, cfg, scheduler.next_selection(), proto, proc_rngs, len(steps))
            steps.append(rec)
            counts[list(rec.selected)] += 1
            if rec.comm_writers:
                raise AssertionError(
                    f"communication write at step {rec.index} after silence was detected"
                )

    return Trace(
        graph=g,
        protocol=proto,
        scheduler=sched,
        seed=seed,
        initial=init,
        steps=steps,
        final=cfg,
        converged=silence_step is not None,
        silence_step=silence_step,
        max_steps=max_steps,
    )
