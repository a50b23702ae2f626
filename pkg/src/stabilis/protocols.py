"""COLORING, MIS and MATCHING as prioritized guarded actions.

Each action declares the variables it writes and the neighbor variables it
may read, as ``(pointer, variable)`` pairs where ``pointer`` names the own
variable holding the local index of the neighbor read. All three protocols
read only through ``cur``, which makes them 1-efficient by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .errors import InvalidParams
from .topology import Graph

DOMINATOR = "Dominator"
DOMINATED = "dominated"


@dataclass(frozen=True)
class Variable:
    name: str
    domain: Callable[[Graph, int], range | tuple] | None = None


@dataclass(frozen=True)
class Action:
    name: str
    guard: Callable[[Any], bool]
    effect: Callable[[Any, Any], dict[str, Any]]
    writes: frozenset[str]
    reads: frozenset[tuple[str, str]] = frozenset()


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    comm_vars: tuple[Variable, ...]
    internal_vars: tuple[Variable, ...]
    constants: tuple[Variable, ...]
    actions: tuple[Action, ...]
    predicate_id: str
    fixtures: Mapping[str, Callable[[Graph, int], dict[str, Any]]] = field(default_factory=dict)

    @property
    def comm_names(self) -> frozenset[str]:
        return frozenset(v.name for v in self.comm_vars)

    @property
    def internal_names(self) -> frozenset[str]:
        return frozenset(v.name for v in self.internal_vars)

    @property
    def requires_colors(self) -> bool:
        return bool(self.constants)

    def comm_domain(self, g: Graph, p: int) -> list[tuple]:
        """All communication states of ``p``, as tuples in ``comm_vars`` order."""
        states: list[tuple] = [()]
        for var in self.comm_vars:
            states = [s + (x,) for s in states for x in var.domain(g, p)]
        return states

    def internal_domain(self, g: Graph, p: int) -> list[tuple]:
        states: list[tuple] = [()]
        for var in self.internal_vars:
            states = [s + (x,) for s in states for x in var.domain(g, p)]
        return states

    def declared_efficiency(self, max_degree: int) -> int:
        """Bound on distinct neighbors read per step, from the declared read sets.

        Each pointer variable designates one neighbor at a time; the wildcard
        pointer ``"*"`` may read every neighbor.
        """
        pointers = {ptr for a in self.actions for ptr, _ in a.reads}
        if "*" in pointers:
            return max_degree
        return len(pointers)


def _cur_domain(g: Graph, p: int) -> range:
    return range(1, g.degree(p) + 1)


CUR = Variable("cur", _cur_domain)
COLOR_CONSTANT = Variable("C")


# -- COLORING -----------------------------------------------------------------

def _palette(g: Graph, p: int) -> range:
    return range(1, g.max_degree + 2)


def _coloring_conflict(v) -> bool:
    return v.own("C") == v.at(v.own("cur"), "C")


def _coloring_redraw(v, rng) -> dict[str, Any]:
    return {"C": int(rng.integers(1, v.max_degree + 2)), "cur": v.advance()}


def coloring_protocol() -> ProtocolSpec:
    return ProtocolSpec(
        name="coloring",
        comm_vars=(Variable("C", _palette),),
        internal_vars=(CUR,),
        constants=(),
        actions=(
            Action("redraw", _coloring_conflict, _coloring_redraw,
                   frozenset({"C", "cur"}), frozenset({("cur", "C")})),
            Action("next", lambda v: not _coloring_conflict(v), lambda v, rng: {"cur": v.advance()},
                   frozenset({"cur"}), frozenset({("cur", "C")})),
        ),
        predicate_id="vertex_coloring",
        fixtures={"monochrome": lambda g, p: {"C": 1, "cur": 1}},
    )


# -- MIS ----------------------------------------------------------------------

def _mis_yield(v) -> bool:
    cur = v.own("cur")
    return (v.at(cur, "S") == DOMINATOR
            and v.at(cur, "C") < v.own("C")
            and v.own("S") == DOMINATOR)


def _mis_rise(v) -> bool:
    cur = v.own("cur")
    return ((v.at(cur, "S") == DOMINATED or v.own("C") < v.at(cur, "C"))
            and v.own("S") == DOMINATED)


def mis_protocol() -> ProtocolSpec:
    reads = frozenset({("cur", "S"), ("cur", "C")})
    return ProtocolSpec(
        name="mis",
        comm_vars=(Variable("S", lambda g, p: (DOMINATOR, DOMINATED)),),
        internal_vars=(CUR,),
        constants=(COLOR_CONSTANT,),
        actions=(
            Action("yield", _mis_yield, lambda v, rng: {"S": DOMINATED},
                   frozenset({"S"}), reads),
            Action("rise", _mis_rise, lambda v, rng: {"S": DOMINATOR, "cur": v.advance()},
                   frozenset({"S", "cur"}), reads),
            Action("scan", lambda v: v.own("S") == DOMINATOR, lambda v, rng: {"cur": v.advance()},
                   frozenset({"cur"}), frozenset()),
        ),
        predicate_id="mis",
        fixtures={
            "all_dominator": lambda g, p: {"S": DOMINATOR, "cur": 1},
            "all_dominated": lambda g, p: {"S": DOMINATED, "cur": 1},
        },
    )


# -- MATCHING -----------------------------------------------------------------

def pr_married(v) -> bool:
    cur = v.own("cur")
    return v.own("PR") == cur and v.at(cur, "PR") == v.my_index_at(cur)


def _mm_realign(v) -> bool:
    return v.own("PR") not in (0, v.own("cur"))


def _mm_flag(v) -> bool:
    return v.own("M") != pr_married(v)


def _mm_accept(v) -> bool:
    cur = v.own("cur")
    return v.own("PR") == 0 and v.at(cur, "PR") == v.my_index_at(cur)


def _mm_withdraw(v) -> bool:
    cur = v.own("cur")
    return (v.own("PR") == cur
            and v.at(cur, "PR") != v.my_index_at(cur)
            and (v.at(cur, "M") or v.at(cur, "C") < v.own("C")))


def _mm_propose(v) -> bool:
    cur = v.own("cur")
    return (v.own("PR") == 0
            and v.at(cur, "PR") == 0
            and v.own("C") < v.at(cur, "C")
            and not v.at(cur, "M"))


def _mm_skip(v) -> bool:
    cur = v.own("cur")
    return (v.own("PR") == 0
            and (v.at(cur, "PR") != 0 or v.at(cur, "C") < v.own("C") or v.at(cur, "M")))


def _misdirected(g: Graph, p: int) -> dict[str, Any]:
    return {"M": True, "PR": g.degree(p), "cur": 1}


def matching_protocol() -> ProtocolSpec:
    reads = frozenset({("cur", "PR"), ("cur", "M"), ("cur", "C")})
    set_pr = frozenset({"PR"})
    return ProtocolSpec(
        name="matching",
        comm_vars=(
            Variable("M", lambda g, p: (False, True)),
            Variable("PR", lambda g, p: range(0, g.degree(p) + 1)),
        ),
        internal_vars=(CUR,),
        constants=(COLOR_CONSTANT,),
        actions=(
            Action("realign", _mm_realign, lambda v, rng: {"PR": v.own("cur")}, set_pr),
            Action("flag", _mm_flag, lambda v, rng: {"M": pr_married(v)},
                   frozenset({"M"}), frozenset({("cur", "PR")})),
            Action("accept", _mm_accept, lambda v, rng: {"PR": v.own("cur")}, set_pr,
                   frozenset({("cur", "PR")})),
            Action("withdraw", _mm_withdraw, lambda v, rng: {"PR": 0}, set_pr, reads),
            Action("propose", _mm_propose, lambda v, rng: {"PR": v.own("cur")}, set_pr, reads),
            Action("skip", _mm_skip, lambda v, rng: {"cur": v.advance()},
                   frozenset({"cur"}), reads),
        ),
        predicate_id="maximal_matching",
        fixtures={
            "all_free": lambda g, p: {"M": False, "PR": 0, "cur": 1},
            "false_married": lambda g, p: {"M": True, "PR": 0, "cur": 1},
            "misdirected": _misdirected,
        },
    )


PROTOCOLS: dict[str, Callable[[], ProtocolSpec]] = {
    "coloring": coloring_protocol,
    "mis": mis_protocol,
    "matching": matching_protocol,
}


def get_protocol(name: str) -> ProtocolSpec:
    try:
        return PROTOCOLS[name]()
    except KeyError:
        raise InvalidParams(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}") from None
