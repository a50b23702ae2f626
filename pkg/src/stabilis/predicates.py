"""Legitimacy predicates and problem outputs for the three protocols."""

from __future__ import annotations

from typing import Callable

from .engine import Configuration
from .errors import WrongProtocol
from .protocols import DOMINATED, DOMINATOR
from .topology import Graph


def _expect(cfg: Configuration, protocol: str) -> None:
    if cfg.protocol != protocol:
        raise WrongProtocol(f"expected a {protocol} configuration, got {cfg.protocol}")


def check_vertex_coloring(g: Graph, cfg: Configuration) -> bool:
    _expect(cfg, "coloring")
    c = cfg.values("C")
    return all(c[u] != c[v] for u, v in g.edges)


def check_mis(g: Graph, cfg: Configuration) -> bool:
    _expect(cfg, "mis")
    s = cfg.values("S")
    for p in range(g.n):
        nbr_states = [s[q] for q in g.channel[p]]
        if s[p] == DOMINATOR and DOMINATOR in nbr_states:
            return False
        if s[p] == DOMINATED and DOMINATOR not in nbr_states:
            return False
    return True


def matched_edges(g: Graph, cfg: Configuration) -> set[tuple[int, int]]:
    """Edges {p, q} with inMM[q].p or inMM[p].q, as sorted pairs."""
    _expect(cfg, "matching")
    edges = set()
    for p in range(g.n):
        pr, cur = cfg.value(p, "PR"), cfg.value(p, "cur")
        if pr == 0 or pr != cur:
            continue
        q = g.neighbor(p, cur)
        if cfg.value(q, "PR") == g.local_index(q, p):
            edges.add((min(p, q), max(p, q)))
    return edges


def check_maximal_matching(g: Graph, cfg: Configuration) -> bool:
    edges = matched_edges(g, cfg)
    covered: set[int] = set()
    for u, v in edges:
        if u in covered or v in covered:
            return False
        covered.update((u, v))
    return all(u in covered or v in covered for u, v in g.edges)


def extract_output(g: Graph, cfg: Configuration):
    """Color map, set of MIS members, or set of matched edges."""
    if cfg.protocol == "coloring":
        return dict(enumerate(cfg.values("C")))
    if cfg.protocol == "mis":
        return {p for p, s in enumerate(cfg.values("S")) if s == DOMINATOR}
    if cfg.protocol == "matching":
        return matched_edges(g, cfg)
    raise WrongProtocol(f"no output function for {cfg.protocol!r}")


PREDICATES: dict[str, Callable[[Graph, Configuration], bool]] = {
    "vertex_coloring": check_vertex_coloring,
    "mis": check_mis,
    "maximal_matching": check_maximal_matching,
}


def predicate_for(predicate_id: str) -> Callable[[Graph, Configuration], bool]:
    try:
        return PREDICATES[predicate_id]
    except KeyError:
        raise WrongProtocol(f"unknown predicate {predicate_id!r}") from None
