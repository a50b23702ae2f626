"""Graphs with local port numbering, generators, local colorings and the
color-induced orientation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    InvalidParams,
    NotLocallyProper,
    SelfLoop,
    TooLarge,
)

LONGEST_PATH_MAX_N = 18
RANDOM_CONNECTED_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    """Undirected connected simple graph on processes ``0..n-1``.

    ``channel[p][i - 1]`` is the neighbor behind local index ``i`` of ``p``
    (local indices run from 1 to the degree of ``p``). ``colors`` holds the
    optional per-process color constants.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    channel: tuple[tuple[int, ...], ...]
    colors: tuple[int, ...] | None = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, p: int) -> int:
        return len(self.channel[p])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(ch) for ch in self.channel)

    @cached_property
    def max_degree(self) -> int:
        return max(self.degrees)

    @cached_property
    def diameter(self) -> int:
        return max(max(_bfs_dist(self.channel, s)) for s in range(self.n))

    def neighbors(self, p: int) -> tuple[int, ...]:
        return self.channel[p]

    def neighbor(self, p: int, index: int) -> int:
        """Neighbor of ``p`` behind local index ``index`` (1-based)."""
        return self.channel[p][index - 1]

    @cached_property
    def _index_maps(self) -> tuple[dict[int, int], ...]:
        return tuple({q: i + 1 for i, q in enumerate(ch)} for ch in self.channel)

    def local_index(self, p: int, q: int) -> int:
        """Local index under which ``p`` knows its neighbor ``q``."""
        return self._index_maps[p][q]

    def color(self, p: int) -> int:
        if self.colors is None:
            raise InvalidParams("graph carries no colors")
        return self.colors[p]

    @property
    def num_colors(self) -> int | None:
        return None if self.colors is None else len(set(self.colors))

    def with_colors(self, colors: Sequence[int] | "ColorAssignment") -> Graph:
        if isinstance(colors, ColorAssignment):
            colors = colors.color
        colors = tuple(int(c) for c in colors)
        if len(colors) != self.n:
            raise InvalidParams(f"expected {self.n} colors, got {len(colors)}")
        return Graph(self.n, self.edges, self.channel, colors)

    def is_locally_proper(self, colors: Sequence[int] | None = None) -> bool:
        colors = self.colors if colors is None else colors
        if colors is None:
            return False
        return all(colors[u] != colors[v] for u, v in self.edges)


@dataclass(frozen=True)
class ColorAssignment:
    color: tuple[int, ...]

    @property
    def num_colors(self) -> int:
        return len(set(self.color))

    def rank(self, c: int) -> int:
        """Number of distinct colors in use that are strictly smaller than ``c``."""
        return sum(1 for x in set(self.color) if x < c)


@dataclass(frozen=True)
class OrientedEdgeSet:
    n: int
    arcs: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def is_acyclic(self) -> bool:
        return topological_order(self.n, self.arcs) is not None


def _bfs_dist(channel: Sequence[Sequence[int]], source: int) -> list[int]:
    dist = [-1] * len(channel)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in channel[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def build_graph(
    edge_list: Iterable[Sequence[int]],
    channel_order: Sequence[Sequence[int]] | None = None,
    n: int | None = None,
    colors: Sequence[int] | None = None,
) -> Graph:
    """Build a :class:`Graph` from an edge list.

    Without ``channel_order`` every process numbers its neighbors by
    ascending id. ``n`` defaults to one more than the largest id seen.
    """
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for e in edge_list:
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise SelfLoop(f"self-loop on process {u}")
        if u < 0 or v < 0:
            raise InvalidParams(f"negative process id in edge {(u, v)}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed twice")
        seen.add(key)
        pairs.append(key)
    if not pairs:
        raise InvalidParams("edge list is empty")
    if n is None:
        n = 1 + max(max(e) for e in pairs)
    if any(v >= n for e in pairs for v in e):
        raise InvalidParams(f"process id out of range for n={n}")

    adjacency: list[set[int]] = [set() for _ in range(n)]
    for u, v in pairs:
        adjacency[u].add(v)
        adjacency[v].add(u)

    if channel_order is None:
        channel = tuple(tuple(sorted(a)) for a in adjacency)
    else:
        if len(channel_order) != n:
            raise InvalidParams("channel_order must list one ordering per process")
        channel = tuple(tuple(int(q) for q in order) for order in channel_order)
        for p, order in enumerate(channel):
            if len(set(order)) != len(order) or set(order) != adjacency[p]:
                raise InvalidParams(f"channel_order[{p}] is not a permutation of its neighbors")

    if min(_bfs_dist(channel, 0)) < 0:
        raise DisconnectedGraph(f"graph on {n} processes is not connected")

    g = Graph(n=n, edges=tuple(sorted(pairs)), channel=channel)
    if colors is not None:
        g = g.with_colors(colors)
    return g


# -- generators ---------------------------------------------------------------

def path(n: int) -> Graph:
    if n < 2:
        raise InvalidParams("path needs n >= 2")
    return build_graph([(i, i + 1) for i in range(n - 1)])


def ring(n: int) -> Graph:
    if n < 3:
        raise InvalidParams("ring needs n >= 3 (n = 2 would need a parallel edge)")
    return build_graph([(i, (i + 1) % n) for i in range(n)])


def clique(n: int) -> Graph:
    if n < 2:
        raise InvalidParams("clique needs n >= 2")
    return build_graph([(i, j) for i in range(n) for j in range(i + 1, n)])


def random_connected(n: int, p_edge: float, seed: int = 0) -> Graph:
    """G(n, p) resampled until connected."""
    if n < 2 or not 0 < p_edge <= 1:
        raise InvalidParams(f"random_connected needs n >= 2 and 0 < p <= 1 (got n={n}, p={p_edge})")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(RANDOM_CONNECTED_ATTEMPTS):
        mask = rng.random(iu.size) < p_edge
        pairs = list(zip(iu[mask].tolist(), ju[mask].tolist()))
        if not pairs:
            continue
        try:
            return build_graph(pairs, n=n)
        except DisconnectedGraph:
            continue
    raise InvalidParams(
        f"no connected G({n}, {p_edge}) sample within {RANDOM_CONNECTED_ATTEMPTS} attempts"
    )


def star_caterpillar(delta: int) -> Graph:
    """Center of degree ``delta`` whose neighbors each carry ``delta - 1`` pendants.

    Has ``delta**2 + 1`` processes and maximum degree ``delta``.
    """
    if delta < 2:
        raise InvalidParams("star_caterpillar needs delta >= 2")
    edges = []
    nxt = delta + 1
    for hub in range(1, delta + 1):
        edges.append((0, hub))
        for _ in range(delta - 1):
            edges.append((hub, nxt))
            nxt += 1
    return build_graph(edges)


def five_chain() -> Graph:
    return path(5)


def exds_fixture() -> Graph:
    """Colored five-process chain (colors 1-2-1-2-1) used as the MIS stability example."""
    return path(5).with_colors((1, 2, 1, 2, 1))


def exmatching_fixture() -> Graph:
    """Two matched edges dominating all 14 edges; maximum degree 4.

    Edges {0,1} and {2,3} form a maximal matching of size 2 = ceil(14 / 7).
    """
    edges = [(0, 1), (2, 3)]
    edges += [(0, 4), (0, 5), (0, 6)]
    edges += [(1, 7), (1, 8), (1, 9)]
    edges += [(2, 9), (2, 10), (2, 11)]
    edges += [(3, 12), (3, 13), (3, 14)]
    return build_graph(edges)


def generate(kind: str, *params: float, seed: int = 0) -> Graph:
    """Dispatch to a named generator; deterministic in ``(kind, params, seed)``."""
    try:
        if kind == "path":
            return path(int(params[0]))
        if kind == "ring":
            return ring(int(params[0]))
        if kind == "clique":
            return clique(int(params[0]))
        if kind == "random_connected":
            return random_connected(int(params[0]), float(params[1]), seed)
        if kind == "star_caterpillar":
            return star_caterpillar(int(params[0]))
        if kind == "five_chain":
            return five_chain()
    except IndexError:
        raise InvalidParams(f"missing parameters for {kind!r}") from None
    raise InvalidParams(f"unknown graph kind {kind!r}")


# -- colorings and orientation ------------------------------------------------

def greedy_local_coloring(g: Graph, seed: int = 0) -> ColorAssignment:
    """First-fit coloring in a seed-permuted vertex order; colors in 1..Δ+1."""
    order = np.random.default_rng(seed).permutation(g.n).tolist()
    color = [0] * g.n
    for p in order:
        taken = {color[q] for q in g.channel[p]}
        c = 1
        while c in taken:
            c += 1
        color[p] = c
    return ColorAssignment(tuple(color))


def topological_order(n: int, arcs: Iterable[tuple[int, int]]) -> list[int] | None:
    """Kahn's algorithm; ``None`` when the arcs contain a cycle."""
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for u, v in arcs:
        succ[u].append(v)
        indeg[v] += 1
    queue = deque(p for p in range(n) if indeg[p] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return order if len(order) == n else None


def dag_orientation(g: Graph, c: ColorAssignment | Sequence[int] | None = None) -> OrientedEdgeSet:
    """Orient every edge from its lower-colored to its higher-colored end."""
    if c is None:
        colors = g.colors
    elif isinstance(c, ColorAssignment):
        colors = c.color
    else:
        colors = tuple(c)
    if colors is None:
        raise NotLocallyProper("no coloring given")
    arcs = set()
    for u, v in g.edges:
        if colors[u] == colors[v]:
            raise NotLocallyProper(f"edge {(u, v)} is monochrome (color {colors[u]})")
        arcs.add((u, v) if colors[u] < colors[v] else (v, u))
    oriented = OrientedEdgeSet(g.n, frozenset(arcs))
    if not oriented.is_acyclic():
        raise AssertionError("color-induced orientation has a cycle")
    return oriented


def layered_coloring(n: int, arcs: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Smallest coloring inducing the given acyclic orientation: each process
    gets 1 + the length of the longest directed path ending at it."""
    arcs = list(arcs)
    order = topological_order(n, arcs)
    if order is None:
        raise NotLocallyProper("orientation has a cycle")
    pred: list[list[int]] = [[] for _ in range(n)]
    for u, v in arcs:
        pred[v].append(u)
    color = [1] * n
    for v in order:
        for u in pred[v]:
            color[v] = max(color[v], color[u] + 1)
    return tuple(color)


def orientation_colorings(g: Graph, max_edges: int = 20) -> list[tuple[int, ...]]:
    """One representative coloring per acyclic orientation of ``g``.

    The protocols only ever compare the colors of neighbors, so two colorings
    inducing the same orientation behave identically.
    """
    if g.m > max_edges:
        raise TooLarge(f"{2 ** g.m} orientations to scan (m={g.m} > {max_edges})")
    found = []
    for bits in range(1 << g.m):
        arcs = [(u, v) if bits >> i & 1 else (v, u) for i, (u, v) in enumerate(g.edges)]
        if topological_order(g.n, arcs) is not None:
            found.append(layered_coloring(g.n, arcs))
    return sorted(set(found))


def longest_elementary_path(g: Graph) -> int:
    """Edge count of the longest simple path, by exhaustive DFS (n <= 18).

    Branches are cut when the vertices still reachable from the path's end
    cannot beat the best length found so far.
    """
    if g.n > LONGEST_PATH_MAX_N:
        raise TooLarge(f"longest path is only computed for n <= {LONGEST_PATH_MAX_N}")
    target = g.n - 1
    nbr_mask = [sum(1 << q for q in ch) for ch in g.channel]
    best = 0

    def reachable(v: int, visited: int) -> int:
        seen = 0
        frontier = nbr_mask[v] & ~visited
        while frontier:
            seen |= frontier
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= nbr_mask[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~visited & ~seen
        return bin(seen).count("1")

    def dfs(v: int, visited: int, length: int) -> bool:
        nonlocal best
        if length > best:
            best = length
            if best == target:
                return True
        if length + reachable(v, visited) <= best:
            return False
        free = nbr_mask[v] & ~visited
        while free:
            low = free & -free
            free ^= low
            if dfs(low.bit_length() - 1, visited | low, length + 1):
                return True
        return False

    for start in range(g.n):
        if dfs(start, 1 << start, 0):
            break
    return best


# -- file format --------------------------------------------------------------

def dumps_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    if g.colors is not None:
        lines.append("colors " + " ".join(str(c) for c in g.colors))
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise InvalidParams("empty graph file")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
    except (IndexError, ValueError):
        raise InvalidParams("first line must be 'n m'") from None
    colors = None
    edges = []
    for row in rows[1:]:
        if row[0] == "colors":
            colors = [int(x) for x in row[1:]]
        else:
            edges.append((int(row[0]), int(row[1])))
    if len(edges) != m:
        raise InvalidParams(f"header announces {m} edges, file has {len(edges)}")
    return build_graph(edges, n=n, colors=colors)


def write_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(dumps_graph(g))


def read_graph(path: str | Path) -> Graph:
    return loads_graph(Path(path).read_text())
