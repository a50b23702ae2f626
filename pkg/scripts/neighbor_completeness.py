"""Neighbor-completeness witnesses for the three protocols on small graphs."""

import sys

from stabilis.analysis import enumerate_silent_configs, neighbor_completeness_witnesses
from stabilis.protocols import get_protocol
from stabilis.topology import clique, path, ring, star_caterpillar

GRAPHS = {"edge": path(2), "path:3": path(3), "path:4": path(4), "ring:4": ring(4),
          "clique:3": clique(3), "caterpillar:2": star_caterpillar(2)}


def main():
    for gname, g in GRAPHS.items():
        for name in ("coloring", "mis", "matching"):
            proto = get_protocol(name)
            colorings = "all" if proto.requires_colors else None
            silent = enumerate_silent_configs(g, proto, colorings=colorings)
            wit = neighbor_completeness_witnesses(g, proto, colorings=colorings)
            have = [p for p, w in wit.items() if w is not None]
            verdict = "complete" if len(have) == g.n else f"witnesses at {have}"
            print(f"{gname:14s} {name:9s} silent={len(silent):<4} {verdict}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
