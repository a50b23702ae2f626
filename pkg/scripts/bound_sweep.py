"""Measured convergence rounds against the MIS and MATCHING round bounds.

    python3 scripts/bound_sweep.py --trials 300 --n-max 30 --csv out.csv
"""

import argparse
import csv
import dataclasses
import sys
import time

from stabilis.experiments import bound_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--protocols", nargs="+", default=["mis", "matching", "coloring"])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--n-max", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="write per-trial rows here")
    args = ap.parse_args(argv)

    rows = []
    for name in args.protocols:
        t0 = time.perf_counter()
        res = bound_sweep(name, args.trials, n_range=(2, args.n_max), base_seed=args.seed)
        rows += res
        conv = [r for r in res if r.converged]
        line = f"{name:9s} trials={len(res)} converged={len(conv)}"
        if conv and conv[0].round_bound is not None:
            ratios = [r.rounds / r.round_bound for r in conv]
            line += (f" violations={sum(not r.within_bound for r in conv)}"
                     f" mean_ratio={sum(ratios) / len(ratios):.3f} max_ratio={max(ratios):.3f}")
        line += f" max_reads={max(r.max_reads for r in res)} ({time.perf_counter() - t0:.1f}s)"
        print(line)

    if args.csv:
        fields = [f.name for f in dataclasses.fields(rows[0])] + ["within_bound"]
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            for r in rows:
                w.writerow({**dataclasses.asdict(r), "within_bound": r.within_bound})
    return 0


if __name__ == "__main__":
    sys.exit(main())
