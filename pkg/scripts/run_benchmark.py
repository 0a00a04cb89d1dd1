#!/usr/bin/env python3
"""Full benchmark protocol in one shot: corpus -> surrogates -> GA-vs-SAO.

Reuses existing artifacts in --workdir when present, so an interrupted run
can be resumed. The final comparison runs the eight benchmark operating
points at equal evaluation budget and prints the seeded-search win rate.
"""

import argparse
import sys
from pathlib import Path

from propopt.cli import main as cli
from propopt.ga import BENCHMARK_REQUIREMENTS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="benchmark_out")
    ap.add_argument("--count", type=int, default=20000)
    ap.add_argument("--floor", type=float, default=0.6)
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--budget", type=int, default=400)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    corpus = work / "corpus.csv"
    forest = work / "forest.json"
    tree = work / "tree.json"

    if not corpus.exists():
        rc = cli(["gen-data", "--count", str(args.count),
                  "--floor", str(args.floor), "--seed", str(args.seed),
                  "--out", str(corpus)])
        if rc:
            return rc
    else:
        print(f"reusing {corpus}")

    if not (forest.exists() and tree.exists()):
        rc = cli(["train", "-d", str(corpus), "--trees", str(args.trees),
                  "--seed", str(args.seed), "--out-forest", str(forest),
                  "--out-tree", str(tree)])
        if rc:
            return rc
    else:
        print(f"reusing {forest} and {tree}")

    req_file = work / "benchmark_requirements.txt"
    with open(req_file, "w", encoding="utf-8") as fh:
        fh.write("# thrust_n,speed_mps,rpm\n")
        for req in BENCHMARK_REQUIREMENTS:
            fh.write(f"{req.thrust_req:.17g},{req.ship_speed:.17g},"
                     f"{req.rpm:.17g}\n")

    return cli(["compare", "--requirements-file", str(req_file),
                "--budget", str(args.budget), "--repeats", str(args.repeats),
                "--seed", str(args.seed), "--forest", str(forest),
                "--tree", str(tree), "-d", str(corpus),
                "--out-dir", str(work / "compare")])


if __name__ == "__main__":
    sys.exit(main())
