#!/usr/bin/env python3
"""Grid-layout ablation on the seeded synthetic corpus.

Runs the oracle pipeline under several cell layouts over one corpus and
prints a comparison table against the quarter-resolution ceiling.  The
233-cell radial grid should sit within a small gap of the ceiling, the
41-cell one below it, and the evenly spaced grid far behind on things.

Example:
    python scripts/grid_ablation.py --scenes 200 --seed 7 --report ablation.json
"""

import argparse
import json
from pathlib import Path

from pixelvote.grid import scheme
from pixelvote.harness import OracleSettings, compare_schemes, corpus_specs


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenes", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--image-size", type=int, default=256)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--schemes", default="default,simple,uniform")
    parser.add_argument("--report", default=None)
    args = parser.parse_args()

    names = tuple(name.strip() for name in args.schemes.split(","))
    for name in names:
        scheme(name)  # fail fast on typos
    specs = corpus_specs(args.scenes, seed=args.seed, size=args.image_size)
    report = compare_schemes(specs, names, OracleSettings(), jobs=args.jobs)
    report["config"] = {
        "scenes": args.scenes,
        "seed": args.seed,
        "image_size": args.image_size,
        "schemes": list(names),
    }

    columns = ["PQ", "SQ", "RQ", "PQ_thing", "SQ_thing", "RQ_thing", "PQ_stuff"]
    header = ["layout", "cells"] + ["PQ", "SQ", "RQ", "PQ_th", "SQ_th", "RQ_th", "PQ_st"]
    print("  ".join(f"{h:>8s}" for h in header))
    rows = [("1/4 gt", "-", report["ceiling"]["summary"])]
    rows += [
        (name, str(data["num_cells"]), data["summary"]) for name, data in report["schemes"].items()
    ]
    for label, cells, summary in rows:
        values = [f"{summary[c]:8.2f}" for c in columns]
        print("  ".join([f"{label:>8s}", f"{cells:>8s}"] + values))

    if args.report:
        path = Path(args.report)
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
