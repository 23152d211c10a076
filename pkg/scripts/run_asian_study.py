#!/usr/bin/env python3
"""Asian-put MAE convergence study (mc vs cbc-lattice vs median-lattice).

Runs the four panels (option value at K in {90, 110}, average-price CDF at
x in {90, 110}) over the desk-scale N grid with k = 11 and L = 20, writing
one CSV + metadata JSON per panel.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from medianqmc.cli import main as cli_main

PANELS = [
    ("value_K110", {"kind": "asian", "K": 110.0, "steps": 16}),
    ("value_K90", {"kind": "asian", "K": 90.0, "steps": 16}),
    ("cdf_x110", {"kind": "asian", "x": 110.0, "steps": 16}),
    ("cdf_x90", {"kind": "asian", "x": 90.0, "steps": 16}),
]


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/asian", type=Path)
    parser.add_argument("--seed", default=20260823, type=int)
    parser.add_argument("--full-grid", action="store_true",
                        help="extend the N grid to 32771")
    parser.add_argument("--force", action="store_true")
    args = parser.parse_args()

    for name, problem in PANELS:
        cfg = {"problem": problem, "seed": args.seed, "name": f"asian_{name}"}
        if args.full_grid:
            cfg["full_grid"] = True
        with tempfile.NamedTemporaryFile("w", suffix=".json",
                                         delete=False) as fh:
            json.dump(cfg, fh)
            path = fh.name
        cli_args = ["experiment", "--config", path, "--out", str(args.out)]
        if args.force:
            cli_args.append("--force")
        rc = cli_main(cli_args)
        if rc != 0:
            sys.exit(rc)
