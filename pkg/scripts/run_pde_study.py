#!/usr/bin/env python3
"""Elliptic-ODE MAE convergence study at x0 in {1/3, 2/3}.

Compares mc, cbc-lattice (POD weight recipe) and median-lattice on the
lognormal-coefficient problem with s = 30 over N in {2^4, ..., 2^12},
k = 11, L = 20.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from medianqmc.cli import main as cli_main

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/pde", type=Path)
    parser.add_argument("--seed", default=20260823, type=int)
    parser.add_argument("--full-grid", action="store_true",
                        help="extend the N grid to 2^15")
    parser.add_argument("--methods", nargs="+",
                        default=["mc", "cbc-lattice", "median-lattice"])
    parser.add_argument("--force", action="store_true")
    args = parser.parse_args()

    for x0, tag in ((1.0 / 3.0, "third"), (2.0 / 3.0, "two_thirds")):
        cfg = {"problem": {"kind": "pde", "s": 30, "x0": x0},
               "methods": args.methods, "seed": args.seed,
               "name": f"pde_x0_{tag}"}
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
