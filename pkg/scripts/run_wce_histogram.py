#!/usr/bin/env python3
"""Worst-case-error histogram study: random vectors vs the CBC baseline.

Samples log2 of the shift-averaged worst-case error for uniformly random
generating vectors at N in {257, 2053} (s = 30, exp(-|x|/16) weight
functions, gamma_j = 1/j^2), reports the 0.75/0.9 quantiles and the CBC
vector's value, and writes one CSV of samples per N.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from medianqmc.cli import main as cli_main


def run(n, out_dir, seed, samples, force):
    cfg = {
        "space": {"dimension": 30, "alpha": 1.0 / 16.0,
                  "weights": {"variant": "product", "gamma": "1/j^2"}},
        "n": n,
        "samples": samples,
        "seed": seed,
        "name": f"wce_hist_N{n}",
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        path = fh.name
    args = ["wce-hist", "--config", path, "--out", str(out_dir / f"N{n}")]
    if force:
        args.append("--force")
    return cli_main(args)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/wce_hist", type=Path)
    parser.add_argument("--seed", default=20260823, type=int)
    parser.add_argument("--samples", default=20000, type=int)
    parser.add_argument("--force", action="store_true")
    args = parser.parse_args()
    for n in (257, 2053):
        rc = run(n, args.out, args.seed, args.samples, args.force)
        if rc != 0:
            sys.exit(rc)
