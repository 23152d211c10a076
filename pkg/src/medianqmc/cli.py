"""Command-line front end: configuration, experiment execution, CSV/JSON output.

Subcommands: integrate, wce-hist, cbc, experiment. Configs are JSON or TOML.
Every output artifact embeds (tool version, master seed, config digest) so a
rerun with the same triple is byte-identical except for timestamps, which
live only in metadata files.

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 capability limit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cbc import cbc_construct
from .errors import (
    AccuracyError,
    CapabilityError,
    DomainError,
    NumericalConsistencyError,
    SpaceInvalidError,
    UsageError,
)
from .estimators import (
    METHOD_CBC,
    METHOD_MC,
    METHOD_MEDIAN,
    median_estimate,
    run_mae_study,
)
from .lattice import SeedSpec
from .problems import (
    AsianSpec,
    PDESpec,
    asian_weight_recipe,
    exp_linear_integrand,
    pca_matrix,
    pde_integrand,
    pde_weight_recipe,
    preintegrated_asian,
)
from .space import build_theta_table, choose_k, sample_wce_squared, space_from_config

DEFAULT_ASIAN_GRID = (17, 31, 67, 127, 257, 521, 1021, 2053, 4099)
FULL_ASIAN_GRID = DEFAULT_ASIAN_GRID + (8191, 16381, 32771)
DEFAULT_PDE_GRID = tuple(2 ** e for e in range(4, 13))
FULL_PDE_GRID = tuple(2 ** e for e in range(4, 16))
DEFAULT_K = 11
DEFAULT_L = 20


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    text = p.read_bytes()
    if p.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None


def config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _provenance(cfg: dict, seed: int) -> dict:
    return {"version": __version__, "seed": seed, "config_digest": config_digest(cfg)}


def _write(path: Path, text: str, force: bool):
    if path.exists() and not force:
        raise UsageError(f"refusing to overwrite {path} (use --force)")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def build_problem(cfg: dict):
    """Integrand from a problem config section."""
    try:
        kind = cfg["kind"]
    except KeyError:
        raise UsageError("problem config needs a 'kind' field") from None
    if kind == "exp-linear":
        if "a" not in cfg:
            raise UsageError("exp-linear problem needs coefficient list 'a'")
        return exp_linear_integrand(cfg["a"])
    if kind == "asian":
        spec = _asian_spec(cfg)
        return preintegrated_asian(spec, pca_matrix(spec.d, spec.maturity))
    if kind == "pde":
        return pde_integrand(_pde_spec(cfg))
    raise UsageError(f"unknown problem kind {kind!r}")


def _asian_spec(cfg: dict) -> AsianSpec:
    kwargs = {}
    for key, name in (("S0", "s0"), ("R_rate", "rate"), ("sigma", "sigma"),
                      ("T", "maturity"), ("mode", "mode")):
        if key in cfg:
            kwargs[name] = cfg[key]
    if "steps" in cfg:
        kwargs["d"] = int(cfg["steps"]) - 1
    if "K" in cfg:
        kwargs["strike"] = cfg["K"]
        kwargs.setdefault("mode", "value")
    if "x" in cfg:
        kwargs["threshold"] = cfg["x"]
        kwargs.setdefault("mode", "cdf")
    return AsianSpec(**kwargs)


def _pde_spec(cfg: dict) -> PDESpec:
    kwargs = {}
    if "s" in cfg:
        kwargs["dimension"] = int(cfg["s"])
    if "x0" in cfg:
        kwargs["x0"] = float(cfg["x0"])
    return PDESpec(**kwargs)


def problem_space(cfg: dict, dimension: int):
    """WeightedSpace the CBC baseline uses for a problem config section."""
    kind = cfg["kind"]
    if kind == "asian":
        return asian_weight_recipe(_asian_spec(cfg))
    if kind == "pde":
        return pde_weight_recipe(dimension, float(cfg.get("lambda", 0.55)))
    if kind == "exp-linear":
        return space_from_config({"dimension": dimension})
    raise UsageError(f"unknown problem kind {kind!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_integrate(args) -> int:
    cfg = load_config(args.config)
    if "problem" not in cfg:
        raise UsageError("config needs a 'problem' section")
    problem = build_problem(cfg["problem"])
    try:
        n = int(cfg["n"])
    except KeyError:
        raise UsageError("config needs 'n' (number of lattice points)") from None
    k = int(cfg.get("k", choose_k(n, 1.0)))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    result = median_estimate(problem, n, k, SeedSpec(seed))
    record = _provenance(cfg, seed) | {
        "problem": problem.name,
        "n": n,
        "k": k,
        "value": result.value,
        "replicate_spread": result.spread,
        "replicate_values": list(result.replicates.values),
    }
    print(f"estimate {result.value!r}  (N={n}, k={k}, seed={seed}, "
          f"spread={result.spread:.3e})")
    if args.out:
        _write(Path(args.out) / "integrate.json",
               json.dumps(record, indent=2) + "\n", args.force)
    return 0


def cmd_wce_hist(args) -> int:
    cfg = load_config(args.config)
    if "space" not in cfg:
        raise UsageError("config needs a 'space' section")
    space = space_from_config(cfg["space"])
    try:
        n = int(cfg["n"])
    except KeyError:
        raise UsageError("config needs 'n'") from None
    m = int(cfg.get("samples", 20000))
    median_k = cfg.get("median_k")
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))

    table = build_theta_table(space, n)
    e2 = sample_wce_squared(space, table, m, SeedSpec(seed),
                            None if median_k is None else int(median_k))
    log2_e = 0.5 * np.log2(np.maximum(e2, np.finfo(float).tiny))
    q75, q90 = np.quantile(log2_e, [0.75, 0.9])

    summary = _provenance(cfg, seed) | {
        "n": n,
        "samples": m,
        "median_k": median_k,
        "quantiles": {"0.75": float(q75), "0.9": float(q90)},
    }
    if cfg.get("cbc_baseline", True):
        cbc = cbc_construct(space, n, table, space.dimension)
        cbc_e2 = cbc.error_trace[-1]
        frac = float(np.mean(np.sqrt(e2) <= 4.0 * np.sqrt(cbc_e2)))
        summary["cbc"] = {"z": list(cbc.vector.components),
                          "log2_wce": 0.5 * float(np.log2(cbc_e2)),
                          "fraction_within_4x": frac}
    print(json.dumps(summary, indent=2))
    if args.out:
        out = Path(args.out)
        body = "log2_wce\n" + "".join(f"{v!r}\n" for v in log2_e)
        _write(out / "wce_hist.csv", body, args.force)
        _write(out / "wce_hist.json", json.dumps(summary, indent=2) + "\n",
               args.force)
    return 0


def cmd_cbc(args) -> int:
    cfg = load_config(args.config)
    if "space" not in cfg:
        raise UsageError("config needs a 'space' section")
    space = space_from_config(cfg["space"])
    try:
        n = int(cfg["n"])
    except KeyError:
        raise UsageError("config needs 'n'") from None
    s = int(cfg.get("s", space.dimension))
    table = build_theta_table(space, n)
    result = cbc_construct(space, n, table, s)
    print(result.vector.to_text(), end="")
    if args.out:
        out = Path(args.out)
        _write(out / f"vector_N{n}_s{s}.txt", result.vector.to_text(), args.force)
        _write(out / f"vector_N{n}_s{s}.json",
               result.vector.to_json() + "\n", args.force)
        _write(out / f"trace_N{n}_s{s}.csv", result.trace_csv(), args.force)
        meta = _provenance(cfg, int(args.seed or 0)) | {
            "n": n, "s": s, "log2_wce": 0.5 * float(np.log2(result.error_trace[-1]))}
        _write(out / f"cbc_N{n}_s{s}.json", json.dumps(meta, indent=2) + "\n",
               args.force)
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if "problem" not in cfg:
        raise UsageError("config needs a 'problem' section")
    problem_cfg = cfg["problem"]
    problem = build_problem(problem_cfg)
    kind = problem_cfg["kind"]

    if "grid" in cfg:
        ns = [int(n) for n in cfg["grid"]]
    elif kind == "asian":
        ns = list(FULL_ASIAN_GRID if cfg.get("full_grid") else DEFAULT_ASIAN_GRID)
    elif kind == "pde":
        ns = list(FULL_PDE_GRID if cfg.get("full_grid") else DEFAULT_PDE_GRID)
    else:
        ns = [127, 257, 521, 1021, 2053, 4099, 8191]
    k = int(cfg.get("k", DEFAULT_K))
    L = int(cfg.get("L", DEFAULT_L))
    methods = list(cfg.get("methods", [METHOD_MC, METHOD_CBC, METHOD_MEDIAN]))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))

    t0 = time.monotonic()
    cbc_vectors = None
    if METHOD_CBC in methods:
        space = problem_space(problem_cfg, problem.dimension)
        cbc_vectors = {}
        for n in ns:
            table = build_theta_table(space, n)
            cbc_vectors[n] = cbc_construct(space, n, table,
                                           problem.dimension).vector
    study = run_mae_study(problem, ns, k, L, methods, SeedSpec(seed),
                          cbc_vectors=cbc_vectors)
    elapsed = time.monotonic() - t0

    meta = _provenance(cfg, seed) | {
        "problem": problem.name,
        "grid": ns,
        "k": k,
        "L": L,
        "methods": sorted(methods),
        "reference": study.reference.provenance | {
            "value": study.reference.value},
        "wall_clock_seconds": elapsed,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    print(study.to_csv(), end="")
    if args.out:
        out = Path(args.out)
        stem = cfg.get("name", problem.name)
        _write(out / f"{stem}.csv", study.to_csv(), args.force)
        _write(out / f"{stem}.json", json.dumps(meta, indent=2) + "\n",
               args.force)
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medianqmc",
        description="Median lattice-rule quasi-Monte Carlo toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("integrate", cmd_integrate, "median lattice estimate of an integral"),
        ("wce-hist", cmd_wce_hist, "sample the worst-case error distribution"),
        ("cbc", cmd_cbc, "construct a generating vector component by component"),
        ("experiment", cmd_experiment, "run a mean-absolute-error study"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="JSON or TOML config file")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides the config)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing output files")
        p.add_argument("--parallel", type=int, default=os.cpu_count() or 1,
                       help="worker count; results are identical at any degree")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.parallel < 1:
        print("error: --parallel must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, DomainError, NumericalConsistencyError,
            SpaceInvalidError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except CapabilityError as exc:
        print(f"capability limit: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
