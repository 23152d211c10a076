"""QMC, median-QMC and Monte Carlo estimators, plus the MAE study harness.

All estimators own the inverse-CDF transform: integrands take points in R^s.
Randomness is fully derived from a SeedSpec, replicate-major, so any study
row can be recomputed in isolation and results are independent of execution
order.
"""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, UsageError
from .lattice import (
    ROLE_STUDY,
    GeneratingVector,
    SeedSpec,
    Shift,
    derive_replicate_seed,
    sample_generating_vector,
    sample_shift,
)

# Chunk size for bulk point generation; fixed so summation order (and thus
# the bit pattern of every result) never depends on available memory.
_CHUNK = 1 << 16

REFERENCE_N = 2 ** 20 + 7  # prime
REFERENCE_K = 11
REFERENCE_REPETITIONS = 10

METHOD_MC = "mc"
METHOD_CBC = "cbc-lattice"
METHOD_MEDIAN = "median-lattice"
_METHOD_CODES = {METHOD_MC: 0, METHOD_CBC: 1, METHOD_MEDIAN: 2}


@dataclass(frozen=True)
class Integrand:
    """An integrand f over R^s with vectorized evaluation.

    evaluate maps an (m, s) array of points to an (m,) array of values and
    must be pure. exact_value is carried when a closed form exists.
    """

    dimension: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    name: str
    exact_value: Optional[float] = None


def _transform_eval(f: Integrand, unit_points: np.ndarray) -> np.ndarray:
    if np.any(unit_points <= 0.0) or np.any(unit_points >= 1.0):
        raise DomainError(
            "a point coordinate hit 0 or 1; the inverse-CDF transform "
            "is undefined there")
    return np.asarray(f.evaluate(ndtri(unit_points)), dtype=float)


def qmc_estimate(f: Integrand, z: GeneratingVector, delta: Shift) -> float:
    """Equal-weight average of f over the inverse-transformed shifted lattice."""
    if z.dimension != f.dimension or delta.dimension != f.dimension:
        raise UsageError("integrand, vector and shift dimensions must agree")
    n = z.n_points
    zarr = z.as_array()
    darr = delta.as_array()
    total = 0.0
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, n), dtype=np.int64)
        frac, _ = np.modf(((idx[:, None] * zarr[None, :]) % n) / n
                          + darr[None, :])
        total += float(np.sum(_transform_eval(f, frac)))
    return total / n


@dataclass(frozen=True)
class ReplicateSet:
    """The k replicate lattice rules and their QMC values."""

    k: int
    vectors: tuple
    shifts: tuple
    values: tuple
    seed: SeedSpec

    def __post_init__(self):
        if self.k % 2 == 0 or self.k < 1:
            raise UsageError(f"replicate count must be odd, got {self.k}")


@dataclass(frozen=True)
class MedianResult:
    value: float
    replicates: ReplicateSet

    @property
    def spread(self) -> float:
        return max(self.replicates.values) - min(self.replicates.values)


def median_estimate(f: Integrand, n: int, k: int, seed: SeedSpec) -> MedianResult:
    """Median of k independent randomized lattice-rule estimates.

    Replicate l uses an independently drawn generating vector and shift from
    seed-derived streams, so the result is invariant under evaluation order.
    """
    if k < 1 or k % 2 == 0:
        raise UsageError(f"replicate count must be odd, got {k}")
    vectors, shifts, values = [], [], []
    for l in range(1, k + 1):
        z = sample_generating_vector(n, f.dimension,
                                     derive_replicate_seed(seed, l, "vector"))
        delta = sample_shift(f.dimension, derive_replicate_seed(seed, l, "shift"))
        vectors.append(z)
        shifts.append(delta)
        values.append(qmc_estimate(f, z, delta))
    value = float(np.median(values))
    return MedianResult(value, ReplicateSet(k, tuple(vectors), tuple(shifts),
                                            tuple(values), seed))


def mc_estimate(f: Integrand, m: int, seed: SeedSpec) -> float:
    """Plain Monte Carlo with m i.i.d. uniform points through the transform."""
    if m < 1:
        raise UsageError(f"need at least one sample, got {m}")
    rng = derive_replicate_seed(seed, 1, "mc").generator()
    total = 0.0
    remaining = m
    while remaining > 0:
        batch = min(remaining, _CHUNK)
        u = rng.random((batch, f.dimension))
        total += float(np.sum(_transform_eval(f, u)))
        remaining -= batch
    return total / m


@dataclass(frozen=True)
class ReferenceResult:
    value: float
    provenance: dict


def reference_value(f: Integrand, seed: SeedSpec,
                    mae_floor: Optional[float] = None) -> ReferenceResult:
    """High-N median-lattice reference oracle.

    Averages REFERENCE_REPETITIONS independent median estimates at the large
    prime modulus, on a stream disjoint from all study streams. The spread of
    the repetitions quantifies the reference error; if mae_floor is given and
    the spread exceeds it, a reference-quality warning is issued.
    """
    values = []
    for rep in range(1, REFERENCE_REPETITIONS + 1):
        rep_seed = derive_replicate_seed(seed, rep, "reference")
        values.append(median_estimate(f, REFERENCE_N, REFERENCE_K,
                                      rep_seed).value)
    values = np.asarray(values)
    value = float(values.mean())
    dispersion = float(values.max() - values.min())
    if mae_floor is not None and dispersion > mae_floor:
        warnings.warn(
            f"reference dispersion {dispersion:.3e} exceeds the study's "
            f"smallest MAE target {mae_floor:.3e}", stacklevel=2)
    provenance = {
        "oracle": "median-lattice",
        "n_points": REFERENCE_N,
        "k": REFERENCE_K,
        "repetitions": REFERENCE_REPETITIONS,
        "dispersion": dispersion,
        "values": [float(v) for v in values],
    }
    return ReferenceResult(value, provenance)


@dataclass(frozen=True)
class MAERow:
    method: str
    n_points: int
    budget: int
    mae: float
    replicates: int
    reference: float
    reference_dispersion: float
    seed: int


@dataclass(frozen=True)
class MAEStudy:
    problem: str
    rows: tuple
    reference: ReferenceResult

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("method,N,budget,MAE,L,reference,reference_dispersion,seed\n")
        for r in self.rows:
            buf.write(f"{r.method},{r.n_points},{r.budget},{r.mae!r},"
                      f"{r.replicates},{r.reference!r},"
                      f"{r.reference_dispersion!r},{r.seed}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "problem": self.problem,
            "reference": self.reference.provenance | {
                "value": self.reference.value},
            "rows": [r.__dict__ for r in self.rows],
        }, indent=2)

    def mae_by_method(self, method: str):
        rows = [r for r in self.rows if r.method == method]
        ns = np.array([r.n_points for r in rows])
        maes = np.array([r.mae for r in rows])
        order = np.argsort(ns)
        return ns[order], maes[order]

    def loglog_slope(self, method: str) -> float:
        ns, maes = self.mae_by_method(method)
        slope, _ = np.polyfit(np.log2(ns), np.log2(maes), 1)
        return float(slope)


def run_mae_study(problem: Integrand, ns, k: int, L: int, methods,
                  seed: SeedSpec,
                  cbc_vectors: Optional[dict] = None,
                  reference: Optional[ReferenceResult] = None) -> MAEStudy:
    """Mean-absolute-error study over a grid of moduli.

    Budget parity: at each N every method spends exactly k * N integrand
    evaluations per estimate. median-lattice takes the median of k random
    rules of N points; cbc-lattice averages k random-shift replicates on the
    supplied constructed vector; mc uses k * N i.i.d. points. The MAE is the
    mean absolute deviation from the reference over L independent study
    replicates.
    """
    methods = sorted(set(methods), key=lambda m: _METHOD_CODES.get(m, 99))
    for m in methods:
        if m not in _METHOD_CODES:
            raise UsageError(f"unknown method {m!r}")
    if L < 2:
        raise UsageError(f"need at least 2 study replicates, got {L}")
    if k < 1 or k % 2 == 0:
        raise UsageError(f"replicate count must be odd, got {k}")
    ns = sorted(int(n) for n in ns)
    if METHOD_CBC in methods:
        missing = [n for n in ns if cbc_vectors is None or n not in cbc_vectors]
        if missing:
            raise UsageError(
                f"cbc-lattice requested but no constructed vector for N in {missing}")

    if reference is None:
        if problem.exact_value is not None:
            reference = ReferenceResult(problem.exact_value,
                                        {"oracle": "exact", "dispersion": 0.0})
        else:
            reference = reference_value(problem, seed)
    ref = reference.value
    disp = float(reference.provenance.get("dispersion", 0.0))

    rows = []
    for n in ns:
        for method in methods:
            errs = np.empty(L)
            for l in range(1, L + 1):
                sub = seed.child(ROLE_STUDY, l, n, _METHOD_CODES[method])
                if method == METHOD_MEDIAN:
                    est = median_estimate(problem, n, k, sub).value
                elif method == METHOD_CBC:
                    z = cbc_vectors[n]
                    vals = [qmc_estimate(
                        problem, z,
                        sample_shift(problem.dimension,
                                     derive_replicate_seed(sub, i, "shift")))
                        for i in range(1, k + 1)]
                    est = float(np.mean(vals))
                else:
                    est = mc_estimate(problem, k * n, sub)
                errs[l - 1] = abs(est - ref)
            rows.append(MAERow(method, n, k * n, float(errs.mean()), L,
                               ref, disp, seed.master_seed))
    return MAEStudy(problem.name, tuple(rows), reference)
