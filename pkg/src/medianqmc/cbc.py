"""Component-by-component construction of generating vectors.

Greedy per-dimension minimization of the squared shift-averaged worst-case
error over all admissible candidates, with incremental per-point accumulators
so each dimension costs O(N |G_N|). Ties break to the smallest candidate, so
the construction is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalConsistencyError, UsageError
from .lattice import GeneratingVector, coprime_residues
from .space import ThetaTable, WeightedSpace, _clamp, wce_squared


@dataclass(frozen=True)
class CBCResult:
    vector: GeneratingVector
    error_trace: tuple  # squared error after each dimension

    def trace_csv(self) -> str:
        lines = ["d,z_d,wce_squared"]
        for d, (z, e2) in enumerate(zip(self.vector.components,
                                        self.error_trace), start=1):
            lines.append(f"{d},{z},{e2!r}")
        return "\n".join(lines) + "\n"


def cbc_construct(space: WeightedSpace, n: int, table: ThetaTable,
                  s: int) -> CBCResult:
    """Construct a generating vector of dimension s for modulus n.

    The first component is fixed to 1; each further component is the argmin
    of the squared error with earlier components frozen.
    """
    if table.n_points != n:
        raise UsageError("table modulus does not match n")
    if not (1 <= s <= space.dimension):
        raise UsageError(f"target dimension {s} outside 1..{space.dimension}")

    cands = coprime_residues(n)
    n_idx = np.arange(n, dtype=np.int64)
    # candidate x point gather of the kernel values, reused every dimension
    idx = (cands[:, None] * n_idx[None, :]) % n

    scheme = space.weights
    gam = np.asarray(scheme.gamma)
    comps = [1]
    trace = []

    def theta_row(j, zj):
        return table.row(j)[(n_idx * zj) % n]

    if scheme.variant == "product":
        prod = 1.0 + gam[0] * theta_row(1, 1)
        trace.append(_clamp(float(prod.mean()) - 1.0))
        for d in range(2, s + 1):
            th = table.row(d)[idx]
            vals = (prod[None, :] * (1.0 + gam[d - 1] * th)).mean(axis=1) - 1.0
            best = int(np.argmin(vals))  # first minimum = smallest candidate
            zd = int(cands[best])
            comps.append(zd)
            trace.append(_clamp(float(vals[best])))
            prod = prod * (1.0 + gam[d - 1] * theta_row(d, zd))
    else:
        of = np.asarray(scheme.order_factors)
        # P[l] holds the order-l accumulator P_{d,l}(n) for the current d
        P = np.zeros((s + 1, n))
        P[0] = 1.0
        P[1] = gam[0] * theta_row(1, 1)
        trace.append(_clamp(float((of[1:] @ P[1:]).mean())))
        for d in range(2, s + 1):
            # error for candidate z: base + (gamma_d / N) theta_row(z) . w
            w = of[1:] @ P[:-1]          # sum_l Gamma_l P_{d-1, l-1}(n)
            base = float((of[1:] @ P[1:]).mean())
            th = table.row(d)[idx]
            vals = base + gam[d - 1] * (th @ w) / n
            best = int(np.argmin(vals))
            zd = int(cands[best])
            comps.append(zd)
            trace.append(_clamp(float(vals[best])))
            gt = gam[d - 1] * theta_row(d, zd)
            for level in range(min(d, s), 0, -1):
                P[level] += gt * P[level - 1]

    vector = GeneratingVector(n, tuple(comps))
    # accumulator drift check against a from-scratch evaluation
    direct = wce_squared(_restrict(space, s), _restrict_vector(vector, s), table)
    if not np.isclose(direct, trace[-1], rtol=1e-10, atol=1e-14):
        raise NumericalConsistencyError(
            f"incremental accumulator drifted: {trace[-1]!r} vs {direct!r}")
    return CBCResult(vector, tuple(trace))


def _restrict(space: WeightedSpace, s: int) -> WeightedSpace:
    if s == space.dimension:
        return space
    from .space import WeightScheme, WeightedSpace as WS
    scheme = space.weights
    if scheme.variant == "product":
        w = WeightScheme.product(scheme.gamma[:s])
    else:
        w = WeightScheme.pod(scheme.order_factors[: s + 1], scheme.gamma[:s])
    return WS(space.density, space.weight_functions[:s], w)


def _restrict_vector(z: GeneratingVector, s: int) -> GeneratingVector:
    if s == z.dimension:
        return z
    return GeneratingVector(z.n_points, z.components[:s])
