"""Weighted unanchored Sobolev space machinery.

The shift-averaged worst-case error of a rank-1 lattice rule over R^s is
assembled from a one-dimensional kernel theta_j(u) per coordinate. This module
evaluates that kernel and its Fourier coefficients, precomputes kernel tables,
evaluates worst-case errors for product and POD weights, and provides the
probabilistic bound machinery (decay fits, zeta sums, bound infima).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import log_ndtr, ndtr, zeta as riemann_zeta

from .errors import (
    CapabilityError,
    NumericalConsistencyError,
    SpaceInvalidError,
    UsageError,
)
from .lattice import (
    GeneratingVector,
    SeedSpec,
    derive_replicate_seed,
    euler_totient,
    sample_vector_components,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    Density,
    QuadratureSpec,
    integrate_semi_infinite,
    normal_inv_cdf,
)

TABLE_CACHE_VERSION = 1
CACHE_DIR_ENV = "MEDIANQMC_CACHE_DIR"

# Pre-clamp values below this are implementation bugs, not round-off.
ROUNDOFF_CLAMP = -1e-12

# Riemann zeta blows up at 1; refuse to silently return huge values near it.
ZETA_GUARD = 1.02


# ---------------------------------------------------------------------------
# weight functions and schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """One-dimensional weight function psi_j, stored through psi_j^2.

    kind "exp-abs": psi^2(x) = scale * exp(-2 * rate * |x|)   (the main case)
    kind "exp-sq":  psi^2(x) = scale * exp(-rate * x^2)       (test hook; fails
        the integrability condition against a normal density)
    """

    kind: str = "exp-abs"
    scale: float = 1.0
    rate: float = 1.0 / 16.0

    def __post_init__(self):
        if self.kind not in ("exp-abs", "exp-sq"):
            raise UsageError(f"unsupported weight function kind {self.kind!r}")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise UsageError(f"scale must be finite positive, got {self.scale}")
        if not (self.rate > 0 and np.isfinite(self.rate)):
            raise UsageError(f"rate must be finite positive, got {self.rate}")

    def log_psi_squared(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exp-abs":
            return np.log(self.scale) - 2.0 * self.rate * np.abs(t)
        return np.log(self.scale) - self.rate * t * t

    def inv_psi_squared(self, t):
        return np.exp(-self.log_psi_squared(t))

    def key(self):
        return (self.kind, float(self.scale), float(self.rate))


@dataclass(frozen=True)
class WeightScheme:
    """Subset weights gamma_u, either product or POD.

    product: gamma_u = prod_{j in u} gamma[j]
    pod:     gamma_u = order_factors[|u|] * prod_{j in u} gamma[j],
             with order_factors[0] = 1.
    """

    variant: str
    gamma: tuple
    order_factors: Optional[tuple] = None

    def __post_init__(self):
        if self.variant not in ("product", "pod"):
            raise UsageError(f"unknown weight variant {self.variant!r}")
        g = tuple(float(x) for x in self.gamma)
        object.__setattr__(self, "gamma", g)
        if any(x <= 0 for x in g):
            raise UsageError("per-coordinate weights must be positive")
        if self.variant == "pod":
            if self.order_factors is None:
                raise UsageError("pod weights need order factors")
            of = tuple(float(x) for x in self.order_factors)
            object.__setattr__(self, "order_factors", of)
            if len(of) != len(g) + 1:
                raise UsageError("need order factors for orders 0..s")
            if abs(of[0] - 1.0) > 0:
                raise UsageError("order factor at level 0 must be 1")
            if any(x <= 0 for x in of):
                raise UsageError("order factors must be positive")
        elif self.order_factors is not None:
            raise UsageError("product weights take no order factors")

    @classmethod
    def product(cls, gamma) -> "WeightScheme":
        return cls("product", tuple(gamma))

    @classmethod
    def pod(cls, order_factors, gamma) -> "WeightScheme":
        return cls("pod", tuple(gamma), tuple(order_factors))

    @property
    def dimension(self) -> int:
        return len(self.gamma)

    def gamma_subset(self, u) -> float:
        """gamma_u for a subset of 1-based coordinate indices."""
        u = tuple(sorted(set(int(j) for j in u)))
        if any(j < 1 or j > self.dimension for j in u):
            raise UsageError(f"coordinates {u} outside 1..{self.dimension}")
        val = 1.0
        for j in u:
            val *= self.gamma[j - 1]
        if self.variant == "pod":
            val *= self.order_factors[len(u)]
        return val


@dataclass(frozen=True)
class WeightedSpace:
    """Density + weight functions + subset weights; the integrand space."""

    density: Density
    weight_functions: tuple
    weights: WeightScheme

    def __post_init__(self):
        wfs = tuple(self.weight_functions)
        object.__setattr__(self, "weight_functions", wfs)
        if len(wfs) != self.weights.dimension:
            raise UsageError("weight function count must match weight scheme")
        for wf in set(wfs):
            report = check_stronger_condition(self.density, wf)
            if not report.passed:
                raise SpaceInvalidError(
                    f"weight function {wf} fails integrability: {report.detail}")

    @property
    def dimension(self) -> int:
        return len(self.weight_functions)

    @classmethod
    def with_product_weights(cls, density, weight_function, gamma) -> "WeightedSpace":
        """Common case: one weight function repeated, product weights."""
        gamma = tuple(gamma)
        return cls(density, (weight_function,) * len(gamma),
                   WeightScheme.product(gamma))

    def config_key(self) -> dict:
        d = {"density": self.density.kind,
             "weight_functions": [list(wf.key()) for wf in self.weight_functions],
             "weights": {"variant": self.weights.variant,
                         "gamma": list(self.weights.gamma)}}
        if self.weights.variant == "pod":
            d["weights"]["order_factors"] = list(self.weights.order_factors)
        return d


# ---------------------------------------------------------------------------
# integrability condition and embedding constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    left_integral: Optional[float]
    right_integral: Optional[float]
    detail: str


def _tail_converges(log_integrand, probes) -> bool:
    """Tail test: log-integrand must be decreasing and eventually tiny."""
    vals = [log_integrand(t) for t in probes]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    return decreasing and vals[-1] < -30.0


def check_stronger_condition(density: Density, wf: WeightFunction) -> ConditionReport:
    """Numerically verify that Phi/psi^2 is integrable at -inf and
    (1 - Phi)/psi^2 at +inf (both sides taken at c = 0)."""
    if density.kind != "standard-normal":
        raise CapabilityError("condition check implemented for normal density only")

    def log_left(t):  # log of Phi(t)/psi^2(t), t -> -inf
        return float(log_ndtr(t) - wf.log_psi_squared(t))

    def log_right(t):  # log of (1 - Phi(t))/psi^2(t), t -> +inf
        return float(log_ndtr(-t) - wf.log_psi_squared(t))

    probes = (10.0, 18.0, 26.0, 34.0)
    ok_left = _tail_converges(lambda t: log_left(-t), probes)
    ok_right = _tail_converges(log_right, probes)
    if not (ok_left and ok_right):
        side = "lower" if not ok_left else "upper"
        return ConditionReport(False, None, None,
                               f"{side}-tail integrand does not decay")
    left = integrate_semi_infinite(lambda t: math.exp(log_left(t)), -np.inf,
                                   upper=0.0)
    right = integrate_semi_infinite(lambda t: math.exp(log_right(t)), 0.0)
    return ConditionReport(True, left, right, "ok")


def embedding_constant(space: WeightedSpace, j: int) -> float:
    """The L2-embedding constant: integral of Phi(y)(1-Phi(y))/psi_j^2(y)."""
    wf = space.weight_functions[j - 1]
    report = check_stronger_condition(space.density, wf)
    if not report.passed:
        raise SpaceInvalidError(f"embedding constant diverges: {report.detail}")

    def f(t):
        return math.exp(float(log_ndtr(t) + log_ndtr(-t) - wf.log_psi_squared(t)))

    return integrate_semi_infinite(f, -np.inf)


# ---------------------------------------------------------------------------
# the kernel theta_j and its Fourier coefficients
# ---------------------------------------------------------------------------

def _theta_bracket(P, Q, lo, hi):
    """The kernel integrand's CDF bracket, evaluated per tail region.

    With P = Phi(t) and Q = 1 - Phi(t) computed independently for accuracy,
    the defining expression (u - P)_+ + (1 - u - P)_+ - (1 - P)^2 reduces to
    -P^2 below both thresholds, -Q^2 above both, and Q - lo - Q^2 in between
    (lo = min(u, 1-u), hi = max(u, 1-u)). The piecewise forms avoid the
    catastrophic cancellation of the naive sum in the tails, where the
    1/psi^2 factor amplifies round-off exponentially.
    """
    return np.where(P <= lo, -P * P,
                    np.where(P >= hi, -Q * Q, Q - lo - Q * Q))


def theta(space: WeightedSpace, j: int, u: float,
          spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Kernel value theta_j(u) for u in [0, 1], by adaptive quadrature."""
    if not (0.0 <= u <= 1.0):
        raise UsageError(f"u must lie in [0, 1], got {u}")
    wf = space.weight_functions[j - 1]
    lo = min(u, 1.0 - u)
    hi = max(u, 1.0 - u)

    def f(t):
        P = ndtr(t)
        Q = ndtr(-t)
        return float(_theta_bracket(P, Q, lo, hi) * np.exp(-wf.log_psi_squared(t)))

    pts = [0.0]
    for q in (lo, hi):
        if 0.0 < q < 1.0:
            pts.append(normal_inv_cdf(q))
    return integrate_semi_infinite(f, -np.inf, spec=spec, breakpoints=pts)


# Oscillation-resolving composite Gauss-Legendre grid for the Fourier
# coefficients. Outside |t| <= 8.66 the normal CDF is within 2.5e-18 of its
# limit, so the integrand is negligible there for every |h| <= 1e7.
_THETA_HAT_TMAX = 8.66
_THETA_HAT_ORDER = 10
_gl_x, _gl_w = leggauss(_THETA_HAT_ORDER)


def theta_hat(space: WeightedSpace, j: int, h: int) -> float:
    """Fourier coefficient of theta_j at nonzero integer frequency h.

    Equals (1 / (pi h)^2) * integral of sin^2(pi h Phi(t)) / psi_j^2(t);
    strictly positive and even in h.
    """
    h = int(h)
    if h == 0:
        raise UsageError("Fourier coefficient needs h != 0")
    h = abs(h)
    wf = space.weight_functions[j - 1]
    key = wf.key() + (h,)
    cached = _theta_hat_cache.get(key)
    if cached is not None:
        return cached

    # sin^2(pi h Phi) oscillates h times across the bulk; keep at most half a
    # cycle per panel so the fixed-order rule stays spectrally accurate.
    n_panels = max(64, 2 * h)
    edges = np.linspace(-_THETA_HAT_TMAX, _THETA_HAT_TMAX, n_panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    t = (0.5 * (edges[1:] + edges[:-1])[:, None] + half * _gl_x[None, :]).ravel()
    w = np.broadcast_to(half * _gl_w[None, :],
                        (n_panels, _THETA_HAT_ORDER)).ravel()
    # For t > 0 use sin(pi h (1 - Q)) = +-sin(pi h Q): full tail accuracy.
    m = np.where(t <= 0, ndtr(t), ndtr(-t))
    vals = np.sin(np.pi * h * m) ** 2 * np.exp(-wf.log_psi_squared(t))
    out = float(np.dot(w, vals)) / (np.pi * np.pi * h * h)
    _theta_hat_cache[key] = out
    return out


_theta_hat_cache: dict = {}


# ---------------------------------------------------------------------------
# kernel tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaTable:
    """Precomputed theta_j(n/N) for n = 0..N-1 and every coordinate.

    values has shape (s, N). uniform is True when all coordinate rows are
    identical, which lets bulk evaluations gather from a single row.
    """

    n_points: int
    values: np.ndarray
    uniform: bool

    def row(self, j: int) -> np.ndarray:
        return self.values[j - 1]


def _cache_dir() -> Optional[Path]:
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return Path(env)
    home = os.environ.get("HOME")
    if home:
        return Path(home) / ".cache" / "medianqmc"
    return None


def _table_cache_key(space: WeightedSpace, n: int, spec: QuadratureSpec) -> str:
    payload = {
        "version": TABLE_CACHE_VERSION,
        "density": space.density.kind,
        "psi": [list(wf.key()) for wf in space.weight_functions],
        "n": n,
        "abs_tol": spec.abs_tol,
        "rel_tol": spec.rel_tol,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:24]


def build_theta_table(space: WeightedSpace, n: int,
                      spec: QuadratureSpec = DEFAULT_QUADRATURE,
                      cache: bool = True) -> ThetaTable:
    """Tabulate theta_j(m/n) for all coordinates, using the u <-> 1-u symmetry
    to halve the quadrature work and a disk cache keyed on the space."""
    if n < 2:
        raise UsageError(f"need modulus >= 2, got {n}")
    cache_path = None
    if cache:
        cdir = _cache_dir()
        if cdir is not None:
            key = _table_cache_key(space, n, spec)
            cache_path = cdir / f"theta_{key}.npz"
            if cache_path.exists():
                values = np.load(cache_path)["values"]
                uniform = bool(np.all(values == values[0]))
                return ThetaTable(n, values, uniform)

    rows = {}
    for wf in set(space.weight_functions):
        half = np.empty(n // 2 + 1)
        for m in range(n // 2 + 1):
            half[m] = theta(space, space.weight_functions.index(wf) + 1,
                            m / n, spec=spec)
        row = np.empty(n)
        row[: n // 2 + 1] = half
        for m in range(n // 2 + 1, n):
            row[m] = half[n - m]
        rows[wf.key()] = row
    values = np.stack([rows[wf.key()] for wf in space.weight_functions])
    uniform = len(rows) == 1

    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        # savez appends .npz unless the name already ends with it
        tmp = cache_path.with_name(f"{cache_path.stem}.tmp{os.getpid()}.npz")
        np.savez_compressed(tmp, values=values)
        os.replace(tmp, cache_path)
        sidecar = {"version": TABLE_CACHE_VERSION,
                   "space": space.config_key(), "n": n,
                   "abs_tol": spec.abs_tol, "rel_tol": spec.rel_tol,
                   "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
        cache_path.with_suffix(".json").write_text(
            json.dumps(sidecar, indent=2) + "\n")
    return ThetaTable(n, values, uniform)


# ---------------------------------------------------------------------------
# shift-averaged worst-case error
# ---------------------------------------------------------------------------

def _clamp(value: float) -> float:
    if value < ROUNDOFF_CLAMP:
        raise NumericalConsistencyError(
            f"squared worst-case error {value:.3e} below round-off threshold")
    return max(value, 0.0)


def _gathered_theta(table: ThetaTable, z: np.ndarray) -> np.ndarray:
    """theta_j({n z_j / N}) as an (N, s) array."""
    n = np.arange(table.n_points, dtype=np.int64)
    idx = (n[:, None] * z[None, :]) % table.n_points
    if table.uniform:
        return table.values[0][idx]
    return table.values.T[idx, np.arange(len(z))[None, :]]


def wce_squared(space: WeightedSpace, z: GeneratingVector,
                table: ThetaTable) -> float:
    """Squared shift-averaged worst-case error of the lattice rule z."""
    if z.n_points != table.n_points:
        raise UsageError("generating vector and table modulus mismatch")
    if z.dimension != space.dimension:
        raise UsageError("generating vector and space dimension mismatch")
    th = _gathered_theta(table, z.as_array())
    scheme = space.weights
    gam = np.asarray(scheme.gamma)
    if scheme.variant == "product":
        val = float(np.mean(np.prod(1.0 + gam[None, :] * th, axis=1))) - 1.0
        return _clamp(val)
    # POD: accumulate order components P_{d, l}(n) in place, l descending.
    s = space.dimension
    n_pts = table.n_points
    P = np.zeros((s + 1, n_pts))
    P[0] = 1.0
    for d in range(1, s + 1):
        gt = gam[d - 1] * th[:, d - 1]
        for level in range(min(d, s), 0, -1):
            P[level] += gt * P[level - 1]
    of = np.asarray(scheme.order_factors)
    val = float(np.mean(of[1:] @ P[1:]))
    return _clamp(val)


def wce_squared_batch(space: WeightedSpace, zs: np.ndarray,
                      table: ThetaTable, chunk: int = 64) -> np.ndarray:
    """wce_squared for many generating vectors, rows of zs (m, s)."""
    zs = np.asarray(zs, dtype=np.int64)
    m, s = zs.shape
    if s != space.dimension:
        raise UsageError("vector batch dimension mismatch")
    scheme = space.weights
    if scheme.variant != "product":
        out = np.array([wce_squared(space, GeneratingVector(table.n_points,
                                                            tuple(row)), table)
                        for row in zs])
        return out
    gam = np.asarray(scheme.gamma)
    n = np.arange(table.n_points, dtype=np.int64)
    out = np.empty(m)
    for start in range(0, m, chunk):
        zb = zs[start:start + chunk]
        idx = (n[None, :, None] * zb[:, None, :]) % table.n_points
        if table.uniform:
            th = table.values[0][idx]
        else:
            th = table.values.T[idx, np.arange(s)[None, None, :]]
        vals = np.prod(1.0 + gam[None, None, :] * th, axis=2).mean(axis=1) - 1.0
        out[start:start + chunk] = vals
    bad = out < ROUNDOFF_CLAMP
    if np.any(bad):
        raise NumericalConsistencyError(
            f"{bad.sum()} squared errors below round-off threshold")
    return np.maximum(out, 0.0)


def sample_wce_squared(space: WeightedSpace, table: ThetaTable, m: int,
                       seed: SeedSpec, median_k: Optional[int] = None) -> np.ndarray:
    """m draws of the squared worst-case error for uniformly random vectors.

    With median_k set (odd), each draw is the median over median_k
    independently drawn vectors of the (non-squared) error, squared back.
    """
    if median_k is not None and median_k % 2 == 0:
        raise UsageError("median_k must be odd")
    n = table.n_points
    s = space.dimension
    k = median_k or 1
    rng = derive_replicate_seed(seed, 1, "vector").generator()
    zs = np.empty((m * k, s), dtype=np.int64)
    for i in range(m * k):
        zs[i] = sample_vector_components(n, s, rng)
    vals = wce_squared_batch(space, zs, table)
    if median_k is None:
        return vals
    e = np.sqrt(vals).reshape(m, k)
    return np.median(e, axis=1) ** 2


# ---------------------------------------------------------------------------
# Fourier-side brute-force oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierWCE:
    value: float
    tail_bound: float


def _zeta_partial(a: float, h_max: int) -> float:
    hs = np.arange(1, h_max + 1, dtype=float)
    return float(np.sum(hs ** (-a)))


def _zeta_tail(a: float, h_max: int) -> float:
    return guarded_zeta(a) - _zeta_partial(a, h_max)


def wce_fourier_oracle(space: WeightedSpace, z: GeneratingVector, h_max: int,
                       decay: Optional["DecayEstimate"] = None) -> FourierWCE:
    """Truncated dual-lattice sum of Fourier coefficients, with a tail bound.

    Brute-force enumeration of frequency vectors with |h_j| <= h_max whose
    dot product with z vanishes mod N; limited to s <= 3 and N <= 64.
    """
    s = z.dimension
    n = z.n_points
    if s > 3 or n > 64:
        raise CapabilityError("brute-force oracle limited to s <= 3, N <= 64")
    if space.dimension != s:
        raise UsageError("space and vector dimension mismatch")
    if decay is None:
        decay = fit_decay(space)

    def coef(j, h):
        return theta_hat(space, j, h)

    scheme = space.weights
    total = 0.0
    coords = list(range(1, s + 1))

    # singletons: gcd(z_j, N) = 1 forces h to be a multiple of N
    for j in coords:
        g = scheme.gamma_subset((j,))
        acc = 0.0
        for mult in range(1, h_max // n + 1):
            acc += 2.0 * coef(j, mult * n)
        total += g * acc

    # pairs
    import itertools
    for j1, j2 in itertools.combinations(coords, 2):
        g = scheme.gamma_subset((j1, j2))
        z1, z2 = z.components[j1 - 1], z.components[j2 - 1]
        inv2 = pow(z2, -1, n)
        acc = 0.0
        for h1 in range(-h_max, h_max + 1):
            if h1 == 0:
                continue
            h2_0 = (-h1 * z1 * inv2) % n
            for h2 in range(h2_0 - ((h2_0 + h_max) // n) * n, h_max + 1, n):
                if h2 == 0 or h2 < -h_max:
                    continue
                acc += coef(j1, h1) * coef(j2, h2)
        total += g * acc

    # triples
    if s == 3:
        g = scheme.gamma_subset((1, 2, 3))
        z1, z2, z3 = z.components
        inv3 = pow(z3, -1, n)
        acc = 0.0
        for h1 in range(-h_max, h_max + 1):
            if h1 == 0:
                continue
            c1 = coef(1, h1)
            for h2 in range(-h_max, h_max + 1):
                if h2 == 0:
                    continue
                h3_0 = (-(h1 * z1 + h2 * z2) * inv3) % n
                for h3 in range(h3_0 - ((h3_0 + h_max) // n) * n, h_max + 1, n):
                    if h3 == 0 or h3 < -h_max:
                        continue
                    acc += c1 * coef(2, h2) * coef(3, h3)
        total += g * acc

    # tail bound on omitted frequencies (some |h_j| > h_max)
    tail = 0.0
    for j in coords:
        c, r = decay.constants[j - 1], decay.rates[j - 1]
        # singleton duals are multiples of N
        tail += scheme.gamma_subset((j,)) * 2.0 * c * n ** (-2 * r) * \
            _zeta_tail(2 * r, h_max // n if h_max >= n else 0)
    full = [2.0 * decay.constants[j - 1] * guarded_zeta(2 * decay.rates[j - 1])
            for j in coords]
    trunc = [2.0 * decay.constants[j - 1] *
             _zeta_partial(2 * decay.rates[j - 1], h_max) for j in coords]
    for size in (2, 3):
        if size > s:
            break
        for u in itertools.combinations(coords, size):
            g = scheme.gamma_subset(u)
            tail += g * (math.prod(full[j - 1] for j in u) -
                         math.prod(trunc[j - 1] for j in u))
    return FourierWCE(total, tail)


# ---------------------------------------------------------------------------
# decay fits and probabilistic bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayEstimate:
    """Per-coordinate Fourier decay bounds theta_hat_j(h) <= C_j / |h|^(2 r_j)."""

    rates: tuple
    constants: tuple

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "constants",
                          tuple(float(c) for c in self.constants))
        if any(r <= 0.5 for r in self.rates):
            raise SpaceInvalidError("decay rates must exceed 1/2")
        if any(c <= 0 for c in self.constants):
            raise SpaceInvalidError("decay constants must be positive")

    @property
    def rate(self) -> float:
        return min(self.rates)


def default_decay_frequencies(h_min: int = 2, h_max: int = 2 ** 14,
                              count: int = 64) -> np.ndarray:
    hs = np.unique(np.round(np.geomspace(h_min, h_max, count)).astype(int))
    return hs


def fit_decay(space: WeightedSpace, h_values=None, cap: float = 1.05) -> DecayEstimate:
    """Least-squares log-log fit of the Fourier decay, with the constant
    inflated so the bound holds at every sampled frequency."""
    if h_values is None:
        h_values = default_decay_frequencies()
    hs = np.unique(np.asarray(h_values, dtype=int))
    if len(hs) < 4:
        raise UsageError("decay fit needs at least 4 frequencies")
    if hs.max() < 100 * hs.min():
        raise UsageError("decay fit range must span at least two decades")
    rates, constants = [], []
    fitted: dict = {}
    for j, wf in enumerate(space.weight_functions, start=1):
        if wf.key() not in fitted:
            vals = np.array([theta_hat(space, j, int(h)) for h in hs])
            slope, _ = np.polyfit(np.log(hs), np.log(vals), 1)
            r = min(-slope / 2.0, cap)
            c = float(np.max(vals * hs.astype(float) ** (2 * r)))
            fitted[wf.key()] = (r, c)
        r, c = fitted[wf.key()]
        rates.append(r)
        constants.append(c)
    return DecayEstimate(tuple(rates), tuple(constants))


def guarded_zeta(a: float) -> float:
    if a < ZETA_GUARD:
        raise CapabilityError(
            f"zeta argument {a:.4f} too close to the pole at 1")
    return float(riemann_zeta(a, 1))


def weighted_zeta_sum(scheme: WeightScheme, decay: DecayEstimate,
                      lam: float) -> float:
    """sum over nonempty subsets u of gamma_u^lam * prod_j 2 C_j^lam zeta(2 r_j lam),
    in closed product form (product weights) or by order recursion (POD)."""
    a = np.array([
        scheme.gamma[j] ** lam * 2.0 * decay.constants[j] ** lam *
        guarded_zeta(2.0 * decay.rates[j] * lam)
        for j in range(scheme.dimension)
    ])
    if scheme.variant == "product":
        return float(np.expm1(np.sum(np.log1p(a))))
    # elementary symmetric polynomials e_l(a); in-place update runs high-to-low
    s = scheme.dimension
    e = np.zeros(s + 1)
    e[0] = 1.0
    for x in a:
        for level in range(s, 0, -1):
            e[level] += x * e[level - 1]
    of = np.asarray(scheme.order_factors) ** lam
    return float(np.dot(of[1:], e[1:]))


def epsilon_bound(space: WeightedSpace, n: int, delta: float, lam: float,
                  decay: DecayEstimate) -> float:
    """High-probability bound on the worst-case error of a random vector."""
    if not (0.0 < delta < 1.0):
        raise UsageError(f"delta must be in (0, 1), got {delta}")
    r = decay.rate
    if not (1.0 / (2.0 * r) < lam <= 1.0):
        raise UsageError(f"lambda {lam} outside (1/(2r), 1] for r = {r:.4f}")
    total = weighted_zeta_sum(space.weights, decay, lam)
    return (total / (delta * euler_totient(n))) ** (1.0 / (2.0 * lam))


def average_bound_rhs(space: WeightedSpace, n: int, lam: float,
                      decay: DecayEstimate) -> float:
    """Right side of the averaged-power bound: the mean of the squared
    worst-case error to the power lam, over uniformly random vectors, is at
    most this value."""
    r = decay.rate
    if not (1.0 / (2.0 * r) < lam <= 1.0):
        raise UsageError(f"lambda {lam} outside (1/(2r), 1] for r = {r:.4f}")
    return weighted_zeta_sum(space.weights, decay, lam) / euler_totient(n)


def theoretical_bound_infimum(n: int, grid_size: int = 40000,
                              s: int = 30) -> float:
    """Infimum of log2 of the probabilistic error bound at delta = 1 over a
    grid of (decay margin eta, exponent lambda) pairs, for the reference
    space with normal density, exp(-|x|/16) weight functions and
    per-coordinate weights 1/j^2. The decay parameters have the closed form
    r = 1 - eta, C = sqrt(2 pi) e^(1/(256 eta)) / (pi^(2-2 eta) (1-eta) eta).
    """
    side = max(2, int(math.isqrt(grid_size)))
    phi_n = euler_totient(n)
    g = 1.0 / np.arange(1, s + 1, dtype=float) ** 2
    best = np.inf
    etas = np.linspace(0.0, 0.5, side + 2)[1:-1]
    for eta in etas:
        r = 1.0 - eta
        c = (math.sqrt(2.0 * math.pi) * math.exp(1.0 / (256.0 * eta)) /
             (math.pi ** (2.0 - 2.0 * eta) * (1.0 - eta) * eta))
        lam_lo = 1.0 / (2.0 * r)
        lams = np.linspace(lam_lo, 1.0, side + 1)[1:]
        zs = riemann_zeta(2.0 * r * lams, 1)
        # closed product form of the subset sum for product weights
        log_sums = np.array([
            np.sum(np.log1p(g ** lam * 2.0 * c ** lam * zv))
            for lam, zv in zip(lams, zs)
        ])
        with np.errstate(over="ignore"):
            sums = np.expm1(log_sums)
        log2_eps = (np.log2(sums) - np.log2(phi_n)) / (2.0 * lams)
        best = min(best, float(np.min(log2_eps)))
    return best


def choose_k(n: int, r: float, schedule: str = "fixed-r") -> int:
    """Smallest odd replicate count meeting the convergence schedule."""
    if n < 2:
        raise UsageError(f"need N >= 2, got {n}")
    if r <= 0:
        raise UsageError(f"need r > 0, got {r}")
    if schedule == "fixed-r":
        factor = r
    elif schedule == "slow-growth":
        factor = max(1.0, math.log(math.log(n))) if n > math.e else 1.0
    else:
        raise UsageError(f"unknown schedule {schedule!r}")
    k = 4 * math.ceil(factor * math.log2(n)) - 1
    return max(k, 1)


# ---------------------------------------------------------------------------
# configuration loading
# ---------------------------------------------------------------------------

def space_from_config(cfg: dict) -> WeightedSpace:
    """Build a WeightedSpace from a config mapping.

    Expected keys: density (default "standard-normal"), dimension,
    alpha (scalar or list; weight-function rate), scale (default 1),
    weights {variant, gamma (list or "1/j^2"), order_factors for pod}.
    """
    try:
        s = int(cfg["dimension"])
    except KeyError:
        raise UsageError("space config needs 'dimension'") from None
    density = Density(cfg.get("density", "standard-normal"))
    alpha = cfg.get("alpha", 1.0 / 16.0)
    scale = cfg.get("scale", 1.0)
    alphas = [float(alpha)] * s if np.isscalar(alpha) else [float(a) for a in alpha]
    scales = [float(scale)] * s if np.isscalar(scale) else [float(x) for x in scale]
    if len(alphas) != s or len(scales) != s:
        raise UsageError("alpha/scale lists must match the dimension")
    wfs = tuple(WeightFunction("exp-abs", sc, al)
                for sc, al in zip(scales, alphas))
    wcfg = cfg.get("weights", {"variant": "product", "gamma": "1/j^2"})
    gamma = wcfg.get("gamma", "1/j^2")
    if isinstance(gamma, str):
        if gamma != "1/j^2":
            raise UsageError(f"unknown gamma shorthand {gamma!r}")
        gamma = [1.0 / j ** 2 for j in range(1, s + 1)]
    variant = wcfg.get("variant", "product")
    if variant == "product":
        scheme = WeightScheme.product(gamma)
    elif variant == "pod":
        scheme = WeightScheme.pod(wcfg["order_factors"], gamma)
    else:
        raise UsageError(f"unknown weight variant {variant!r}")
    return WeightedSpace(density, wfs, scheme)
