"""Test integrands: exp-linear validation, pre-integrated Asian put, elliptic ODE.

Each problem exposes an Integrand over R^s (the estimator owns the inverse-CDF
transform) plus a weight-recipe constructor returning the WeightedSpace the
CBC baseline uses for that problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr, zeta

from .errors import DomainError, SpaceInvalidError, UsageError
from .estimators import Integrand
from .numerics import STANDARD_NORMAL, composite_gauss_legendre_nodes
from .space import WeightFunction, WeightScheme, WeightedSpace

# Newton iterates for the pre-integration root are confined to this range;
# beyond it Phi saturates to 0/1 in double precision anyway.
XI_LIMIT = 60.0


# ---------------------------------------------------------------------------
# closed-form validation integrand
# ---------------------------------------------------------------------------

def exp_linear_integrand(a) -> Integrand:
    """f(y) = exp(sum_j a_j y_j); exact normal-expectation exp(|a|^2 / 2)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1 or not np.all(np.isfinite(a)):
        raise UsageError("coefficient vector must be a finite 1-d array")
    exact = float(np.exp(0.5 * np.dot(a, a)))

    def evaluate(y):
        return np.exp(np.asarray(y, dtype=float) @ a)

    return Integrand(a.size, evaluate, f"exp-linear-s{a.size}", exact)


# ---------------------------------------------------------------------------
# Asian put option (PCA path construction, pre-integrated)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PCAMatrix:
    """Closed-form PCA factor A of the Brownian covariance min(t_m, t_n).

    entries has shape (d+1, d+1); row m holds the loadings of observation
    time t_m = (m+1) T / (d+1) on the principal components, ordered by
    decreasing variance, so column 0 carries the dominant factor.
    """

    entries: np.ndarray
    times: np.ndarray

    @property
    def d(self) -> int:
        return self.entries.shape[0] - 1


def pca_matrix(d: int, maturity: float) -> PCAMatrix:
    if d < 1:
        raise UsageError(f"need d >= 1, got {d}")
    if not maturity > 0:
        raise UsageError(f"maturity must be positive, got {maturity}")
    m = np.arange(d + 1)[:, None]
    i = np.arange(d + 1)[None, :]
    q = 2 * d + 3
    entries = (math.sqrt(maturity / ((d + 1) * q))
               * np.sin((m + 1) * (2 * i + 1) * np.pi / q)
               / np.sin((2 * i + 1) * np.pi / (2 * q)))
    times = (np.arange(d + 1) + 1) * maturity / (d + 1)
    return PCAMatrix(entries, times)


@dataclass(frozen=True)
class AsianSpec:
    """Arithmetic Asian put under Black-Scholes, d+1 monitoring dates."""

    s0: float = 100.0
    rate: float = 0.1
    sigma: float = 0.2
    maturity: float = 1.0
    d: int = 15
    mode: str = "value"  # "value": discounted put payoff; "cdf": P(avg <= x)
    strike: float = 110.0
    threshold: float = 110.0

    def __post_init__(self):
        if self.mode not in ("value", "cdf"):
            raise UsageError(f"unknown payoff mode {self.mode!r}")
        for name in ("s0", "sigma", "maturity", "strike", "threshold"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.d < 1:
            raise UsageError(f"need d >= 1, got {self.d}")

    @property
    def target(self) -> float:
        return self.strike if self.mode == "value" else self.threshold

    def drift(self, times: np.ndarray) -> np.ndarray:
        return (self.rate - 0.5 * self.sigma ** 2) * times


def asian_average(spec: AsianSpec, A: PCAMatrix, y: np.ndarray) -> np.ndarray:
    """Discrete arithmetic average h(y) of the asset path, (batch,) or scalar.

    Accumulated in log space: the per-date log prices can reach ~ +-15 sigma
    at extreme lattice points, and exp of the average is still safe where exp
    of individual terms may not be.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[1] != A.d + 1:
        raise UsageError(f"points must have dimension {A.d + 1}")
    log_terms = (math.log(spec.s0 / (A.d + 1))
                 + spec.drift(A.times)[None, :]
                 + spec.sigma * (y @ A.entries.T))
    out = np.exp(logsumexp(log_terms, axis=1))
    return out if out.size > 1 else float(out[0])


def _mu(spec: AsianSpec, A: PCAMatrix, y_rest: np.ndarray) -> np.ndarray:
    """Per-date log-price drift with the dominant coordinate left out.

    mu_m = (R - sigma^2/2) t_m + sigma * sum_{i>=1} A_{mi} y_i, shape
    (batch, d+1) for y_rest of shape (batch, d).
    """
    return (spec.drift(A.times)[None, :]
            + spec.sigma * (y_rest @ A.entries[:, 1:].T))


def _xi_newton(spec: AsianSpec, A: PCAMatrix, x: float,
               mu: np.ndarray) -> np.ndarray:
    """Solve h(xi, y_rest) = x for the dominant coordinate, per batch row.

    Works on g(v) = log h(v) - log x, which is convex and strictly increasing
    in v (log-sum-exp of affine functions with positive slopes sigma*A_{m0}),
    so after one Newton step the iterates decrease monotonically to the root.
    Iterates are clamped to [-XI_LIMIT, XI_LIMIT].
    """
    slopes = spec.sigma * A.entries[:, 0]  # all positive
    base = math.log(spec.s0 / (A.d + 1)) + mu - math.log(x)
    v = np.zeros(mu.shape[0])
    for _ in range(80):
        e = base + v[:, None] * slopes[None, :]
        g = logsumexp(e, axis=1)
        w = np.exp(e - g[:, None])
        step = g / (w @ slopes)
        v = np.clip(v - step, -XI_LIMIT, XI_LIMIT)
        if np.all(np.abs(step) < 1e-13):
            break
    return v


def xi_root(spec: AsianSpec, A: PCAMatrix, x: float,
            y_rest: np.ndarray) -> np.ndarray:
    """The unique xi with average price h(xi, y_rest) = x.

    y_rest holds coordinates 1..d (the dominant coordinate excluded); accepts
    a single point or a (batch, d) array.
    """
    if not x > 0:
        raise UsageError(f"threshold must be positive, got {x}")
    y_rest = np.atleast_2d(np.asarray(y_rest, dtype=float))
    if y_rest.shape[1] != A.d:
        raise UsageError(f"conditioning point must have dimension {A.d}")
    mu = _mu(spec, A, y_rest)
    xi = _xi_newton(spec, A, x, mu)
    if np.any(np.abs(xi) >= XI_LIMIT):
        raise DomainError(
            f"no root with |xi| <= {XI_LIMIT}: threshold {x} unattainable "
            "at double precision for some conditioning point")
    return xi if xi.size > 1 else float(xi[0])


def preintegrated_asian(spec: AsianSpec, A: PCAMatrix) -> Integrand:
    """The payoff with the dominant PCA coordinate integrated out analytically.

    cdf mode returns Phi(xi); value mode evaluates the Gaussian closed form of
    exp(-RT) * int_{-inf}^{xi} (K - h(y0, y_rest)) phi(y0) dy0, namely
    exp(-RT) * [K Phi(xi) - sum_m c_m exp(mu_m + a_m^2/2) Phi(xi - a_m)]
    with a_m = sigma A_{m0} and c_m = S0/(d+1). Both modes are smooth in
    y_rest; the root is clamped at +-XI_LIMIT where Phi has saturated anyway.
    """
    if A.d != spec.d:
        raise UsageError("PCA matrix size does not match the spec")
    x = spec.target
    slopes = spec.sigma * A.entries[:, 0]
    log_c = math.log(spec.s0 / (spec.d + 1))
    discount = math.exp(-spec.rate * spec.maturity)

    def evaluate(y_rest):
        y_rest = np.atleast_2d(np.asarray(y_rest, dtype=float))
        mu = _mu(spec, A, y_rest)
        xi = _xi_newton(spec, A, x, mu)
        if spec.mode == "cdf":
            out = ndtr(xi)
        else:
            log_terms = (log_c + mu + 0.5 * slopes[None, :] ** 2
                         + log_ndtr(xi[:, None] - slopes[None, :]))
            out = discount * (x * ndtr(xi) - np.exp(logsumexp(log_terms, axis=1)))
        return out if out.size > 1 else float(out[0])

    tag = f"K{spec.strike:g}" if spec.mode == "value" else f"x{spec.threshold:g}"
    return Integrand(spec.d, evaluate, f"asian-{spec.mode}-{tag}")


def asian_weight_recipe(spec: AsianSpec) -> WeightedSpace:
    """Product-weight space for the pre-integrated payoff over R^d.

    psi_j^2(x) = L0 exp(-2 L0 |x|) with L0 = sigma sqrt(T(2d+3)/(d+1)), and
    gamma_j = L_j^{4/3} with L_j = L0 / (2j+1).
    """
    lam0 = spec.sigma * math.sqrt(
        spec.maturity * (2 * spec.d + 3) / (spec.d + 1))
    j = np.arange(1, spec.d + 1)
    gamma = (lam0 / (2 * j + 1)) ** (4.0 / 3.0)
    wf = WeightFunction("exp-abs", scale=lam0, rate=lam0)
    return WeightedSpace.with_product_weights(STANDARD_NORMAL, wf, gamma)


# ---------------------------------------------------------------------------
# elliptic ODE with lognormal random coefficient
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PDESpec:
    """-(a u')' = 1 on (0,1), u(0)=u(1)=0, a = exp(sum b_j sin(2 pi j x) y_j).

    The quantity of interest is u(x0); coefficient decay is b_j = 1/j^2.
    """

    dimension: int = 30
    x0: float = 1.0 / 3.0
    subintervals: int = 100
    nodes_per_subinterval: int = 2

    def __post_init__(self):
        if self.dimension < 1:
            raise UsageError(f"need dimension >= 1, got {self.dimension}")
        if not 0.0 < self.x0 < 1.0:
            raise UsageError(f"x0 must lie in (0,1), got {self.x0}")
        if self.subintervals < 1 or self.nodes_per_subinterval < 1:
            raise UsageError("quadrature plan must be positive")

    def decay(self) -> np.ndarray:
        return 1.0 / np.arange(1, self.dimension + 1, dtype=float) ** 2


def _sin_basis(spec: PDESpec, t: np.ndarray) -> np.ndarray:
    """(s, len(t)) matrix of b_j sin(2 pi j t) so that log a = y @ basis."""
    j = np.arange(1, spec.dimension + 1, dtype=float)
    return spec.decay()[:, None] * np.sin(2.0 * np.pi * j[:, None] * t[None, :])


def pde_solution(spec: PDESpec, y: np.ndarray) -> np.ndarray:
    """u(x0, y) for a single point or a (batch, s) array of points.

    Evaluates the quadrature-closed form u(x) = int_0^x (c - t)/a dt with
    c = (int_0^1 t/a) / (int_0^1 1/a), all integrals by composite
    Gauss-Legendre on a fixed node set (the inner integral keeps the same
    node density on [0, x0]).
    """
    t, w = composite_gauss_legendre_nodes(0.0, 1.0, spec.subintervals,
                                          spec.nodes_per_subinterval)
    inner = max(1, math.ceil(spec.subintervals * spec.x0))
    t2, w2 = composite_gauss_legendre_nodes(0.0, spec.x0, inner,
                                            spec.nodes_per_subinterval)
    basis, basis2 = _sin_basis(spec, t), _sin_basis(spec, t2)

    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[1] != spec.dimension:
        raise UsageError(f"points must have dimension {spec.dimension}")
    inv_a = np.exp(-(y @ basis))
    c = (inv_a @ (w * t)) / (inv_a @ w)
    inv_a2 = np.exp(-(y @ basis2))
    u = c * (inv_a2 @ w2) - inv_a2 @ (w2 * t2)
    return u if u.size > 1 else float(u[0])


def pde_integrand(spec: PDESpec) -> Integrand:
    """u(x0, .) as an Integrand with the quadrature node sets built once."""
    t, w = composite_gauss_legendre_nodes(0.0, 1.0, spec.subintervals,
                                          spec.nodes_per_subinterval)
    inner = max(1, math.ceil(spec.subintervals * spec.x0))
    t2, w2 = composite_gauss_legendre_nodes(0.0, spec.x0, inner,
                                            spec.nodes_per_subinterval)
    basis, basis2 = _sin_basis(spec, t), _sin_basis(spec, t2)
    wt, w2t2 = w * t, w2 * t2

    def evaluate(y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        inv_a = np.exp(-(y @ basis))
        c = (inv_a @ wt) / (inv_a @ w)
        inv_a2 = np.exp(-(y @ basis2))
        out = c * (inv_a2 @ w2) - inv_a2 @ w2t2
        return out if out.size > 1 else float(out[0])

    return Integrand(spec.dimension, evaluate,
                     f"pde-x0-{spec.x0:g}-s{spec.dimension}")


def pde_weight_recipe(s: int, lam: float = 0.55) -> WeightedSpace:
    """POD-weight space for the ODE quantity of interest.

    With b_j = 1/j^2: alpha_1 from b_1 and alpha_j (j >= 2) from b_2 via
    alpha = (b + sqrt(b^2 + 1 - 1/(2 lam)))/2; order factors
    Gamma_l = [(l!)^2 / (ln 2)^{2l}]^{1/(1+lam)}; per-coordinate
    gamma_j = [bt_j^2 / ((alpha_j - b_j) rho_j)]^{1/(1+lam)} with
    rho_j = 2 (sqrt(2 pi) e^{alpha_j^2/eta} / (pi^{2-2 eta} (1-eta) eta))^lam
    * zeta(lam + 1/2), eta = (2 lam - 1)/(4 lam), and
    bt_j^2 = b_j^2 / (2 e^{b_j^2/2} Phi(b_j)).
    """
    if not 0.5 < lam <= 1.0:
        raise UsageError(f"lambda must lie in (1/2, 1], got {lam}")
    if s < 1:
        raise UsageError(f"need s >= 1, got {s}")
    j = np.arange(1, s + 1, dtype=float)
    b = 1.0 / j ** 2

    def alpha_of(bb):
        return 0.5 * (bb + math.sqrt(bb ** 2 + 1.0 - 1.0 / (2.0 * lam)))

    alpha = np.where(j == 1, alpha_of(1.0), alpha_of(0.25))
    if np.any(alpha <= b):
        raise SpaceInvalidError("alpha_j <= b_j: weight recipe degenerate")

    eta = (2.0 * lam - 1.0) / (4.0 * lam)
    rho = 2.0 * (math.sqrt(2.0 * np.pi) * np.exp(alpha ** 2 / eta)
                 / (np.pi ** (2.0 - 2.0 * eta) * (1.0 - eta) * eta)) ** lam \
        * zeta(lam + 0.5)
    bt2 = b ** 2 / (2.0 * np.exp(b ** 2 / 2.0) * ndtr(b))
    gamma = (bt2 / ((alpha - b) * rho)) ** (1.0 / (1.0 + lam))

    ell = np.arange(s + 1)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, s + 1)))))
    order = np.exp((2.0 * log_fact - 2.0 * ell * math.log(math.log(2.0)))
                   / (1.0 + lam))
    order[0] = 1.0

    wfs = tuple(WeightFunction("exp-abs", scale=1.0, rate=float(a))
                for a in alpha)
    return WeightedSpace(STANDARD_NORMAL, wfs,
                         WeightScheme.pod(order, gamma))
