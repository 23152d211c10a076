"""Median lattice-rule quasi-Monte Carlo toolkit.

Construction-free median-of-k randomized rank-1 lattice rules for integrals
over R^s with product densities, the weighted unanchored Sobolev worst-case
error machinery behind them, a component-by-component construction baseline,
and study harnesses for the accompanying experiments.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    CapabilityError,
    DomainError,
    MedianQMCError,
    NumericalConsistencyError,
    SpaceInvalidError,
    UsageError,
)
from .estimators import (
    Integrand,
    MAEStudy,
    MedianResult,
    ReplicateSet,
    mc_estimate,
    median_estimate,
    qmc_estimate,
    reference_value,
    run_mae_study,
)
from .lattice import GeneratingVector, SeedSpec, Shift
from .numerics import Density, QuadratureSpec, STANDARD_NORMAL
from .space import (
    DecayEstimate,
    ThetaTable,
    WeightFunction,
    WeightScheme,
    WeightedSpace,
    build_theta_table,
    choose_k,
    wce_squared,
)

__all__ = [
    "AccuracyError",
    "CapabilityError",
    "DomainError",
    "MedianQMCError",
    "NumericalConsistencyError",
    "SpaceInvalidError",
    "UsageError",
    "Integrand",
    "MAEStudy",
    "MedianResult",
    "ReplicateSet",
    "mc_estimate",
    "median_estimate",
    "qmc_estimate",
    "reference_value",
    "run_mae_study",
    "GeneratingVector",
    "SeedSpec",
    "Shift",
    "Density",
    "QuadratureSpec",
    "STANDARD_NORMAL",
    "DecayEstimate",
    "ThetaTable",
    "WeightFunction",
    "WeightScheme",
    "WeightedSpace",
    "build_theta_table",
    "choose_k",
    "wce_squared",
    "__version__",
]
