"""Compound Hawkes models of limit-order-book mid-prices.

Simulation, closed-form diffusion coefficients, maximum-likelihood fitting
and an empirical verification pipeline for LOBSTER-format data.
"""

from .compound import CompoundModel, CompoundPath, simulate_compound
from .diffusion import (
    LimitParams,
    chpdo_closed_form,
    compute_limit_params,
    diffusion_coefficient,
    lln_drift,
    nonlinear_diffusion_coefficient,
    two_state_closed_form,
)
from .hawkes import (
    Capped,
    EventSequence,
    ExponentialKernel,
    HawkesSpec,
    Identity,
    Indicator,
    NullKernel,
    PowerLawKernel,
    SimulationError,
    SupercriticalError,
    branching_ratio,
    compensator,
    intensity_at,
    rescaled_interarrivals,
    simulate,
)
from .markov import ChainError, estimate_transitions, fundamental_solve, simulate_chain, stationary_distribution
from .mle import FitConfig, FitResult, expected_unit_arrivals, fit_mle, log_likelihood

__version__ = "0.1.0"

__all__ = [
    "Capped",
    "ChainError",
    "CompoundModel",
    "CompoundPath",
    "EventSequence",
    "ExponentialKernel",
    "FitConfig",
    "FitResult",
    "HawkesSpec",
    "Identity",
    "Indicator",
    "LimitParams",
    "NullKernel",
    "PowerLawKernel",
    "SimulationError",
    "SupercriticalError",
    "branching_ratio",
    "chpdo_closed_form",
    "compensator",
    "compute_limit_params",
    "diffusion_coefficient",
    "estimate_transitions",
    "expected_unit_arrivals",
    "fit_mle",
    "fundamental_solve",
    "intensity_at",
    "lln_drift",
    "log_likelihood",
    "nonlinear_diffusion_coefficient",
    "rescaled_interarrivals",
    "simulate",
    "simulate_chain",
    "simulate_compound",
    "stationary_distribution",
    "two_state_closed_form",
]
