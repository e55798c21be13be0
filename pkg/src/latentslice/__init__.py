"""Latent slice sampling and a rejection-free discrete transition kernel."""

from .baselines import EllipseState, EllipticalConfig, SteppingOutConfig, elliptical_step, gibbs_sweep_slice, run_gibbs_slice, slice_step_1d, stepping_out
from .discrete import DiscreteTarget, detailed_balance_residual, discrete_step, transition_matrix, transition_probability
from .errors import InvalidIntervalError, InvalidParameterError, InvalidStateError, InvalidTargetError, SamplerError, ShrinkStallError
from .latent import ChainOutput, LatentSliceConfig, LatentState, LogDensity, run_chain, shrink_sample, step
from .rng import make_rng

__version__ = "0.1.0"

__all__ = [
    "ChainOutput",
    "DiscreteTarget",
    "EllipseState",
    "EllipticalConfig",
    "InvalidIntervalError",
    "InvalidParameterError",
    "InvalidStateError",
    "InvalidTargetError",
    "LatentSliceConfig",
    "LatentState",
    "LogDensity",
    "SamplerError",
    "ShrinkStallError",
    "SteppingOutConfig",
    "detailed_balance_residual",
    "discrete_step",
    "elliptical_step",
    "gibbs_sweep_slice",
    "make_rng",
    "run_chain",
    "run_gibbs_slice",
    "shrink_sample",
    "slice_step_1d",
    "step",
    "stepping_out",
    "transition_matrix",
    "transition_probability",
]
