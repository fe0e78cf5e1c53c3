"""Multivariate size-biased couplings and the concentration bounds they imply."""

from .bounds import (
    BoundParams,
    bound_params,
    iid_bounds,
    lower_tail_bound,
    pattern_bound_params,
    univariate_bounds,
    upper_tail_bound,
)
from .couplings import (
    IndependentModel,
    LocalDependenceModel,
    SampledPair,
    sample_independent_coupling,
    sample_local_coupling,
)
from .harness import McConfig, VerificationReport, verify
from .model import MomentSummary, Pmf, expect, moments, size_bias_exact
from .patterns import PatternModel, sample_pattern_coupling

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "IndependentModel",
    "LocalDependenceModel",
    "McConfig",
    "MomentSummary",
    "PatternModel",
    "Pmf",
    "SampledPair",
    "VerificationReport",
    "bound_params",
    "expect",
    "iid_bounds",
    "lower_tail_bound",
    "moments",
    "pattern_bound_params",
    "sample_independent_coupling",
    "sample_local_coupling",
    "sample_pattern_coupling",
    "size_bias_exact",
    "univariate_bounds",
    "upper_tail_bound",
    "verify",
]
