"""Finite-N toolkit for exchangeable Bernoulli mixtures.

Exact-rational and log-space computation of mixture prefix probabilities,
sample-mean laws, kernel-ratio diagnostics with region error budgets, tail
bounds, and moment-based recovery of the mixing measure.
"""

from .harness import (
    RatioScan,
    TailBounds,
    VerificationReport,
    ratio_scan,
    sandwich_bound,
    tail_bounds_check,
    verify_approximation,
)
from .model import (
    ExtendabilityError,
    MixingMeasure,
    MomentVector,
    PrefixEvent,
    SampleMeanLaw,
    ValidationError,
    check_complete_monotonicity,
    exchangeable_law_from_counts,
    mean_law_from_moments,
    mixture_prefix_prob,
    moments_from_measure,
    prefix_prob_from_mean_law,
    prefix_prob_from_moments,
    sample_mean_law,
    support_consistency_check,
)
from .numerics import (
    LogFactorialTable,
    LogSpaceValue,
    RatioFactors,
    RegionBounds,
    binomial,
    conditional_prefix_prob,
    conditional_prefix_prob_log,
    iid_kernel,
    iid_kernel_log,
    log_binomial,
    ratio_factors,
    ratio_factors_float,
    ratio_within_correction,
    region_bounds,
    replacement_correction,
    replacement_correction_float,
    replacement_correction_log,
)
from .oracle import (
    WordLaw,
    brute_conditional_prefix,
    brute_prefix_prob,
    word_law_from_mixture,
)
from .recovery import (
    RecoveredMeasure,
    WeakConvergenceDiagnostic,
    cdf_distance,
    recover_from_mean_law,
    recover_from_moments,
    weak_convergence_gap,
)

__version__ = "0.1.0"

__all__ = [
    "ExtendabilityError",
    "LogFactorialTable",
    "LogSpaceValue",
    "MixingMeasure",
    "MomentVector",
    "PrefixEvent",
    "RatioFactors",
    "RatioScan",
    "RecoveredMeasure",
    "RegionBounds",
    "SampleMeanLaw",
    "TailBounds",
    "ValidationError",
    "VerificationReport",
    "WeakConvergenceDiagnostic",
    "WordLaw",
    "binomial",
    "brute_conditional_prefix",
    "brute_prefix_prob",
    "cdf_distance",
    "check_complete_monotonicity",
    "conditional_prefix_prob",
    "conditional_prefix_prob_log",
    "exchangeable_law_from_counts",
    "iid_kernel",
    "iid_kernel_log",
    "log_binomial",
    "mean_law_from_moments",
    "mixture_prefix_prob",
    "moments_from_measure",
    "prefix_prob_from_mean_law",
    "prefix_prob_from_moments",
    "ratio_factors",
    "ratio_factors_float",
    "ratio_scan",
    "ratio_within_correction",
    "recover_from_mean_law",
    "recover_from_moments",
    "region_bounds",
    "replacement_correction",
    "replacement_correction_float",
    "replacement_correction_log",
    "sample_mean_law",
    "sandwich_bound",
    "support_consistency_check",
    "tail_bounds_check",
    "verify_approximation",
    "weak_convergence_gap",
    "word_law_from_mixture",
]
