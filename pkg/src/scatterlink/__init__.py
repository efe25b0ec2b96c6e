"""Outage analysis of a two-state ambient backscatter link.

The effective reader channel is either a direct Gaussian path or the sum
of the direct path and a scaled product of two Gaussian paths, depending
on the binary tag state. This package provides the effective-channel and
SNR densities, the exact outage probability (closed form in one state, a
convergent series in the other), an a-priori truncation bound for that
series, the high-SNR asymptote, and Monte Carlo plus quadrature oracles,
with a CLI that regenerates the reference figure data.
"""
from .specfun import (
    Accuracy,
    ConvergenceError,
    DEFAULT_ACCURACY,
    DomainError,
    LogValue,
    bessel_k0,
    erf,
    ln_gamma,
    ln_lower_inc_gamma,
    ln_tricomi_psi,
    lower_inc_gamma,
    tricomi_psi,
    whittaker_w_neg_k_0,
)
from .model import (
    ABSORBING,
    REFLECTING,
    EffectiveVariances,
    OutageQuery,
    ScenarioParams,
    TagState,
    channel_pdf,
    db_to_linear,
    derive_effective,
    linear_to_db,
    product_pdf,
    snr_pdf,
)
from .outage import (
    InfeasibleTargetError,
    SeriesResult,
    UnboundedDistanceError,
    diversity_gain_estimate,
    max_distance_for_outage,
    outage_asymptotic,
    outage_exact,
    outage_partial_sum,
    truncation_bound,
)
from .oracle import (
    McConfig,
    McEstimate,
    McHistogram,
    mc_channel_histogram,
    mc_outage,
    quad_convolution_pdf,
    quad_outage,
    sample_effective_channel,
)

__version__ = "0.1.0"

__all__ = [
    "ABSORBING",
    "Accuracy",
    "ConvergenceError",
    "DEFAULT_ACCURACY",
    "DomainError",
    "EffectiveVariances",
    "InfeasibleTargetError",
    "LogValue",
    "McConfig",
    "McEstimate",
    "McHistogram",
    "OutageQuery",
    "REFLECTING",
    "ScenarioParams",
    "SeriesResult",
    "TagState",
    "UnboundedDistanceError",
    "bessel_k0",
    "channel_pdf",
    "db_to_linear",
    "derive_effective",
    "diversity_gain_estimate",
    "erf",
    "linear_to_db",
    "ln_gamma",
    "ln_lower_inc_gamma",
    "ln_tricomi_psi",
    "lower_inc_gamma",
    "max_distance_for_outage",
    "mc_channel_histogram",
    "mc_outage",
    "outage_asymptotic",
    "outage_exact",
    "outage_partial_sum",
    "product_pdf",
    "quad_convolution_pdf",
    "quad_outage",
    "sample_effective_channel",
    "snr_pdf",
    "tricomi_psi",
    "truncation_bound",
    "whittaker_w_neg_k_0",
]
