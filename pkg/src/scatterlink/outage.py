"""Outage probability of the two-state link.

The outage event is rho_bar * h^2 <= rho_t. For the absorbing state the
probability has the closed form erf(sqrt(x_t)) with x_t = rho_t /
(2 var_sr rho_bar). For the reflecting state it is the series

    P_o = (1 / pi) * sum_{k>=0} [Gamma(k+1/2) / k!] * sqrt(nu)
          * Psi(k+1/2, 1, nu) * gamma_low(k+1/2, x_t),

summed here in log domain term by term. An a-priori bound on the tail
sum_{k>T} is available in closed form, so the number of terms is chosen
before summation: T is the smallest index whose bound meets the requested
absolute tolerance. The high-SNR asymptote of both states decays like
rho_bar^{-1/2}, which is what the diversity estimator measures.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    EffectiveVariances,
    OutageQuery,
    ScenarioParams,
    TagState,
    derive_effective,
)
from .specfun import (
    Accuracy,
    DEFAULT_ACCURACY,
    ConvergenceError,
    DomainError,
    erf,
    ln_lower_inc_gamma,
    ln_tricomi_psi,
)

__all__ = [
    "SeriesResult",
    "UnboundedDistanceError",
    "InfeasibleTargetError",
    "outage_exact",
    "outage_partial_sum",
    "truncation_bound",
    "outage_asymptotic",
    "diversity_gain_estimate",
    "max_distance_for_outage",
]


class UnboundedDistanceError(ValueError):
    """The outage probability does not depend on the requested distance."""


class InfeasibleTargetError(ValueError):
    """The outage target is exceeded everywhere in the search bracket."""


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of an outage evaluation.

    value is the probability, terms_used the last series index T (0 for the
    closed-form absorbing state), error_bound the a-priori tail bound at T,
    and converged records whether the bound met the requested tolerance.
    """

    value: float
    terms_used: int
    error_bound: float
    converged: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"outage value outside [0, 1]: {self.value}")
        if self.error_bound < 0.0:
            raise DomainError(f"negative error bound: {self.error_bound}")
        if self.terms_used < 0:
            raise DomainError(f"negative terms_used: {self.terms_used}")


def _threshold_x(query: OutageQuery, eff: EffectiveVariances) -> float:
    """x_t = rho_t / (2 var_sr rho_bar), the normalized threshold."""
    return query.rho_t / (2.0 * eff.var_sr * query.rho_bar)


def _require_product_path(eff: EffectiveVariances) -> None:
    if not eff.phi > 0:
        raise DomainError(
            "reflecting-state outage is undefined for eta = 0 "
            "(product path vanishes, nu diverges)"
        )


def outage_partial_sum(n_terms: int, query: OutageQuery,
                       eff: EffectiveVariances,
                       acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Reflecting-state series summed through index T = n_terms inclusive.

    Unclamped on purpose: callers comparing against quadrature need the raw
    partial sum.
    """
    if n_terms < 0:
        raise DomainError(f"n_terms must be >= 0, got {n_terms}")
    _require_product_path(eff)
    x_t = _threshold_x(query, eff)
    half_ln_nu = 0.5 * math.log(eff.nu)
    total = 0.0
    for k in range(n_terms + 1):
        ln_term = (
            math.lgamma(k + 0.5)
            - math.lgamma(k + 1.0)
            - math.log(math.pi)
            + half_ln_nu
            + ln_tricomi_psi(k + 0.5, 1.0, eff.nu, acc)
            + ln_lower_inc_gamma(k + 0.5, x_t)
        )
        total += math.exp(ln_term)
    return total


def truncation_bound(T: int, query: OutageQuery, eff: EffectiveVariances,
                     acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """A-priori bound on the series tail beyond index T.

    bound(T) = Psi(1/2, 0, nu) / (sqrt(pi nu) T!)
               * [sqrt(2 rho_t / (var_sr rho_bar)) * gamma_low(T+1, x_t)
                  - 2 * gamma_low(T+3/2, x_t)].

    The bracket is a difference of nearby positive quantities, so both are
    kept in log domain and combined through log1p. Roundoff can push the
    mathematically nonnegative result below zero; that case is clamped to
    zero and flagged with a warning.
    """
    if T < 0:
        raise DomainError(f"T must be >= 0, got {T}")
    _require_product_path(eff)
    x_t = _threshold_x(query, eff)
    if x_t == 0.0:
        return 0.0
    ln_pre = (
        ln_tricomi_psi(0.5, 0.0, eff.nu, acc)
        - 0.5 * math.log(math.pi * eff.nu)
        - math.lgamma(T + 1.0)
    )
    # sqrt(2 rho_t / (var_sr rho_bar)) = 2 sqrt(x_t)
    ln_a = 0.5 * math.log(x_t) + ln_lower_inc_gamma(T + 1.0, x_t)
    ln_b = ln_lower_inc_gamma(T + 1.5, x_t)
    if ln_b >= ln_a:
        warnings.warn(
            "truncation bound bracket went nonpositive from roundoff; "
            "clamping to 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    ln_bracket = math.log(2.0) + ln_a + math.log1p(-math.exp(ln_b - ln_a))
    return math.exp(ln_pre + ln_bracket)


def outage_exact(query: OutageQuery, state: TagState, eff: EffectiveVariances,
                 acc: Accuracy = DEFAULT_ACCURACY) -> SeriesResult:
    """Outage probability P(rho_bar h^2 <= rho_t).

    Absorbing state: the closed erf form, no series machinery. Reflecting
    state: T is chosen as the smallest index whose a-priori tail bound is
    at most query.abs_tol, then the series is summed through T. Raises
    ConvergenceError when no T within acc.max_terms satisfies the bound.
    """
    x_t = _threshold_x(query, eff)
    if state.b == 0:
        return SeriesResult(value=erf(math.sqrt(x_t)), terms_used=0,
                            error_bound=0.0, converged=True)
    _require_product_path(eff)
    chosen = None
    for T in range(acc.max_terms + 1):
        bound = truncation_bound(T, query, eff, acc)
        if bound <= query.abs_tol:
            chosen = (T, bound)
            break
    if chosen is None:
        raise ConvergenceError(
            f"tail bound stayed above abs_tol={query.abs_tol} for all "
            f"T <= {acc.max_terms} (x_t={x_t:.6g}, nu={eff.nu:.6g})"
        )
    T, bound = chosen
    value = outage_partial_sum(T, query, eff, acc)
    return SeriesResult(value=min(1.0, max(0.0, value)), terms_used=T,
                        error_bound=bound, converged=True)


def outage_asymptotic(query: OutageQuery, state: TagState,
                      eff: EffectiveVariances,
                      acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """High-SNR outage asymptote, decaying exactly like rho_bar^{-1/2}.

    Absorbing state: sqrt(2 rho_t / (pi var_sr rho_bar)). Reflecting state:
    the same times sqrt(nu) Psi(1/2, 1, nu), the product-path correction.
    Intentionally unclamped; at low SNR the value may exceed 1.
    """
    if not query.rho_bar > 0:
        raise DomainError("asymptote requires rho_bar > 0")
    base = math.sqrt(2.0 * query.rho_t / (math.pi * eff.var_sr * query.rho_bar))
    if state.b == 0:
        return base
    _require_product_path(eff)
    correction = math.exp(
        0.5 * math.log(eff.nu) + ln_tricomi_psi(0.5, 1.0, eff.nu, acc)
    )
    return base * correction


def diversity_gain_estimate(state: TagState, eff: EffectiveVariances,
                            query_template: OutageQuery,
                            snr_db_lo: float, snr_db_hi: float,
                            n_points: int = 9,
                            acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Negated log-log slope of the exact outage over a high-SNR window.

    Fits log10(P_o) against log10(rho_bar) by least squares over n_points
    evenly spaced dB values and returns the negated slope, which should sit
    near 1/2 for both states.
    """
    if snr_db_lo < 30.0 or snr_db_hi <= snr_db_lo:
        raise DomainError(
            "diversity fit window must satisfy 30 <= lo < hi, got "
            f"[{snr_db_lo}, {snr_db_hi}]"
        )
    if n_points < 5:
        raise DomainError(f"need at least 5 fit points, got {n_points}")
    snrs_db = np.linspace(snr_db_lo, snr_db_hi, n_points)
    log_po = []
    for snr_db in snrs_db:
        query = replace(query_template, rho_bar_db=float(snr_db))
        log_po.append(math.log10(outage_exact(query, state, eff, acc).value))
    slope = np.polyfit(snrs_db / 10.0, np.asarray(log_po), 1)[0]
    return -float(slope)


def max_distance_for_outage(target_po: float, query: OutageQuery,
                            params: ScenarioParams, state: TagState,
                            acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Largest tag-to-reader distance keeping outage at or below target_po.

    Bisects d_tr over [1e-3 m, 10 d_sr] down to 0.01 m; outage is monotone
    nondecreasing in d_tr (the product-path variance shrinks with distance),
    so the crossing is unique. Raises UnboundedDistanceError for the
    absorbing state, whose outage ignores d_tr entirely, and
    InfeasibleTargetError when even the shortest bracketed distance exceeds
    the target. Returns the bracket top when the target is met everywhere.
    """
    if not 0.0 < target_po < 1.0:
        raise DomainError(f"target_po must lie in (0, 1), got {target_po}")
    if state.b == 0:
        raise UnboundedDistanceError(
            "absorbing-state outage does not depend on d_tr"
        )

    def po_at(d_tr: float) -> float:
        eff = derive_effective(replace(params, d_tr=d_tr))
        return outage_exact(query, state, eff, acc).value

    lo, hi = 1e-3, 10.0 * params.d_sr
    if po_at(lo) > target_po:
        raise InfeasibleTargetError(
            f"outage at d_tr={lo} m already exceeds target {target_po}"
        )
    if po_at(hi) <= target_po:
        return hi
    while hi - lo > 0.01:
        mid = 0.5 * (lo + hi)
        if po_at(mid) <= target_po:
            lo = mid
        else:
            hi = mid
    return lo
