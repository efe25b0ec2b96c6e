"""Physical scenario and probability densities of the two-state link.

A source transmits toward a reader while a passive tag either absorbs the
ambient signal (state B = 0) or reflects it (B = 1). The effective channel
seen by the reader is

    h = h_sr                         for B = 0,
    h = h_sr + eta * h_st * h_tr     for B = 1,

with independent zero-mean real Gaussian link gains whose variances follow
an inverse power path-loss law, sigma^2 = sigma_raw^2 / d^alpha. This module
houses the parameter records, the derived effective variances, the density
of h, the density of the Gaussian-product term, and the density of the
receive SNR rho = rho_bar * h^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import (
    Accuracy,
    DEFAULT_ACCURACY,
    ConvergenceError,
    DomainError,
    bessel_k0,
    ln_tricomi_psi,
)

__all__ = [
    "ScenarioParams",
    "EffectiveVariances",
    "TagState",
    "OutageQuery",
    "ABSORBING",
    "REFLECTING",
    "db_to_linear",
    "linear_to_db",
    "derive_effective",
    "channel_pdf",
    "product_pdf",
    "snr_pdf",
]

_CONSISTENCY_RTOL = 1e-15


def db_to_linear(value_db: float) -> float:
    """dB to linear power ratio: 10^(dB/10)."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Linear power ratio to dB."""
    if not value > 0:
        raise DomainError(f"dB conversion requires a positive value, got {value}")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class ScenarioParams:
    """Raw physical scenario.

    eta is the tag reflection attenuation factor in [0, 1]; the var_*_raw
    fields are the link variances before path loss; distances are in meters;
    alpha is the path-loss exponent.
    """

    eta: float = 0.7
    var_sr_raw: float = 1.0
    var_st_raw: float = 1.0
    var_tr_raw: float = 3.0
    d_sr: float = 1.0
    d_st: float = 1.0
    d_tr: float = 1.0
    alpha: float = 3.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        for name in ("var_sr_raw", "var_st_raw", "var_tr_raw",
                     "d_sr", "d_st", "d_tr", "alpha"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class EffectiveVariances:
    """Post-path-loss variances and the constants derived from them.

    nu = var_sr / (2 eta^2 var_st var_tr) controls how strongly the direct
    path dominates the product path, delta = sqrt(2 pi^3 var_sr) is the
    normalization of the reflecting-state channel density, and
    phi = eta sqrt(var_st var_tr) is the scale of the product term.
    Construction re-derives all three from the variances and rejects
    inconsistent records.
    """

    var_sr: float
    var_st: float
    var_tr: float
    eta: float
    nu: float
    delta: float
    phi: float

    def __post_init__(self) -> None:
        for name in ("var_sr", "var_st", "var_tr"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        phi = self.eta * math.sqrt(self.var_st * self.var_tr)
        nu = self.var_sr / (2.0 * phi * phi) if phi > 0 else math.inf
        delta = math.sqrt(2.0 * math.pi**3 * self.var_sr)
        for name, expected, got in (("phi", phi, self.phi),
                                    ("nu", nu, self.nu),
                                    ("delta", delta, self.delta)):
            if expected == got:
                continue
            denom = max(abs(expected), abs(got))
            if not math.isfinite(denom) or abs(expected - got) > 4 * _CONSISTENCY_RTOL * denom:
                raise DomainError(
                    f"inconsistent EffectiveVariances: {name}={got!r}, "
                    f"recomputed {expected!r}"
                )


@dataclass(frozen=True)
class TagState:
    """Tag symbol: b = 0 absorbs the ambient signal, b = 1 reflects it."""

    b: int

    def __post_init__(self) -> None:
        if self.b not in (0, 1):
            raise DomainError(f"tag state must be 0 or 1, got {self.b}")


ABSORBING = TagState(0)
REFLECTING = TagState(1)


@dataclass(frozen=True)
class OutageQuery:
    """Threshold SNR and average transmit SNR, both in dB, plus the absolute
    accuracy requested from the outage series."""

    rho_t_db: float
    rho_bar_db: float
    abs_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")

    @property
    def rho_t(self) -> float:
        return db_to_linear(self.rho_t_db)

    @property
    def rho_bar(self) -> float:
        return db_to_linear(self.rho_bar_db)


def derive_effective(params: ScenarioParams) -> EffectiveVariances:
    """Apply the path-loss division and compute the derived constants."""
    var_sr = params.var_sr_raw / params.d_sr**params.alpha
    var_st = params.var_st_raw / params.d_st**params.alpha
    var_tr = params.var_tr_raw / params.d_tr**params.alpha
    phi = params.eta * math.sqrt(var_st * var_tr)
    nu = var_sr / (2.0 * phi * phi) if phi > 0 else math.inf
    delta = math.sqrt(2.0 * math.pi**3 * var_sr)
    return EffectiveVariances(var_sr=var_sr, var_st=var_st, var_tr=var_tr,
                              eta=params.eta, nu=nu, delta=delta, phi=phi)


def _gaussian_pdf(x: float, var: float) -> float:
    return math.exp(-x * x / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def channel_pdf(x: float, state: TagState, eff: EffectiveVariances,
                acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Density of the effective channel h at x.

    For B = 0 this is the direct-path Gaussian. For B = 1 the density is

        f_h(x) = (sqrt(pi nu) / delta) * sum_{k>=0} [Gamma(k+1/2) / k!]
                 * Psi(k+1/2, 1, nu) * y^k * e^{-y},     y = x^2 / (2 var_sr),

    an even series with positive terms. Terms are built in log domain; the
    sum stops once a term drops below acc.abs_tol after the term sequence
    has been decreasing for three consecutive k (terms first grow with y).
    """
    if state.b == 0:
        return _gaussian_pdf(x, eff.var_sr)
    if not eff.phi > 0:
        raise DomainError(
            "reflecting-state density is undefined for eta = 0 "
            "(product path vanishes, nu diverges)"
        )
    y = x * x / (2.0 * eff.var_sr)
    ln_pre = 0.5 * math.log(math.pi * eff.nu) - math.log(eff.delta)
    if y == 0.0:
        # only the k = 0 term survives: (sqrt(pi nu) / delta) Gamma(1/2) Psi(1/2, 1, nu)
        return math.exp(ln_pre + math.lgamma(0.5)
                        + ln_tricomi_psi(0.5, 1.0, eff.nu, acc))
    ln_y = math.log(y)
    total = 0.0
    prev_term = math.inf
    decreasing = 0
    for k in range(acc.max_terms + 1):
        ln_term = (
            ln_pre
            + math.lgamma(k + 0.5)
            - math.lgamma(k + 1.0)
            + ln_tricomi_psi(k + 0.5, 1.0, eff.nu, acc)
            + k * ln_y
            - y
        )
        term = math.exp(ln_term)
        total += term
        decreasing = decreasing + 1 if term < prev_term else 0
        prev_term = term
        if term < acc.abs_tol and decreasing >= 3:
            return total
    raise ConvergenceError(
        f"channel density series did not settle within {acc.max_terms} terms "
        f"at x={x}, nu={eff.nu}"
    )


def product_pdf(x: float, eff: EffectiveVariances,
                acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Density of the product term xi = eta * h_st * h_tr at x != 0.

    f_xi(x) = K0(|x| / phi) / (pi phi); the log singularity at the origin is
    integrable but the point value is infinite, so x = 0 is rejected.
    """
    if x == 0.0:
        raise DomainError("product_pdf has a logarithmic singularity at x = 0")
    if not eff.phi > 0:
        raise DomainError("product term vanishes for eta = 0; density undefined")
    return bessel_k0(abs(x) / eff.phi, acc) / (math.pi * eff.phi)


def snr_pdf(x: float, state: TagState, query: OutageQuery,
            eff: EffectiveVariances, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Density of the receive SNR rho = rho_bar * h^2 at x > 0.

    f_rho(x) = f_h(sqrt(x / rho_bar)) / sqrt(rho_bar * x); the x^{-1/2}
    singularity at the origin is integrable.
    """
    if not x > 0:
        raise DomainError(f"snr_pdf requires x > 0, got {x}")
    rho_bar = query.rho_bar
    return channel_pdf(math.sqrt(x / rho_bar), state, eff, acc) / math.sqrt(rho_bar * x)
