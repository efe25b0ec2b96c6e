"""Self-contained special-function kernel.

Everything the analytical outage machinery needs lives here: the error
function, the lower incomplete gamma function (linear and log domain),
log-gamma, the modified Bessel function K0, Tricomi's confluent
hypergeometric function Psi(a, b, z), and the Whittaker function W_{-k,0}
returned in log domain.

Gamma-heavy quantities overflow double precision quickly (Gamma(a) already
at a ~ 171), so every routine that can grow keeps a log-domain companion and
the series code downstream combines terms with log-sum arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from scipy import integrate

__all__ = [
    "Accuracy",
    "DEFAULT_ACCURACY",
    "DomainError",
    "ConvergenceError",
    "LogValue",
    "erf",
    "ln_gamma",
    "lower_inc_gamma",
    "ln_lower_inc_gamma",
    "bessel_k0",
    "tricomi_psi",
    "ln_tricomi_psi",
    "whittaker_w_neg_k_0",
]

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_ITMAX = 10_000


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive evaluation missed its accuracy target."""


@dataclass(frozen=True)
class Accuracy:
    """Accuracy budget shared by all adaptive routines.

    Attributes
    ----------
    abs_tol : float
        Absolute tolerance (dimensionless) an evaluation should reach.
    max_terms : int
        Cap on series terms before giving up.
    max_quad_nodes : int
        Cap on total quadrature nodes per evaluation.
    """

    abs_tol: float = 1e-12
    max_terms: int = 200
    max_quad_nodes: int = 4096

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.max_quad_nodes < 8:
            raise DomainError(
                f"max_quad_nodes must be >= 8, got {self.max_quad_nodes}"
            )


DEFAULT_ACCURACY = Accuracy()


class LogValue(NamedTuple):
    """A real number stored as log-magnitude plus sign."""

    log_abs: float
    sign: int

    def value(self) -> float:
        """Back to linear scale; may under- or overflow by design."""
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf


def erf(x: float) -> float:
    """Error function, accurate to a few ulp on finite reals."""
    return math.erf(x)


def ln_gamma(a: float) -> float:
    """Natural log of Gamma(a) for a > 0."""
    if not a > 0:
        raise DomainError(f"ln_gamma requires a > 0, got {a}")
    return math.lgamma(a)


def _lower_gamma_series(a: float, x: float) -> float:
    """log of the series sum S in gamma(a,x) = x^a e^{-x} S, for x < a + 1.

    S = sum_{n>=0} x^n / (a (a+1) ... (a+n)). Terms are positive and the
    ratio x / (a+n) < 1 from some n on, so plain summation is stable.
    """
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            return math.log(total)
    raise ConvergenceError(
        f"incomplete gamma series stalled at a={a}, x={x}"
    )


def _upper_gamma_cf(a: float, x: float) -> float:
    """log of the continued fraction H in Gamma(a,x) = e^{-x} x^a H, x >= a + 1.

    Modified Lentz evaluation of the standard continued fraction.
    """
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.log(h)
    raise ConvergenceError(
        f"incomplete gamma continued fraction stalled at a={a}, x={x}"
    )


def ln_lower_inc_gamma(a: float, x: float) -> float:
    """log of the lower incomplete gamma function gamma(a, x).

    Series branch for x < a + 1, continued-fraction branch otherwise; the
    log keeps large-a evaluations (where gamma(a, x) itself overflows)
    usable by series code downstream. Returns -inf at x = 0.
    """
    if not a > 0:
        raise DomainError(f"lower_inc_gamma requires a > 0, got {a}")
    if x < 0:
        raise DomainError(f"lower_inc_gamma requires x >= 0, got {x}")
    if x == 0.0:
        return -math.inf
    if x < a + 1.0:
        return a * math.log(x) - x + _lower_gamma_series(a, x)
    # gamma(a,x) = Gamma(a) - Gamma(a,x); here Gamma(a,x) < Gamma(a) / 2
    # so the subtraction loses at most one bit.
    ln_upper = a * math.log(x) - x + _upper_gamma_cf(a, x)
    lg = math.lgamma(a)
    ratio = math.exp(ln_upper - lg)
    return lg + math.log1p(-ratio)


def lower_inc_gamma(a: float, x: float) -> float:
    """Lower incomplete gamma function gamma(a, x) = int_0^x e^{-t} t^{a-1} dt."""
    ln_val = ln_lower_inc_gamma(a, x)
    if ln_val == -math.inf:
        return 0.0
    try:
        return math.exp(ln_val)
    except OverflowError:
        return math.inf


def bessel_k0(x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Modified Bessel function of the second kind, order zero.

    Trapezoidal evaluation of K0(x) = int_0^inf exp(-x cosh t) dt. The
    integrand is analytic and decays double-exponentially, so halving the
    step converges super-geometrically; steps are halved until two passes
    agree to acc.abs_tol in relative terms.
    """
    if not x > 0:
        raise DomainError(f"bessel_k0 requires x > 0, got {x}")
    # Work relative to the t = 0 peak: K0 = e^{-x} int exp(-x (cosh t - 1)) dt.
    # Truncating once x (cosh t - 1) > 60 leaves a relative tail below 1e-26.
    t_max = math.acosh(1.0 + 60.0 / x)

    def trap(h: float) -> float:
        n = int(t_max / h) + 1
        if n > acc.max_quad_nodes:
            raise ConvergenceError(
                f"bessel_k0 needs {n} nodes at step {h}, budget is "
                f"{acc.max_quad_nodes}"
            )
        total = 0.5
        for j in range(1, n + 1):
            total += math.exp(-x * (math.cosh(j * h) - 1.0))
        return h * total

    h = 0.5
    prev = trap(h)
    for _ in range(8):
        h *= 0.5
        cur = trap(h)
        if abs(cur - prev) <= acc.abs_tol * abs(cur):
            scale = math.exp(-x) if x < 745.0 else 0.0
            return scale * cur
        prev = cur
    raise ConvergenceError(f"bessel_k0 failed to converge at x={x}")


def _quad_or_raise(f, lo, hi, acc: Accuracy) -> float:
    """Adaptive quadrature wrapper that enforces the node budget and checks
    the reported error estimate instead of letting warnings slip by."""
    limit = max(10, acc.max_quad_nodes // 21)
    out = integrate.quad(f, lo, hi, epsabs=1e-300, epsrel=1e-13,
                         limit=limit, full_output=1)
    val, abserr = out[0], out[1]
    if len(out) > 3:  # a message element means the tolerance was not met
        if abserr > 1e-9 * max(abs(val), 1e-300):
            raise ConvergenceError(
                f"quadrature error estimate {abserr:.2e} too large for "
                f"value {val:.6e}: {out[3]}"
            )
    return val


@lru_cache(maxsize=200_000)
def ln_tricomi_psi(a: float, b: float, z: float,
                   acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """log of Tricomi's confluent hypergeometric function Psi(a, b, z).

    Evaluates the integral representation

        Psi(a, b, z) = (1 / Gamma(a)) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt

    for a > 0, z > 0, after the rescaling s = z t, which pins the integrand's
    mass at an s-scale of order a for every z (without it the peak collapses
    toward t = 0 as z grows and adaptive quadrature loses it). For a >= 1 the
    integrand peaks at an interior saddle; the exponent is normalized by its
    maximum before quadrature so arbitrarily large a stays in range, and
    Gamma(a) is removed in log domain. For 0 < a < 1 the endpoint
    singularity s^{a-1} is flattened by the further substitution s = w^2.
    Results are cached: series evaluations re-request the same (a, b, z)
    triples heavily.
    """
    if not a > 0:
        raise DomainError(f"tricomi_psi requires a > 0, got a={a}")
    if not z > 0:
        raise DomainError(f"tricomi_psi requires z > 0, got z={z}")

    ln_z = math.log(z)
    if a >= 1.0:
        # Saddle of g(s) = -s + (a-1) ln s + (b-a-1) ln(1+s/z): the positive
        # root of s^2 + (z - b + 2) s - (a - 1) z = 0.
        c1 = z - b + 2.0
        disc = c1 * c1 + 4.0 * z * (a - 1.0)
        s_star = 0.5 * (-c1 + math.sqrt(disc))

        def g(s: float) -> float:
            return -s + (a - 1.0) * math.log(s) + (b - a - 1.0) * math.log1p(s / z)

        peak = g(s_star) if s_star > 0 else 0.0

        def f(s: float) -> float:
            if s <= 0.0:
                return 0.0 if a > 1.0 else math.exp(-peak)
            return math.exp(g(s) - peak)

        total = 0.0
        if s_star > 0:
            total += _quad_or_raise(f, 0.0, s_star, acc)
        total += _quad_or_raise(f, s_star, math.inf, acc)
        return peak + math.log(total) - math.lgamma(a) - a * ln_z

    # 0 < a < 1: s = w^2 gives 2 int_0^inf e^{-w^2} w^{2a-1} (1+w^2/z)^{b-a-1} dw.
    def fw(w: float) -> float:
        if w <= 0.0:
            return 0.0 if a < 0.5 else (2.0 if a == 0.5 else math.inf)
        return 2.0 * math.exp(
            -w * w
            + (2.0 * a - 1.0) * math.log(w)
            + (b - a - 1.0) * math.log1p(w * w / z)
        )

    total = _quad_or_raise(fw, 0.0, 1.0, acc) + _quad_or_raise(fw, 1.0, math.inf, acc)
    return math.log(total) - math.lgamma(a) - a * ln_z


def tricomi_psi(a: float, b: float, z: float,
                acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Tricomi's Psi(a, b, z) on linear scale (see ln_tricomi_psi)."""
    ln_val = ln_tricomi_psi(a, b, z, acc)
    try:
        return math.exp(ln_val)
    except OverflowError:
        return math.inf


def whittaker_w_neg_k_0(k: int, nu: float,
                        acc: Accuracy = DEFAULT_ACCURACY) -> LogValue:
    """Whittaker function W_{-k,0}(nu) in log domain.

    Uses the reduction W_{-k,0}(nu) = e^{-nu/2} sqrt(nu) Psi(k + 1/2, 1, nu),
    a specialization of W_{kappa,mu}(z) = e^{-z/2} z^{mu+1/2}
    Psi(mu - kappa + 1/2, 1 + 2 mu, z). The value decays roughly like
    exp(-2 sqrt(nu k)) in k, hence the log-domain return.
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"whittaker_w_neg_k_0 requires integer k >= 0, got {k}")
    if not nu > 0:
        raise DomainError(f"whittaker_w_neg_k_0 requires nu > 0, got {nu}")
    log_abs = -0.5 * nu + 0.5 * math.log(nu) + ln_tricomi_psi(k + 0.5, 1.0, nu, acc)
    return LogValue(log_abs=log_abs, sign=1)
