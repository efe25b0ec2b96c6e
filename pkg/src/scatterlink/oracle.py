"""Independent ground truth: Monte Carlo simulation and adaptive quadrature.

The Monte Carlo sampler draws the three link gains directly from the system
model, so it never touches the analytical series it is used to validate.
Reproducibility is bit-exact and batch-independent: sample i consumes
counter block i of a Philox stream (four uniforms per block, three turned
into normals through the inverse CDF, one discarded), so any batch
decomposition of [0, n) regenerates identical samples.

The quadrature side integrates the SNR density with the x = u^2
substitution that removes the x^{-1/2} endpoint singularity, and evaluates
the reflecting-state channel density as an explicit Gaussian-product
convolution for cross-checking the series form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy import integrate
from scipy.special import ndtri

from .model import (
    EffectiveVariances,
    OutageQuery,
    TagState,
    channel_pdf,
    product_pdf,
)
from .specfun import (
    Accuracy,
    DEFAULT_ACCURACY,
    ConvergenceError,
    DomainError,
)

__all__ = [
    "McConfig",
    "McEstimate",
    "McHistogram",
    "sample_effective_channel",
    "mc_outage",
    "mc_channel_histogram",
    "quad_outage",
    "quad_convolution_pdf",
]


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run shape: sample count, stream seed, batch size."""

    n_samples: int = 1_000_000
    seed: int = 0
    batch_size: int = 250_000

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise DomainError(f"n_samples must be positive, got {self.n_samples}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be positive, got {self.batch_size}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must fit in 64 bits, got {self.seed}")


@dataclass(frozen=True)
class McEstimate:
    """Binomial estimate with its standard error."""

    p_hat: float
    stderr: float
    n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_hat <= 1.0:
            raise DomainError(f"p_hat outside [0, 1]: {self.p_hat}")
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        expected = math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.n)
        if abs(self.stderr - expected) > 1e-15 * max(1.0, expected):
            raise DomainError(
                f"stderr {self.stderr!r} inconsistent with p_hat={self.p_hat}, "
                f"n={self.n}"
            )


@dataclass(frozen=True)
class McHistogram:
    """Normalized histogram of effective-channel samples."""

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    n_samples: int
    n_below: int
    n_above: int


def _normal_triples(seed: int, start: int, count: int) -> np.ndarray:
    """Standard normal triples for samples [start, start + count).

    One Philox counter block is four 64-bit words, which Generator.random
    turns into four doubles; sample i therefore starts exactly at block i
    and advance(start) lands on it regardless of how callers batch the
    range.
    """
    gen = Generator(Philox(key=seed).advance(start))
    u = gen.random((count, 4))
    return ndtri(u[:, :3])


def sample_effective_channel(state: TagState, eff: EffectiveVariances,
                             seed: int, start: int = 0,
                             count: int = 1) -> np.ndarray:
    """Effective-channel draws h for samples [start, start + count).

    Draws h_sr, h_st, h_tr as independent zero-mean Gaussians with the
    effective variances and combines them according to the tag state.
    """
    z = _normal_triples(seed, start, count)
    h_sr = math.sqrt(eff.var_sr) * z[:, 0]
    if state.b == 0:
        return h_sr
    h_st = math.sqrt(eff.var_st) * z[:, 1]
    h_tr = math.sqrt(eff.var_tr) * z[:, 2]
    return h_sr + eff.eta * h_st * h_tr


def _batches(cfg: McConfig):
    start = 0
    while start < cfg.n_samples:
        yield start, min(cfg.batch_size, cfg.n_samples - start)
        start += cfg.batch_size


def mc_outage(query: OutageQuery, state: TagState, eff: EffectiveVariances,
              cfg: McConfig) -> McEstimate:
    """Fraction of samples with rho_bar * h^2 <= rho_t.

    Hit counts are integers summed over batches, so the estimate is
    bit-identical for every batch size and any parallel split of the
    sample range.
    """
    rho_t = query.rho_t
    rho_bar = query.rho_bar
    hits = 0
    for start, count in _batches(cfg):
        h = sample_effective_channel(state, eff, cfg.seed, start, count)
        hits += int(np.count_nonzero(rho_bar * h * h <= rho_t))
    p_hat = hits / cfg.n_samples
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / cfg.n_samples)
    return McEstimate(p_hat=p_hat, stderr=stderr, n=cfg.n_samples)


def mc_channel_histogram(state: TagState, eff: EffectiveVariances,
                         cfg: McConfig, edges: np.ndarray) -> McHistogram:
    """Histogram of h over the given bin edges, normalized to a density."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("edges must be a strictly increasing 1-d grid")
    counts = np.zeros(edges.size - 1, dtype=np.int64)
    below = 0
    above = 0
    for start, count in _batches(cfg):
        h = sample_effective_channel(state, eff, cfg.seed, start, count)
        c, _ = np.histogram(h, bins=edges)
        counts += c
        below += int(np.count_nonzero(h < edges[0]))
        above += int(np.count_nonzero(h >= edges[-1]))
    widths = np.diff(edges)
    density = counts / (cfg.n_samples * widths)
    return McHistogram(edges=edges, counts=counts, density=density,
                       n_samples=cfg.n_samples, n_below=below, n_above=above)


def _quad_checked(f, lo, hi, acc: Accuracy, what: str) -> float:
    limit = max(10, acc.max_quad_nodes // 21)
    out = integrate.quad(f, lo, hi, epsabs=acc.abs_tol, epsrel=1e-12,
                         limit=limit, full_output=1)
    val, abserr = out[0], out[1]
    if len(out) > 3 and abserr > 10.0 * max(acc.abs_tol, 1e-11 * abs(val)):
        raise ConvergenceError(
            f"{what}: quadrature error {abserr:.2e} exceeds budget ({out[3]})"
        )
    return val


def quad_outage(query: OutageQuery, state: TagState, eff: EffectiveVariances,
                acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Outage probability by adaptive quadrature of the SNR density.

    The substitution x = u^2 turns int_0^{rho_t} f_rho(x) dx into
    (2 / sqrt(rho_bar)) int_0^{sqrt(rho_t)} f_h(u / sqrt(rho_bar)) du with a
    smooth integrand, which is what gets integrated.
    """
    rho_bar = query.rho_bar
    sqrt_rho_bar = math.sqrt(rho_bar)

    def integrand(u: float) -> float:
        return channel_pdf(u / sqrt_rho_bar, state, eff, acc)

    upper = math.sqrt(query.rho_t)
    return (2.0 / sqrt_rho_bar) * _quad_checked(
        integrand, 0.0, upper, acc, "quad_outage"
    )


def quad_convolution_pdf(x: float, eff: EffectiveVariances,
                         acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Reflecting-state channel density as an explicit convolution.

    Evaluates int f_gauss(x - z) f_xi(z) dz, splitting the axis at z = 0
    (the K0 log singularity, integrable) and at z = x (the Gaussian peak).
    Serves as ground truth for the series form of the density.
    """
    var = eff.var_sr
    norm = 1.0 / math.sqrt(2.0 * math.pi * var)

    def integrand(z: float) -> float:
        if z == 0.0:
            return 0.0
        d = x - z
        return norm * math.exp(-d * d / (2.0 * var)) * product_pdf(z, eff, acc)

    cuts = sorted({0.0, x})
    total = _quad_checked(integrand, -math.inf, cuts[0], acc, "quad_convolution_pdf")
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += _quad_checked(integrand, lo, hi, acc, "quad_convolution_pdf")
    total += _quad_checked(integrand, cuts[-1], math.inf, acc, "quad_convolution_pdf")
    return total
