"""Closed-form and quadrature evaluation of the successful delivery probability.

A request for content j is served by the strongest base station caching j;
the tier association probability is

    W_{i|j} = lam_i p_ij S_i^(2/beta) / sum_l lam_l p_lj S_l^(2/beta).

Conditioned on tier i serving, the delivery probability C_{i|j} is a single
integral over the (squared) serving distance whose interference kernel is
built from the channel constants H, D; with zero noise it collapses to the
closed form

    W_{i|j} C_{i|j} = lam_i S_i^(2/beta) p_ij
                      / sum_l lam_l S_l^(2/beta) (T p_lj + D),

and the total SDP composes as sum_j t_j sum_i W_{i|j} C_{i|j}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import CachingPolicy, ContentCatalog, NetworkConfig, SdpReport
from .specfun import NumericalError, channel_constants

# Quadrature upper bound: exp(-pi Lam u) < 1e-16 beyond u = 16 ln10 / (pi Lam).
_TAIL_DECADES = 16.0


class UndefinedDistributionError(ValueError):
    """Raised when conditioning on a (tier, content) pair with zero association."""


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the one-dimensional delivery-probability integral."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class AssociationMatrix:
    """Tier association probabilities W_{i|j} plus the contents cached nowhere."""

    w: np.ndarray                     # N x M
    undefined_content: frozenset[int]


def _check_dims(config: NetworkConfig, catalog: ContentCatalog, policy: CachingPolicy):
    if policy.probs.shape != (config.n_tiers, catalog.size):
        raise ValueError(
            f"policy shape {policy.probs.shape} does not match "
            f"{config.n_tiers} tiers x {catalog.size} contents")


def association_matrix(config: NetworkConfig, catalog: ContentCatalog,
                       policy: CachingPolicy) -> AssociationMatrix:
    """W_{i|j} for every tier/content pair.

    Contents cached nowhere have no serving distribution; their column is
    zero and their index is reported in undefined_content (they contribute
    zero to the SDP).
    """
    _check_dims(config, catalog, policy)
    weights = config.power_weights()
    num = weights[:, None] * policy.probs
    den = num.sum(axis=0)
    undefined = den <= 0.0
    safe_den = np.where(undefined, 1.0, den)
    w = np.where(undefined[None, :], 0.0, num / safe_den[None, :])
    w.setflags(write=False)
    return AssociationMatrix(w=w, undefined_content=frozenset(np.flatnonzero(undefined).tolist()))


def serving_distance_pdf(config: NetworkConfig, policy: CachingPolicy,
                         i: int, j: int, r: float) -> float:
    """PDF of the serving distance R_{i|j} at radius r (meters).

    Requires W_{i|j} > 0; conditioning on a pair that can never serve raises
    UndefinedDistributionError.
    """
    probs = policy.probs
    lam = config.densities()
    s = config.powers()
    beta = config.path_loss_exponent
    if probs[i, j] <= 0 or lam[i] * probs[i, j] <= 0:
        raise UndefinedDistributionError(
            f"tier {i} never serves content {j} (p={probs[i, j]})")
    if r < 0:
        return 0.0
    ratios = (s / s[i]) ** (2.0 / beta)
    rate = math.pi * float(np.sum(probs[:, j] * lam * ratios))
    w_ij = lam[i] * probs[i, j] * s[i] ** (2.0 / beta) / float(
        np.sum(lam * probs[:, j] * s ** (2.0 / beta)))
    return 2.0 * math.pi * probs[i, j] * lam[i] / w_ij * math.exp(-rate * r * r) * r


def _interference_rate(config: NetworkConfig, probs_col: np.ndarray, i: int) -> float:
    """pi-free interference exponent Lam_{i,j} = sum_l lam_l (S_l/S_i)^(2/b) (T p_lj + D)."""
    cc = channel_constants(config.sinr_threshold, config.path_loss_exponent)
    lam = config.densities()
    s = config.powers()
    ratios = (s / s[i]) ** (2.0 / config.path_loss_exponent)
    return float(np.sum(lam * ratios * (cc.T * probs_col + cc.D)))


def _pair_contribution(config: NetworkConfig, probs_col: np.ndarray, i: int,
                       quad: QuadratureSettings, sigma2: float,
                       force_quadrature: bool = False) -> float:
    """Joint probability W_{i|j} * C_{i|j} for one (tier, content) pair.

    Evaluated after the substitution u = r^2, which turns the integral into

        pi p_ij lam_i * int_0^inf exp(-tau sigma^2 u^(beta/2) / S_i)
                                  * exp(-pi Lam u) du,

    so the sigma^2 = 0 case is the exact closed form (no quadrature).
    """
    p_ij = probs_col[i]
    if p_ij <= 0:
        return 0.0
    lam_i = config.tiers[i].density
    rate = _interference_rate(config, probs_col, i)
    if sigma2 == 0.0 and not force_quadrature:
        return math.pi * p_ij * lam_i / (math.pi * rate)
    s_i = config.tiers[i].power
    tau = config.sinr_threshold
    half_beta = config.path_loss_exponent / 2.0
    noise_coeff = tau * sigma2 / s_i
    upper = _TAIL_DECADES * math.log(10.0) / (math.pi * rate)

    def integrand(u):
        return math.exp(-noise_coeff * u**half_beta - math.pi * rate * u)

    result = integrate.quad(
        integrand, 0.0, upper, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
        limit=quad.max_subdivisions, full_output=1)
    if len(result) > 3:
        value, abserr = result[0], result[1]
        raise NumericalError(
            f"delivery-probability quadrature failed for tier {i}: {result[3]} "
            f"(estimate {value:.6e}, error estimate {abserr:.3e})")
    value, abserr = result[0], result[1]
    return math.pi * p_ij * lam_i * value


def conditional_sdp(config: NetworkConfig, catalog: ContentCatalog,
                    policy: CachingPolicy, i: int, j: int,
                    quad: QuadratureSettings = QuadratureSettings(),
                    force_quadrature: bool = False) -> float:
    """Delivery probability C_{i|j} conditioned on tier i serving content j.

    force_quadrature evaluates the integral even at sigma^2 = 0 (used to
    cross-check the closed form against the quadrature path).
    """
    _check_dims(config, catalog, policy)
    assoc = association_matrix(config, catalog, policy)
    w_ij = assoc.w[i, j]
    if w_ij <= 0:
        raise UndefinedDistributionError(
            f"W[{i}|{j}] = 0: tier {i} never serves content {j}")
    contribution = _pair_contribution(
        config, policy.probs[:, j], i, quad, config.noise_power, force_quadrature)
    return contribution / w_ij


def total_sdp_general(config: NetworkConfig, catalog: ContentCatalog,
                      policy: CachingPolicy,
                      quad: QuadratureSettings = QuadratureSettings()) -> SdpReport:
    """Total SDP with arbitrary noise power, by per-pair quadrature.

    Contents cached nowhere contribute zero.  per_pair holds the joint
    probabilities W_{i|j} * C_{i|j}.
    """
    _check_dims(config, catalog, policy)
    n, m = policy.probs.shape
    per_pair = np.zeros((n, m))
    for j in range(m):
        col = policy.probs[:, j]
        if not np.any(col > 0):
            continue
        for i in range(n):
            per_pair[i, j] = _pair_contribution(config, col, i, quad, config.noise_power)
    total = float(np.sum(catalog.popularity * per_pair.sum(axis=0)))
    return SdpReport(total=total, per_pair=per_pair, mode="analytic-general")


def total_sdp_interference_limited(config: NetworkConfig, catalog: ContentCatalog,
                                   policy: CachingPolicy) -> SdpReport:
    """Closed-form total SDP in the interference-limited regime (sigma^2 -> 0)."""
    _check_dims(config, catalog, policy)
    cc = channel_constants(config.sinr_threshold, config.path_loss_exponent)
    weights = config.power_weights()
    den = np.sum(weights[:, None] * (cc.T * policy.probs + cc.D), axis=0)
    per_pair = weights[:, None] * policy.probs / den[None, :]
    total = float(np.sum(catalog.popularity * per_pair.sum(axis=0)))
    return SdpReport(total=total, per_pair=per_pair, mode="analytic-interference-limited")
