"""Uniform-cache equivalence and the density/power-vs-cache-size tradeoff laws.

Under uniform caching (p_ij = Q_i / M) the SDP of the whole HetNet depends on
the deployment only through the equivalent cache size

    Q_e = sum_i lam_i S_i^(2/beta) Q_i / sum_i lam_i S_i^(2/beta),

so holding Q_e fixed holds the SDP fixed.  That single invariant yields the
tradeoff laws: within a tier the density is inversely proportional to the
cache size (lam_i = K1 / (Q_i - Q_e)) and the power follows a beta/2 power
law; across tiers the density is affine in the other tier's cache size and
the power is again a beta/2 power law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ContentCatalog, NetworkConfig
from .specfun import channel_constants


class DegenerateTradeoffError(ValueError):
    """The requested tradeoff is degenerate (the affected tier drops out)."""


@dataclass(frozen=True)
class UniformCacheSummary:
    """Equivalent cache size and the corresponding uniform-cache SDP."""

    q_e: float
    sdp: float


@dataclass(frozen=True)
class TradeoffCurve:
    """One constant-SDP locus over a grid of cache sizes.

    points holds the accepted (Q, value) pairs; grid entries where the law is
    singular (denominator zero) or yields a nonpositive density/power are
    listed in rejected with a reason ("singular" | "nonpositive").
    validity_interval is the open Q range on which the law stays positive and
    finite (None when empty); constants carries the applicable K values and
    the target Q_e.
    """

    kind: str   # same-tier-density | same-tier-power | cross-tier-density | cross-tier-power
    tier: int
    points: tuple[tuple[float, float], ...]
    constants: dict[str, float]
    validity_interval: tuple[float, float] | None
    rejected: tuple[tuple[float, str], ...]


def equivalent_cache_size(config: NetworkConfig) -> float:
    """The lam S^(2/beta)-weighted average of the tier cache sizes."""
    weights = config.power_weights()
    return float(np.sum(weights * config.cache_sizes()) / np.sum(weights))


def uniform_sdp(config: NetworkConfig, catalog: ContentCatalog) -> UniformCacheSummary:
    """SDP under uniform caching: Q_e / (T Q_e + D M)."""
    config.check_cache_sizes(catalog)
    q_e = equivalent_cache_size(config)
    cc = channel_constants(config.sinr_threshold, config.path_loss_exponent)
    if q_e == 0.0:
        return UniformCacheSummary(q_e=0.0, sdp=0.0)
    return UniformCacheSummary(q_e=q_e, sdp=q_e / (cc.T * q_e + cc.D * catalog.size))


def _same_tier_constant(config: NetworkConfig, tier: int, target_qe: float,
                        power_form: bool) -> float:
    lam = config.densities()
    s = config.powers()
    q = config.cache_sizes()
    beta = config.path_loss_exponent
    others = [j for j in range(config.n_tiers) if j != tier]
    if power_form:
        terms = [(lam[j] / lam[tier]) * s[j] ** (2.0 / beta) * (target_qe - q[j])
                 for j in others]
    else:
        terms = [lam[j] * (s[j] / s[tier]) ** (2.0 / beta) * (target_qe - q[j])
                 for j in others]
    return float(sum(terms))


def _positive_interval(k: float, target_qe: float) -> tuple[float, float] | None:
    if k > 0:
        return (target_qe, math.inf)
    if k < 0:
        return (0.0, target_qe)
    return None


def same_tier_density_curve(config: NetworkConfig, tier: int, target_qe: float,
                            q_grid) -> TradeoffCurve:
    """Density of one tier vs its own cache size at fixed Q_e (power held fixed).

    lam_i(Q_i) = K1 / (Q_i - Q_e) with
    K1 = sum_{j != i} lam_j (S_j / S_i)^(2/beta) (Q_e - Q_j); the law is
    singular at Q_i = Q_e and changes branch there.
    """
    if config.n_tiers < 2:
        raise ValueError("same-tier tradeoffs need at least two tiers")
    k1 = _same_tier_constant(config, tier, target_qe, power_form=False)
    points, rejected = [], []
    for q_i in np.asarray(q_grid, dtype=float):
        denom = q_i - target_qe
        if denom == 0.0 or k1 == 0.0:
            rejected.append((float(q_i), "singular"))
            continue
        lam_i = k1 / denom
        if lam_i <= 0 or not math.isfinite(lam_i):
            rejected.append((float(q_i), "nonpositive"))
            continue
        points.append((float(q_i), lam_i))
    return TradeoffCurve(kind="same-tier-density", tier=tier,
                         points=tuple(points),
                         constants={"K1": k1, "Q_e": target_qe},
                         validity_interval=_positive_interval(k1, target_qe),
                         rejected=tuple(rejected))


def same_tier_power_curve(config: NetworkConfig, tier: int, target_qe: float,
                          q_grid) -> TradeoffCurve:
    """Power of one tier vs its own cache size at fixed Q_e (density held fixed).

    S_i(Q_i) = (K2 / (Q_i - Q_e))^(beta/2) with
    K2 = sum_{j != i} (lam_j / lam_i) S_j^(2/beta) (Q_e - Q_j).
    """
    if config.n_tiers < 2:
        raise ValueError("same-tier tradeoffs need at least two tiers")
    beta = config.path_loss_exponent
    k2 = _same_tier_constant(config, tier, target_qe, power_form=True)
    points, rejected = [], []
    for q_i in np.asarray(q_grid, dtype=float):
        denom = q_i - target_qe
        if denom == 0.0 or k2 == 0.0:
            rejected.append((float(q_i), "singular"))
            continue
        base = k2 / denom
        if base <= 0 or not math.isfinite(base):
            rejected.append((float(q_i), "nonpositive"))
            continue
        points.append((float(q_i), base ** (beta / 2.0)))
    return TradeoffCurve(kind="same-tier-power", tier=tier,
                         points=tuple(points),
                         constants={"K2": k2, "Q_e": target_qe},
                         validity_interval=_positive_interval(k2, target_qe),
                         rejected=tuple(rejected))


def _cross_tier_constants(config: NetworkConfig, source: int, affected: int,
                          target_qe: float) -> dict[str, float]:
    lam = config.densities()
    s = config.powers()
    q = config.cache_sizes()
    beta = config.path_loss_exponent
    a = lam * s ** (2.0 / beta)
    others = [k for k in range(config.n_tiers) if k != affected]
    k3 = target_qe * float(sum(a[k] for k in others)) - float(
        sum(a[k] * q[k] for k in others if k != source))
    k4 = float(a[source])
    k5 = float(s[affected] ** (2.0 / beta) * (q[affected] - target_qe))
    k6 = float(lam[affected] * (q[affected] - target_qe))
    return {"K3": k3, "K4": k4, "K5": k5, "K6": k6, "Q_e": target_qe}


def _cross_interval(k3: float, k4: float, k_sign: float) -> tuple[float, float] | None:
    # Positivity of (K3 - K4 Q_i) / K requires the numerator sign to match K.
    root = k3 / k4
    if k_sign > 0:
        return (0.0, root) if root > 0 else None
    return (max(0.0, root), math.inf)


def cross_tier_curves(config: NetworkConfig, source: int, affected: int,
                      target_qe: float, q_grid) -> tuple[TradeoffCurve, TradeoffCurve]:
    """Density and power of one tier vs another tier's cache size at fixed Q_e.

    lam_j(Q_i) = (K3 - K4 Q_i) / K5 and S_j(Q_i) = ((K3 - K4 Q_i) / K6)^(beta/2)
    for source tier i and affected tier j.  Q_j = Q_e makes both laws
    degenerate (K5 = K6 = 0) and raises DegenerateTradeoffError.
    """
    if source == affected:
        raise ValueError("source and affected tiers must differ")
    if config.n_tiers < 2:
        raise ValueError("cross-tier tradeoffs need at least two tiers")
    beta = config.path_loss_exponent
    consts = _cross_tier_constants(config, source, affected, target_qe)
    k3, k4, k5, k6 = consts["K3"], consts["K4"], consts["K5"], consts["K6"]
    if k5 == 0.0 or k6 == 0.0:
        raise DegenerateTradeoffError(
            f"affected tier {affected} has Q_j = Q_e = {target_qe}; its density and "
            "power drop out of the Q_e balance")
    density_points, density_rejected = [], []
    power_points, power_rejected = [], []
    for q_i in np.asarray(q_grid, dtype=float):
        num = k3 - k4 * q_i
        lam_j = num / k5
        if lam_j > 0 and math.isfinite(lam_j):
            density_points.append((float(q_i), lam_j))
        else:
            density_rejected.append((float(q_i), "nonpositive"))
        base = num / k6
        if base > 0 and math.isfinite(base):
            power_points.append((float(q_i), base ** (beta / 2.0)))
        else:
            power_rejected.append((float(q_i), "nonpositive"))
    density = TradeoffCurve(kind="cross-tier-density", tier=affected,
                            points=tuple(density_points), constants=dict(consts),
                            validity_interval=_cross_interval(k3, k4, k5),
                            rejected=tuple(density_rejected))
    power = TradeoffCurve(kind="cross-tier-power", tier=affected,
                          points=tuple(power_points), constants=dict(consts),
                          validity_interval=_cross_interval(k3, k4, k6),
                          rejected=tuple(power_rejected))
    return density, power
