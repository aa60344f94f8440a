"""Monte Carlo stochastic-geometry oracle for the successful delivery probability.

Each realization drops every tier as an independent Poisson point process in
a square window with the observer at the center, realizes the caches with
independent Bernoulli draws, associates the observer to the strongest base
station caching the requested content (max S_l r^-beta), and tests whether
the Rayleigh-faded SINR clears the threshold.  Every non-serving in-window
base station interferes, whether or not it caches the request.

Realizations draw from independent Philox streams indexed by the realization
counter, so estimates are bit-identical for a given seed no matter how the
work is scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CachingPolicy, ContentCatalog, NetworkConfig

# Floor on distances; the observer a.s. never coincides with a BS.
_MIN_DISTANCE = 1e-9


@dataclass(frozen=True)
class SimSettings:
    """Monte Carlo settings; the seed is always explicit."""

    seed: int
    window_side: float = 5000.0    # meters
    realizations: int = 10_000
    noise_power: float = 0.0       # sigma^2 [W]

    def __post_init__(self):
        if self.window_side <= 0:
            raise ValueError(f"window_side must be positive, got {self.window_side}")
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if self.noise_power < 0:
            raise ValueError(f"noise_power must be >= 0, got {self.noise_power}")


@dataclass(frozen=True)
class Realization:
    """One sampled deployment plus the outcome of a single content request."""

    positions: tuple[np.ndarray, ...]     # per tier, (n_i, 2) coordinates [m]
    cache_sets: tuple[np.ndarray, ...]    # per tier, (n_i, M) bool indicators
    content: int                          # requested content index
    serving: tuple[int, int] | None       # (tier, index within tier) or None
    serving_distance: float               # meters; nan when nothing serves
    sinr: float                           # linear; nan when nothing serves
    success: bool


@dataclass(frozen=True)
class SimEstimate:
    """Empirical SDP with its binomial standard error and event counts."""

    sdp_hat: float
    stderr: float
    success_counts: np.ndarray    # N x M successes by (serving tier, content)
    request_counts: np.ndarray    # M requests by content
    realizations: int


def realization_stream(seed: int, index: int) -> np.random.Generator:
    """Independent per-realization stream: Philox keyed by the master seed,
    counter offset by the realization index."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


def _draw_content(rng: np.random.Generator, popularity_cdf: np.ndarray) -> int:
    # clamp guards the ~ulp case where the accumulated cdf tops out below 1
    idx = int(np.searchsorted(popularity_cdf, rng.random(), side="right"))
    return min(idx, popularity_cdf.size - 1)


def _draw_geometry(rng: np.random.Generator, config: NetworkConfig,
                   window_side: float):
    """Poisson tier counts, positions, distances from the centered observer."""
    area = window_side * window_side
    half = window_side / 2.0
    counts = rng.poisson(config.densities() * area)
    total = int(counts.sum())
    xy = rng.uniform(-half, half, size=(total, 2))
    dist = np.maximum(np.hypot(xy[:, 0], xy[:, 1]), _MIN_DISTANCE)
    tier_of = np.repeat(np.arange(config.n_tiers), counts)
    return counts, xy, dist, tier_of


def _outcome(config: NetworkConfig, dist: np.ndarray, tier_of: np.ndarray,
             caches_j: np.ndarray, fading: np.ndarray, noise_power: float):
    """Association and SINR evaluation; returns (serving flat index or -1,
    sinr, success)."""
    if dist.size == 0 or not caches_j.any():
        return -1, math.nan, False
    powers = config.powers()[tier_of]
    beta = config.path_loss_exponent
    mean_rx = powers * dist ** (-beta)
    serving = int(np.argmax(np.where(caches_j, mean_rx, -np.inf)))
    rx = mean_rx * fading
    interference = float(np.sum(rx)) - float(rx[serving])
    sinr = float(rx[serving]) / (noise_power + interference) \
        if noise_power + interference > 0 else math.inf
    return serving, sinr, sinr > config.sinr_threshold


def sample_realization(config: NetworkConfig, catalog: ContentCatalog,
                       policy: CachingPolicy, settings: SimSettings,
                       rng: np.random.Generator) -> Realization:
    """Draw one full realization (deployment, caches, request, outcome)."""
    cdf = np.cumsum(catalog.popularity)
    j = _draw_content(rng, cdf)
    counts, xy, dist, tier_of = _draw_geometry(rng, config, settings.window_side)
    cache_sets = []
    for i in range(config.n_tiers):
        draws = rng.random((int(counts[i]), catalog.size))
        cache_sets.append(draws < policy.probs[i][None, :])
    caches_j = np.concatenate([cs[:, j] for cs in cache_sets]) \
        if counts.sum() else np.zeros(0, dtype=bool)
    fading = rng.standard_exponential(int(counts.sum()))
    serving_flat, sinr, success = _outcome(
        config, dist, tier_of, caches_j, fading, settings.noise_power)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    positions = tuple(xy[offsets[i]:offsets[i + 1]] for i in range(config.n_tiers))
    if serving_flat < 0:
        serving, serving_distance = None, math.nan
    else:
        tier = int(tier_of[serving_flat])
        serving = (tier, serving_flat - int(offsets[tier]))
        serving_distance = float(dist[serving_flat])
    return Realization(positions=positions, cache_sets=tuple(cache_sets),
                       content=j, serving=serving,
                       serving_distance=serving_distance, sinr=sinr,
                       success=bool(success))


def _simulate_request(config: NetworkConfig, popularity_cdf: np.ndarray,
                      policy: CachingPolicy, settings: SimSettings,
                      rng: np.random.Generator):
    """Fast path: caches realized only for the requested content (the other
    columns are independent and never observed)."""
    j = _draw_content(rng, popularity_cdf)
    counts, _xy, dist, tier_of = _draw_geometry(rng, config, settings.window_side)
    total = int(counts.sum())
    caches_j = rng.random(total) < policy.probs[tier_of, j] \
        if total else np.zeros(0, dtype=bool)
    fading = rng.standard_exponential(total)
    serving_flat, _sinr, success = _outcome(
        config, dist, tier_of, caches_j, fading, settings.noise_power)
    tier = int(tier_of[serving_flat]) if serving_flat >= 0 else -1
    return j, tier, bool(success)


def estimate_sdp(config: NetworkConfig, catalog: ContentCatalog,
                 policy: CachingPolicy, settings: SimSettings) -> SimEstimate:
    """Empirical SDP over independent realizations.

    Deterministic for a given (seed, settings, inputs): realization k always
    draws from stream k, and the reduction is plain integer counting.
    """
    if policy.probs.shape != (config.n_tiers, catalog.size):
        raise ValueError(
            f"policy shape {policy.probs.shape} does not match "
            f"{config.n_tiers} tiers x {catalog.size} contents")
    cdf = np.cumsum(catalog.popularity)
    success_counts = np.zeros((config.n_tiers, catalog.size), dtype=np.int64)
    request_counts = np.zeros(catalog.size, dtype=np.int64)
    for k in range(settings.realizations):
        rng = realization_stream(settings.seed, k)
        j, tier, success = _simulate_request(config, cdf, policy, settings, rng)
        request_counts[j] += 1
        if success:
            success_counts[tier, j] += 1
    n = settings.realizations
    sdp_hat = float(success_counts.sum()) / n
    stderr = math.sqrt(max(sdp_hat * (1.0 - sdp_hat), 0.0) / n)
    return SimEstimate(sdp_hat=sdp_hat, stderr=stderr,
                       success_counts=success_counts,
                       request_counts=request_counts, realizations=n)
