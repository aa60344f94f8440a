"""Domain types and unit conversions for N-tier cache-enabled cellular networks.

All quantities are stored in base SI units: densities in BS/m^2, powers in
watts, SINR thresholds on linear scale.  dB/dBm inputs are converted once at
config ingestion (see :func:`dbm_to_watts`, :func:`db_to_linear`).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

# Normalized popularity must sum to 1 within this tolerance.
POPULARITY_SUM_TOL = 1e-12
# Row-sum budget slack accepted by validate_policy.
BUDGET_SLACK = 1e-9
# Box-constraint slack (pure float noise allowance).
BOX_SLACK = 1e-12


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level in dBm to watts: 10^((p - 30) / 10)."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert a power in watts (> 0) to dBm."""
    if p_watts <= 0:
        raise ValueError(f"power must be positive to express in dBm, got {p_watts}")
    return 10.0 * math.log10(p_watts) + 30.0


def db_to_linear(x_db: float) -> float:
    """Convert a dB ratio (e.g. an SINR threshold) to linear scale."""
    return 10.0 ** (x_db / 10.0)


def density_per_m2(k: float, radius_m: float) -> float:
    """BS density given as k BSs per disc of the given radius: k / (pi r^2)."""
    if radius_m <= 0:
        raise ValueError(f"radius must be positive, got {radius_m}")
    return k / (math.pi * radius_m**2)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TierParams:
    """Per-tier deployment parameters."""

    density: float     # BS density [BS/m^2]
    power: float       # transmit power [W]
    cache_size: float  # cache budget [content slots]; fractional values allowed

    def __post_init__(self):
        if not (self.density > 0 and math.isfinite(self.density)):
            raise ValueError(f"tier density must be positive and finite, got {self.density}")
        if not (self.power > 0 and math.isfinite(self.power)):
            raise ValueError(f"tier power must be positive and finite, got {self.power}")
        if not (self.cache_size >= 0 and math.isfinite(self.cache_size)):
            raise ValueError(f"tier cache_size must be >= 0 and finite, got {self.cache_size}")


@dataclass(frozen=True)
class NetworkConfig:
    """Network-wide parameters: the tier list plus propagation constants.

    path_loss_exponent must exceed 2 (the interference integrals only
    converge there) and sinr_threshold is stored on linear scale.
    noise_power = 0 selects the interference-limited model.
    """

    tiers: tuple[TierParams, ...]
    path_loss_exponent: float      # beta, dimensionless
    sinr_threshold: float          # tau, linear scale
    noise_power: float = 0.0       # sigma^2 [W]

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if len(self.tiers) < 1:
            raise ValueError("at least one tier is required")
        if not all(isinstance(t, TierParams) for t in self.tiers):
            raise TypeError("tiers must be TierParams instances")
        if not self.path_loss_exponent > 2:
            raise ValueError(
                f"path_loss_exponent must be > 2, got {self.path_loss_exponent}")
        if not self.sinr_threshold > 0:
            raise ValueError(f"sinr_threshold must be positive, got {self.sinr_threshold}")
        if self.noise_power < 0:
            raise ValueError(f"noise_power must be >= 0, got {self.noise_power}")

    @property
    def n_tiers(self) -> int:
        return len(self.tiers)

    def densities(self) -> np.ndarray:
        return np.array([t.density for t in self.tiers])

    def powers(self) -> np.ndarray:
        return np.array([t.power for t in self.tiers])

    def cache_sizes(self) -> np.ndarray:
        return np.array([t.cache_size for t in self.tiers])

    def power_weights(self) -> np.ndarray:
        """The per-tier weights lambda_i * S_i^(2/beta) that drive association."""
        return self.densities() * self.powers() ** (2.0 / self.path_loss_exponent)

    def check_cache_sizes(self, catalog: "ContentCatalog") -> None:
        """Raise if any tier cache budget exceeds the catalog size."""
        for i, t in enumerate(self.tiers):
            if t.cache_size > catalog.size:
                raise ValueError(
                    f"tier {i} cache_size {t.cache_size} exceeds catalog size {catalog.size}")

    def with_tier(self, index: int, **changes) -> "NetworkConfig":
        """Copy of this config with one tier's parameters replaced."""
        tiers = list(self.tiers)
        tiers[index] = dataclasses.replace(tiers[index], **changes)
        return dataclasses.replace(self, tiers=tuple(tiers))


@dataclass(frozen=True)
class ContentCatalog:
    """Content catalog: size M and a nonincreasing popularity vector summing to 1."""

    size: int
    popularity: np.ndarray

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"catalog size must be >= 1, got {self.size}")
        pop = _readonly(self.popularity)
        object.__setattr__(self, "popularity", pop)
        if pop.shape != (self.size,):
            raise ValueError(f"popularity must have shape ({self.size},), got {pop.shape}")
        if np.any(pop < 0) or not np.all(np.isfinite(pop)):
            raise ValueError("popularity entries must be finite and >= 0")
        total = float(np.sum(pop))
        if abs(total - 1.0) > POPULARITY_SUM_TOL:
            raise ValueError(f"popularity must sum to 1 within {POPULARITY_SUM_TOL}, got {total}")
        if np.any(np.diff(pop) > 0):
            raise ValueError("popularity must be sorted nonincreasing")


def make_zipf_catalog(size: int, gamma: float) -> ContentCatalog:
    """Zipf catalog with t_j proportional to j^(-gamma), j = 1..size.

    gamma = 0 gives uniform demand; larger gamma skews requests toward the
    head of the catalog.
    """
    if size < 1:
        raise ValueError(f"catalog size must be >= 1, got {size}")
    if gamma < 0:
        raise ValueError(f"zipf exponent must be >= 0, got {gamma}")
    ranks = np.arange(1, size + 1, dtype=float)
    weights = ranks ** (-gamma)
    return ContentCatalog(size=size, popularity=weights / np.sum(weights))


@dataclass(frozen=True)
class CachingPolicy:
    """N x M matrix of per-tier caching probabilities p_ij."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _readonly(self.probs)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 2:
            raise ValueError(f"policy matrix must be 2-D, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise ValueError("policy matrix entries must be finite")

    @property
    def n_tiers(self) -> int:
        return self.probs.shape[0]

    @property
    def n_contents(self) -> int:
        return self.probs.shape[1]


@dataclass(frozen=True)
class PolicyViolation:
    """One violated caching-policy constraint.

    kind is "box" (0 <= p_ij <= 1, content set) or "budget" (row sum vs the
    tier budget, content is None).  amount is the violation magnitude.
    """

    kind: str
    tier: int
    content: int | None
    amount: float


def validate_policy(policy: CachingPolicy, config: NetworkConfig,
                    catalog: ContentCatalog) -> list[PolicyViolation]:
    """Check a policy against the box and row-sum budget constraints.

    Returns every violation with indices and magnitudes; an empty list means
    the policy is feasible.  A dimension mismatch raises ValueError.
    """
    n, m = policy.probs.shape
    if n != config.n_tiers or m != catalog.size:
        raise ValueError(
            f"policy shape {policy.probs.shape} does not match "
            f"{config.n_tiers} tiers x {catalog.size} contents")
    violations: list[PolicyViolation] = []
    probs = policy.probs
    for i in range(n):
        for j in np.flatnonzero(probs[i] < -BOX_SLACK):
            violations.append(PolicyViolation("box", i, int(j), float(-probs[i, j])))
        for j in np.flatnonzero(probs[i] > 1.0 + BOX_SLACK):
            violations.append(PolicyViolation("box", i, int(j), float(probs[i, j] - 1.0)))
        excess = float(np.sum(probs[i])) - config.tiers[i].cache_size
        if excess > BUDGET_SLACK:
            violations.append(PolicyViolation("budget", i, None, excess))
    return violations


@dataclass(frozen=True)
class SdpReport:
    """Successful-delivery-probability report.

    per_pair[i, j] is the joint probability that a request for content j is
    served by tier i and delivered (analytic modes), or the empirical
    frequency of that event among requests for j (monte-carlo mode).  The
    total composes as sum_j t_j * sum_i per_pair[i, j].
    """

    total: float
    per_pair: np.ndarray
    mode: str                      # analytic-general | analytic-interference-limited | monte-carlo
    stderr: float | None = None

    _MODES = ("analytic-general", "analytic-interference-limited", "monte-carlo")

    def __post_init__(self):
        if self.mode not in self._MODES:
            raise ValueError(f"unknown report mode {self.mode!r}")
        if not (-1e-9 <= self.total <= 1.0 + 1e-9):
            raise ValueError(f"total SDP must lie in [0, 1], got {self.total}")
        object.__setattr__(self, "per_pair", _readonly(self.per_pair))
        if self.mode != "monte-carlo" and self.stderr is not None:
            raise ValueError("stderr is only meaningful for monte-carlo reports")
