"""Shared builders for randomized network instances."""
import numpy as np
import pytest

from hetcache import (NetworkConfig, TierParams, db_to_linear, dbm_to_watts,
                      density_per_m2, make_zipf_catalog)


def paper_defaults(cache_sizes=(25.0, 10.0), tau_db=-10.0, beta=4.0):
    """The two-tier baseline used throughout the experiment section:
    densities {1, 5}/(pi 500^2), powers {53, 33} dBm."""
    return NetworkConfig(
        tiers=(TierParams(density_per_m2(1, 500), dbm_to_watts(53), cache_sizes[0]),
               TierParams(density_per_m2(5, 500), dbm_to_watts(33), cache_sizes[1])),
        path_loss_exponent=beta,
        sinr_threshold=db_to_linear(tau_db))


def random_network(rng, n_tiers=None, m=None, q_frac=(0.1, 0.7),
                   density_range=(1.0, 8.0), power_dbm=(33.0, 53.0),
                   tau_db=(-12.0, -4.0), beta=(3.0, 5.0)):
    """A feasible random instance (all budgets strictly inside (0, M))."""
    n = int(rng.integers(1, 4)) if n_tiers is None else n_tiers
    m = int(rng.integers(20, 51)) if m is None else m
    tiers = tuple(
        TierParams(density=density_per_m2(rng.uniform(*density_range), 500),
                   power=dbm_to_watts(rng.uniform(*power_dbm)),
                   cache_size=float(rng.uniform(*q_frac) * m))
        for _ in range(n))
    config = NetworkConfig(tiers=tiers,
                           path_loss_exponent=float(rng.uniform(*beta)),
                           sinr_threshold=db_to_linear(float(rng.uniform(*tau_db))))
    catalog = make_zipf_catalog(m, float(rng.uniform(0.2, 1.6)))
    return config, catalog


def random_feasible_policy(rng, config, catalog):
    """Random matrix inside the box/budget polytope (budgets not binding)."""
    probs = rng.random((config.n_tiers, catalog.size))
    for i, tier in enumerate(config.tiers):
        total = probs[i].sum()
        if total > tier.cache_size:
            probs[i] *= tier.cache_size / total * rng.uniform(0.5, 0.999)
    return probs


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
