import math

import numpy as np
import pytest
from scipy import integrate

from hetcache import (CachingPolicy, NetworkConfig, SimSettings, TierParams,
                      baseline_uniform, db_to_linear, density_per_m2,
                      estimate_sdp, make_zipf_catalog, realization_stream,
                      sample_realization, serving_distance_pdf,
                      total_sdp_interference_limited)
from hetcache.simulate import _outcome

from conftest import paper_defaults


def small_config(cache_fracs=(0.5, 0.4), m=4):
    config = paper_defaults(cache_sizes=(cache_fracs[0] * m, cache_fracs[1] * m))
    return config, make_zipf_catalog(m, 0.8)


class TestSampling:
    def test_nothing_cached_never_succeeds(self):
        config, cat = small_config()
        policy = CachingPolicy(np.zeros((2, cat.size)))
        settings = SimSettings(seed=3, realizations=50)
        for k in range(20):
            real = sample_realization(config, cat, policy, settings,
                                      realization_stream(settings.seed, k))
            assert real.serving is None
            assert not real.success
            assert math.isnan(real.sinr)
        est = estimate_sdp(config, cat, policy, settings)
        assert est.sdp_hat == 0.0

    def test_poisson_counts(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        settings = SimSettings(seed=11, realizations=1)
        n = 600
        counts = np.zeros((n, 2))
        for k in range(n):
            real = sample_realization(config, cat, policy, settings,
                                      realization_stream(settings.seed, k))
            counts[k] = [len(p) for p in real.positions]
        area = settings.window_side ** 2
        for i, tier in enumerate(config.tiers):
            mean = tier.density * area
            tol = 3.0 * math.sqrt(mean / n)
            assert abs(counts[:, i].mean() - mean) < tol

    def test_cache_marginals(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        settings = SimSettings(seed=12, realizations=1)
        hits = np.zeros((2, cat.size))
        totals = np.zeros(2)
        for k in range(400):
            real = sample_realization(config, cat, policy, settings,
                                      realization_stream(settings.seed, k))
            for i in range(2):
                hits[i] += real.cache_sets[i].sum(axis=0)
                totals[i] += real.cache_sets[i].shape[0]
        for i in range(2):
            for j in range(cat.size):
                p = policy.probs[i, j]
                tol = 3.0 * math.sqrt(p * (1 - p) / totals[i])
                assert abs(hits[i, j] / totals[i] - p) < tol

    def test_association_frequencies_match_lemma(self):
        # everything cached: W_{1|j} = 2/3 exactly for the paper's weights
        config, cat = small_config()
        policy = CachingPolicy(np.ones((2, cat.size)))
        settings = SimSettings(seed=13, realizations=1)
        n = 1500
        tier1 = 0
        for k in range(n):
            real = sample_realization(config, cat, policy, settings,
                                      realization_stream(settings.seed, k))
            assert real.serving is not None
            if real.serving[0] == 0:
                tier1 += 1
        w = 2.0 / 3.0
        assert abs(tier1 / n - w) < 3.0 * math.sqrt(w * (1 - w) / n)

    def test_serving_distance_mean_matches_pdf(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        settings = SimSettings(seed=14, realizations=1)
        distances = []
        i, j = 0, 0
        for k in range(4000):
            real = sample_realization(config, cat, policy, settings,
                                      realization_stream(settings.seed, k))
            if real.content == j and real.serving is not None and real.serving[0] == i:
                distances.append(real.serving_distance)
        analytic_mean, _err = integrate.quad(
            lambda r: r * serving_distance_pdf(config, policy, i, j, r), 0.0, np.inf)
        distances = np.asarray(distances)
        stderr = distances.std(ddof=1) / math.sqrt(len(distances))
        assert len(distances) > 200
        assert abs(distances.mean() - analytic_mean) < 3.0 * stderr

    def test_serving_identity_is_consistent(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        settings = SimSettings(seed=15, realizations=1)
        real = sample_realization(config, cat, policy, settings,
                                  realization_stream(settings.seed, 0))
        if real.serving is not None:
            tier, idx = real.serving
            xy = real.positions[tier][idx]
            assert math.hypot(xy[0], xy[1]) == pytest.approx(
                real.serving_distance, rel=1e-12)
            assert real.cache_sets[tier][idx, real.content]


class TestRayleighKernel:
    def test_single_bs_no_interferers_tail(self):
        # exactly one BS at distance r, sigma^2 > 0: success iff
        # S h r^-beta / sigma^2 > tau, h ~ Exp(1), so the rate is
        # exp(-tau sigma^2 r^beta / S).
        config = NetworkConfig(tiers=(TierParams(1e-9, 2.0, 1.0),),
                               path_loss_exponent=4.0, sinr_threshold=0.5)
        r, sigma2 = 300.0, 2.0 * 300.0 ** -4
        dist = np.array([r])
        tier_of = np.array([0])
        caches = np.array([True])
        rng = np.random.default_rng(99)
        n, wins = 20000, 0
        for _ in range(n):
            fading = rng.standard_exponential(1)
            _s, _sinr, ok = _outcome(config, dist, tier_of, caches, fading, sigma2)
            wins += bool(ok)
        expected = math.exp(-config.sinr_threshold * sigma2 * r ** 4 / 2.0)
        assert abs(wins / n - expected) < 3.0 * math.sqrt(expected * (1 - expected) / n)

    def test_interference_lowers_sinr(self):
        config = NetworkConfig(tiers=(TierParams(1e-9, 2.0, 1.0),),
                               path_loss_exponent=4.0, sinr_threshold=0.5)
        dist = np.array([100.0, 120.0])
        tier_of = np.array([0, 0])
        fading = np.array([1.0, 1.0])
        _s, sinr_alone, _ok = _outcome(config, dist[:1], tier_of[:1],
                                       np.array([True]), fading[:1], 1e-9)
        _s, sinr_both, _ok = _outcome(config, dist, tier_of,
                                      np.array([True, False]), fading, 1e-9)
        assert sinr_both < sinr_alone


class TestEstimates:
    def test_deterministic_given_seed(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        settings = SimSettings(seed=21, realizations=400)
        a = estimate_sdp(config, cat, policy, settings)
        b = estimate_sdp(config, cat, policy, settings)
        assert a.sdp_hat == b.sdp_hat
        assert a.stderr == b.stderr
        assert np.array_equal(a.success_counts, b.success_counts)
        assert np.array_equal(a.request_counts, b.request_counts)

    def test_seed_changes_draws(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        a = estimate_sdp(config, cat, policy, SimSettings(seed=21, realizations=400))
        b = estimate_sdp(config, cat, policy, SimSettings(seed=22, realizations=400))
        assert not np.array_equal(a.success_counts, b.success_counts)

    def test_counts_consistent(self):
        config, cat = small_config()
        policy = baseline_uniform(config, cat)
        est = estimate_sdp(config, cat, policy, SimSettings(seed=23, realizations=500))
        assert int(est.request_counts.sum()) == 500
        assert est.sdp_hat == pytest.approx(est.success_counts.sum() / 500.0)
        assert np.all(est.success_counts.sum(axis=0) <= est.request_counts)
        assert est.stderr == pytest.approx(
            math.sqrt(est.sdp_hat * (1 - est.sdp_hat) / 500.0))

    def test_matches_closed_form(self):
        config, cat = small_config(m=20)
        policy = baseline_uniform(config, cat)
        est = estimate_sdp(config, cat, policy, SimSettings(seed=24, realizations=3000))
        analytic = total_sdp_interference_limited(config, cat, policy).total
        assert abs(est.sdp_hat - analytic) < max(0.02, 3.5 * est.stderr)

    def test_density_scaling_invariance_single_tier(self):
        # doubling the density leaves the distribution of the SDP unchanged
        cat = make_zipf_catalog(10, 0.8)
        policy = CachingPolicy(np.full((1, 10), 0.4))
        lam = density_per_m2(4, 500)
        est = []
        for scale in (1.0, 2.0):
            config = NetworkConfig(tiers=(TierParams(lam * scale, 2.0, 4.0),),
                                   path_loss_exponent=4.0,
                                   sinr_threshold=db_to_linear(-10.0))
            est.append(estimate_sdp(config, cat, policy,
                                    SimSettings(seed=25, realizations=6000)))
        gap = abs(est[0].sdp_hat - est[1].sdp_hat)
        assert gap < 3.0 * math.hypot(est[0].stderr, est[1].stderr)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            SimSettings(seed=1, window_side=0.0)
        with pytest.raises(ValueError):
            SimSettings(seed=1, realizations=0)
        with pytest.raises(ValueError):
            SimSettings(seed=1, noise_power=-1.0)

    def test_dimension_mismatch(self):
        config, cat = small_config()
        with pytest.raises(ValueError):
            estimate_sdp(config, cat, CachingPolicy(np.zeros((2, 7))),
                         SimSettings(seed=1, realizations=10))
