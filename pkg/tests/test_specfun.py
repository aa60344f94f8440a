import math

import numpy as np
import pytest
from scipy import integrate

from hetcache import (NumericalError, beta_fn, channel_constants,
                      gauss_2f1_neg_arg)


class TestGauss2F1:
    def test_unity_at_zero(self):
        for a, b, c in [(1.0, 0.5, 1.5), (2.0, 0.3, 0.7), (-1.0, 4.0, 2.5)]:
            assert gauss_2f1_neg_arg(a, b, c, 0.0) == 1.0

    def test_arctan_identity_frozen(self):
        # 2F1(1, 1/2; 3/2; -x^2) = arctan(x)/x; at x = sqrt(0.1) an
        # extended-precision series oracle gives:
        assert gauss_2f1_neg_arg(1.0, 0.5, 1.5, -0.1) == pytest.approx(
            0.9685340823403892, rel=1e-13)

    def test_large_negative_argument_frozen(self):
        # 2F1(1, 0.6; 1.6; -10) from the extended-precision oracle (the raw
        # series diverges here; the value checks the Pfaff path):
        assert gauss_2f1_neg_arg(1.0, 0.6, 1.6, -10.0) == pytest.approx(
            0.3518978427720811, rel=1e-12)

    def test_against_mpmath_randomized(self, rng):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 30
        for _ in range(40):
            beta = float(rng.uniform(2.2, 6.0))
            tau = float(rng.uniform(1e-3, 100.0))
            a, b, c = 1.0, 1.0 - 2.0 / beta, 2.0 - 2.0 / beta
            expected = float(mpmath.hyp2f1(a, b, c, -tau))
            assert gauss_2f1_neg_arg(a, b, c, -tau) == pytest.approx(expected, rel=1e-12)

    def test_arctan_identity_randomized(self, rng):
        for _ in range(50):
            x = float(rng.uniform(0.01, 3.0))
            assert gauss_2f1_neg_arg(1.0, 0.5, 1.5, -x * x) == pytest.approx(
                math.atan(x) / x, rel=1e-12)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            gauss_2f1_neg_arg(1.0, 0.5, 1.5, 0.5)
        with pytest.raises(ValueError):
            gauss_2f1_neg_arg(1.0, 0.5, -2.0, -0.5)

    def test_nonconvergence_is_diagnosed(self):
        # z = -1e12 maps to a transformed argument within 1e-12 of 1; the
        # capped series cannot converge and must say so.
        with pytest.raises(NumericalError):
            gauss_2f1_neg_arg(1.0, 0.5, 1.5, -1e12)


class TestBetaFunction:
    def test_simple_values(self):
        assert beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert beta_fn(0.5, 0.5) == pytest.approx(math.pi, rel=1e-12)

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_b_half_half_against_quadrature(self):
        # endpoint singularities cap the quadrature near 1e-11 here
        oracle, err = integrate.quad(
            lambda u: u ** (-0.5) * (1.0 - u) ** (-0.5), 0.0, 1.0,
            epsabs=1e-13, epsrel=1e-13, limit=200)
        assert abs(beta_fn(0.5, 0.5) - oracle) < 1e-10

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_against_quadrature_oracle(self, rng):
        for _ in range(20):
            x = float(rng.uniform(0.2, 3.0))
            y = float(rng.uniform(0.2, 3.0))
            oracle, err = integrate.quad(
                lambda u: u ** (x - 1.0) * (1.0 - u) ** (y - 1.0), 0.0, 1.0,
                epsabs=1e-13, epsrel=1e-13, limit=200)
            # agreement is bounded by what the oracle itself achieved
            assert abs(beta_fn(x, y) - oracle) <= max(1e-12, 10.0 * err)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            beta_fn(0.0, 1.0)
        with pytest.raises(ValueError):
            beta_fn(1.0, -2.0)


class TestChannelConstants:
    def test_frozen_values_beta4(self):
        # Closed forms at beta = 4: H = sqrt(tau) arctan(sqrt(tau)) and
        # D = (pi/2) sqrt(tau); extended-precision values at tau = 0.1:
        cc = channel_constants(0.1, 4.0)
        assert cc.H == pytest.approx(0.09685340823403892, rel=1e-13)
        assert cc.D == pytest.approx(0.4967294132898051, rel=1e-13)
        assert cc.T == pytest.approx(0.6001239949442339, rel=1e-13)
        assert cc.T == cc.H - cc.D + 1.0

    def test_beta4_closed_forms_randomized(self, rng):
        for _ in range(100):
            tau = float(rng.uniform(0.001, 100.0))
            cc = channel_constants(tau, 4.0)
            assert abs(cc.H - math.sqrt(tau) * math.atan(math.sqrt(tau))) < 1e-10
            assert abs(cc.D - math.pi / 2.0 * math.sqrt(tau)) < 1e-10

    def test_h_matches_integral_definition(self, rng):
        # H(tau, beta) = (2/beta) tau^(2/beta) int_{1/tau}^inf mu^(2/beta-1)/(1+mu) dmu
        for _ in range(15):
            tau = float(rng.uniform(0.01, 30.0))
            beta = float(rng.uniform(2.3, 6.0))
            oracle, _err = integrate.quad(
                lambda mu: mu ** (2.0 / beta - 1.0) / (1.0 + mu), 1.0 / tau, np.inf)
            oracle *= 2.0 / beta * tau ** (2.0 / beta)
            assert channel_constants(tau, beta).H == pytest.approx(oracle, abs=1e-8, rel=1e-8)

    def test_monotone_in_tau(self, rng):
        for _ in range(30):
            beta = float(rng.uniform(2.2, 6.0))
            tau = np.sort(rng.uniform(0.001, 50.0, size=2))
            lo = channel_constants(float(tau[0]), beta)
            hi = channel_constants(float(tau[1]) + 1e-6, beta)
            assert hi.H > lo.H
            assert hi.D > lo.D

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            channel_constants(0.0, 4.0)
        with pytest.raises(ValueError):
            channel_constants(0.1, 2.0)
