import math

import numpy as np
import pytest
from scipy.special import ndtri

from dperm.privacy import (
    GAUSSIAN,
    LAPLACE,
    NoiseSpec,
    PrivacyBudget,
    calibrate,
    compose,
    inverse_norm_cdf,
    pure_to_gdp,
    sample_noise,
    stream,
)

# Frozen from the scipy.special.ndtri oracle: -2 * ndtri(1 / (1 + e)).
PURE1_GDP = 1.2320353853449013


class TestBudgets:
    def test_validation(self):
        with pytest.raises(ValueError):
            PrivacyBudget("renyi", 1.0)
        with pytest.raises(ValueError):
            PrivacyBudget.pure(0.0)
        with pytest.raises(ValueError):
            PrivacyBudget.gdp(float("inf"))

    def test_compose_pure_anchor(self):
        assert compose(PrivacyBudget.pure(1.0), PrivacyBudget.pure(2.0)) == PrivacyBudget.pure(3.0)

    def test_compose_gdp_anchor(self):
        out = compose(PrivacyBudget.gdp(1.0), PrivacyBudget.gdp(2.0))
        assert out.kind == "gdp"
        assert out.value == pytest.approx(math.sqrt(5.0), rel=1e-15)

    def test_compose_kind_mismatch(self):
        with pytest.raises(ValueError):
            compose(PrivacyBudget.pure(1.0), PrivacyBudget.gdp(1.0))

    def test_compose_commutes_and_associates(self, rng):
        for _ in range(20):
            a, b, c = 10.0 ** rng.uniform(-3, 2, size=3)
            for kind in ("pure", "gdp"):
                pa, pb, pc = (PrivacyBudget(kind, v) for v in (a, b, c))
                assert compose(pa, pb).value == pytest.approx(compose(pb, pa).value, rel=1e-15)
                left = compose(compose(pa, pb), pc).value
                right = compose(pa, compose(pb, pc)).value
                assert left == pytest.approx(right, rel=1e-12)

    def test_compose_near_identity(self):
        out = compose(PrivacyBudget.gdp(2.0), PrivacyBudget.gdp(1e-300))
        assert out.value == 2.0


class TestInverseNormCdf:
    def test_against_scipy_oracle(self):
        ps = [1e-12, 1e-9, 1e-4, 0.02425, 0.1, 0.25, 0.5, 0.731058578630005,
              0.9, 0.99, 1 - 1e-6, 1 - 1e-10]
        for p in ps:
            assert inverse_norm_cdf(p) == pytest.approx(float(ndtri(p)), abs=1e-12)

    def test_median_and_symmetry(self):
        assert inverse_norm_cdf(0.5) == 0.0
        for p in (0.01, 0.2, 0.45):
            assert inverse_norm_cdf(p) == pytest.approx(-inverse_norm_cdf(1 - p), abs=1e-13)

    def test_domain_errors(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                inverse_norm_cdf(p)


class TestPureToGdp:
    def test_anchor_eps_one(self):
        got = pure_to_gdp(1.0)
        assert got == pytest.approx(PURE1_GDP, abs=1e-12)
        # Same value through the independent oracle route.
        assert got == pytest.approx(-2.0 * float(ndtri(1.0 / (1.0 + math.e))), abs=1e-12)

    def test_small_eps_limit(self):
        assert 0 < pure_to_gdp(1e-10) < 1e-9

    def test_monotone(self):
        eps = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0]
        vals = [pure_to_gdp(e) for e in eps]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_large_eps_stable(self):
        # Naive 2*PhiInv(e^eps/(1+e^eps)) loses precision near p=1; the
        # implementation must match the small-tail oracle form instead.
        for eps in (20.0, 40.0, 80.0):
            q = math.exp(-eps) / (1.0 + math.exp(-eps))
            assert pure_to_gdp(eps) == pytest.approx(-2.0 * float(ndtri(q)), rel=1e-13)

    def test_rejects_nonpositive(self):
        for eps in (0.0, -1.0, float("nan")):
            with pytest.raises(ValueError):
                pure_to_gdp(eps)


class TestCalibrate:
    def test_pure_l2_lifts_by_sqrt_d(self):
        spec = calibrate(0.03, PrivacyBudget.pure(1.0), "l2", 4)
        assert spec.family == LAPLACE
        assert spec.scale == pytest.approx(0.06, abs=1e-15)

    def test_pure_l1_direct(self):
        spec = calibrate(0.2, PrivacyBudget.pure(1.0), "l1", 7)
        assert spec.family == LAPLACE
        assert spec.scale == pytest.approx(0.2, abs=1e-15)

    def test_gdp_gaussian(self):
        spec = calibrate(0.2, PrivacyBudget.gdp(0.5), "l2", 3)
        assert spec.family == GAUSSIAN
        assert spec.scale == pytest.approx(0.4, abs=1e-15)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            calibrate(0.0, PrivacyBudget.pure(1.0), "l2", 2)
        with pytest.raises(ValueError):
            calibrate(1.0, PrivacyBudget.pure(1.0), "linf", 2)
        with pytest.raises(ValueError):
            calibrate(1.0, PrivacyBudget.pure(1.0), "l2", 0)


class TestSampleNoise:
    def test_laplace_mean_abs(self):
        rng = stream(7, "laplace-mc")
        z = sample_noise(NoiseSpec(LAPLACE, 1.5, 1_000_000), rng)
        assert float(np.mean(np.abs(z))) == pytest.approx(1.5, rel=0.01)

    def test_gaussian_variance(self):
        rng = stream(7, "gaussian-mc")
        z = sample_noise(NoiseSpec(GAUSSIAN, 0.7, 1_000_000), rng)
        assert float(np.var(z)) == pytest.approx(0.49, rel=0.01)

    def test_small_scale_limit(self):
        rng = stream(7, "tiny-scale")
        z = sample_noise(NoiseSpec(LAPLACE, 1e-300, 100), rng)
        assert np.all(np.abs(z) < 1e-290)
        assert np.all(np.isfinite(z))

    def test_laplace_density_ratio(self):
        # Analytic pure-DP check for the Laplace mechanism at scale s/eps:
        # densities for neighboring means at distance <= s stay within e^eps.
        eps, s = 1.3, 0.4
        b = s / eps
        m0, m1 = 0.0, s
        for o in np.linspace(-3, 3, 601):
            ratio = math.exp((abs(o - m1) - abs(o - m0)) / b)
            assert ratio <= math.exp(eps) * (1 + 1e-9)

    def test_gaussian_llr_statistic(self):
        # Shift s with sigma = s/mu: the log likelihood ratio under the null
        # is N(mu^2/2, mu^2).
        mu, s = 1.3, 1.0
        sigma = s / mu
        rng = stream(7, "llr-mc")
        x = rng.normal(0.0, sigma, size=1_000_000)
        llr = ((x - s) ** 2 - x**2) / (2 * sigma**2)
        assert float(np.mean(llr)) == pytest.approx(mu**2 / 2, rel=0.02)
        assert float(np.var(llr)) == pytest.approx(mu**2, rel=0.02)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec("cauchy", 1.0, 2)
        with pytest.raises(ValueError):
            NoiseSpec(LAPLACE, 0.0, 2)
        with pytest.raises(ValueError):
            NoiseSpec(GAUSSIAN, 1.0, 0)


class TestStream:
    def test_reproducible(self):
        a = stream(42, "m", "pure", 1.0, 3).standard_normal(5)
        b = stream(42, "m", "pure", 1.0, 3).standard_normal(5)
        assert np.array_equal(a, b)

    def test_distinct_cells(self):
        draws = {
            label: tuple(stream(42, "method", label, rep).standard_normal(3))
            for label in ("a", "b") for rep in range(3)
        }
        assert len(set(draws.values())) == len(draws)

    def test_float_labels_by_value(self):
        a = stream(1, 0.1 + 0.2).standard_normal(3)
        b = stream(1, 0.30000000000000004).standard_normal(3)
        assert np.array_equal(a, b)
