"""Parameter derivation and the three-stage localized sampling pipeline:
closed-form radius/temperature identities, perturbation calibration, budget
accounting, and Monte Carlo utility trends."""

import math

import numpy as np
import pytest

from dperm.erm import RegularityBounds, certify_bounds, exact_minimizer, total_objective
from dperm.geometry import DomainBall
from dperm.pipeline import (
    PipelineConfig,
    PipelineParams,
    asap_perturb,
    derive_params_gdp,
    derive_params_pure,
    run_localized_asap,
)
from dperm.privacy import PrivacyBudget
from dperm.sampler import MalaSchedule, run_mala

from conftest import gaussian_target_model, make_ridge


def toy_bounds(g=3.0, alpha=0.8, beta=2.4):
    return RegularityBounds(lipschitz=g, strong_convexity=alpha, smoothness=beta,
                            domain_radius=1.0, domain_center=np.zeros(2))


class TestDeriveParamsPure:
    def test_radius_meets_inequality_with_equality(self):
        bounds = toy_bounds()
        n, d, eps, rho, tau = 400, 3, 1.5, 0.02, 1e-6
        p = derive_params_pure(n, d, bounds, eps, rho, tau)
        g, alpha = bounds.lipschitz, bounds.strong_convexity
        lhs = p.ball_radius - 8.0 * math.sqrt(2.0 * d * g * p.ball_radius / (eps * alpha * n))
        rhs = 2.0 * d * (g + tau * alpha) * math.log(d / rho) / (n * alpha * eps) + tau / n
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_temperature_budget_identity(self):
        bounds = toy_bounds()
        p = derive_params_pure(400, 3, bounds, 1.5, 0.02, 1e-6)
        assert p.gamma * 2.0 * bounds.lipschitz * p.ball_radius == pytest.approx(1.5, rel=1e-14)

    def test_displacement_formula_and_statics(self):
        bounds = toy_bounds()
        n, d, eps, rho, tau = 400, 3, 1.5, 0.02, 1e-6
        p = derive_params_pure(n, d, bounds, eps, rho, tau)
        g, alpha = bounds.lipschitz, bounds.strong_convexity
        assert p.delta_winf == pytest.approx(
            d * g * math.log(d / rho) / (2.0 * n * n * alpha * eps), rel=1e-12)
        assert p.reg_lambda == 0.0
        assert p.norm == "l1"
        assert p.rho == rho
        for stage in (p.budget_localize, p.budget_sample, p.budget_perturb):
            assert stage == PrivacyBudget.pure(eps)

    def test_ball_contains_mixing_margin(self):
        bounds = toy_bounds()
        for eps in (0.1, 1.0, 10.0):
            p = derive_params_pure(200, 4, bounds, eps, 0.05, 1e-6)
            g, alpha = bounds.lipschitz, bounds.strong_convexity
            want_r1 = 8.0 * math.sqrt(4 / (p.gamma * alpha * 200))
            assert p.inner_radius_req == pytest.approx(want_r1, rel=1e-12)
            assert p.ball_radius >= p.inner_radius_req

    def test_validation(self):
        bounds = toy_bounds()
        with pytest.raises(ValueError):
            derive_params_pure(100, 2, bounds, 0.0, 0.05, 1e-6)
        with pytest.raises(ValueError):
            derive_params_pure(100, 2, bounds, 1.0, 1.5, 1e-6)
        with pytest.raises(ValueError):
            derive_params_pure(100, 2, bounds, 1.0, 0.05, 0.0)
        with pytest.raises(ValueError):
            derive_params_pure(0, 2, bounds, 1.0, 0.05, 1e-6)


class TestDeriveParamsGdp:
    def test_radius_and_temperature_formulas(self):
        bounds = toy_bounds()
        n, d, mu, rho, tau = 500, 4, 1.2, 0.03, 1e-6
        p = derive_params_gdp(n, d, bounds, mu, rho, tau)
        g, alpha = bounds.lipschitz, bounds.strong_convexity
        want_b = (2.0 * math.sqrt(2.0) * (tau * alpha + g)
                  * (math.sqrt(d) + math.sqrt(math.log(1.0 / rho)))
                  + 8.0 * g * math.sqrt(d) + tau * alpha * mu) / (alpha * n * mu)
        assert p.ball_radius == pytest.approx(want_b, rel=1e-12)
        assert p.gamma * g * g == pytest.approx(mu * mu * alpha * n, rel=1e-14)
        assert p.delta_winf == pytest.approx(
            math.sqrt(d) * g / (math.sqrt(2.0) * n * n * alpha * mu), rel=1e-12)
        assert p.norm == "l2"
        assert p.ball_radius > p.inner_radius_req

    def test_vanishing_tau_limit(self):
        bounds = toy_bounds()
        n, d, mu, rho = 500, 4, 1.2, 0.03
        p = derive_params_gdp(n, d, bounds, mu, rho, 1e-300)
        g, alpha = bounds.lipschitz, bounds.strong_convexity
        want = (2.0 * math.sqrt(2.0) * g * (math.sqrt(d) + math.sqrt(math.log(1.0 / rho)))
                + 8.0 * g * math.sqrt(d)) / (alpha * n * mu)
        assert p.ball_radius == pytest.approx(want, rel=1e-10)

    def test_doubling_budget_halves_displacement(self):
        bounds = toy_bounds()
        lo = derive_params_gdp(500, 4, bounds, 1.2, 0.03, 1e-6)
        hi = derive_params_gdp(500, 4, bounds, 2.4, 0.03, 1e-6)
        assert hi.delta_winf == pytest.approx(lo.delta_winf / 2.0, rel=1e-14)
        assert 0.5 <= hi.ball_radius / lo.ball_radius <= 0.55

    def test_validation(self):
        with pytest.raises(ValueError):
            derive_params_gdp(100, 2, toy_bounds(), -1.0, 0.05, 1e-6)


class TestAsapPerturb:
    def test_vanishing_displacement_returns_input(self):
        theta = np.array([0.3, -0.7])
        rng = np.random.default_rng(0)
        out = asap_perturb(theta, 1e-300, PrivacyBudget.pure(1.0), "l1", rng)
        assert np.allclose(out, theta, atol=1e-290)

    def test_pure_laplace_scale(self):
        # scale 2 * 0.1 / 1 = 0.2; E|Laplace(b)| = b
        rng = np.random.default_rng(8)
        noise = asap_perturb(np.zeros(100_000), 0.1, PrivacyBudget.pure(1.0), "l1", rng)
        assert float(np.abs(noise).mean()) == pytest.approx(0.2, rel=0.02)

    def test_gdp_gaussian_scale(self):
        # sigma = 2 * 0.1 / 0.5 = 0.4
        rng = np.random.default_rng(9)
        noise = asap_perturb(np.zeros(100_000), 0.1, PrivacyBudget.gdp(0.5), "l2", rng)
        assert float(noise.std()) == pytest.approx(0.4, rel=0.02)

    def test_norm_kind_mismatch(self):
        theta = np.zeros(2)
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            asap_perturb(theta, 0.1, PrivacyBudget.pure(1.0), "l2", rng)
        with pytest.raises(ValueError):
            asap_perturb(theta, 0.1, PrivacyBudget.gdp(1.0), "l1", rng)

    def test_deterministic_given_seed(self):
        theta = np.array([1.0, 2.0, 3.0])
        a = asap_perturb(theta, 0.2, PrivacyBudget.gdp(1.0), "l2", np.random.default_rng(4))
        b = asap_perturb(theta, 0.2, PrivacyBudget.gdp(1.0), "l2", np.random.default_rng(4))
        assert np.array_equal(a, b)


class TestRunLocalizedAsap:
    def test_total_budget_pure_triples(self, rng):
        model = make_ridge(rng, n=60, d=2)
        bounds = certify_bounds(model, 1.0)
        res = run_localized_asap(model, bounds, PrivacyBudget.pure(20.0),
                                 PipelineConfig(rho=0.05, k_max=50), rng)
        assert res.total_budget == PrivacyBudget.pure(60.0)
        assert res.params.norm == "l1"
        assert math.isfinite(res.excess_risk)
        assert res.excess_risk >= -1e-9

    def test_total_budget_gdp_composes_in_quadrature(self, rng):
        model = make_ridge(rng, n=60, d=2)
        bounds = certify_bounds(model, 1.0)
        res = run_localized_asap(model, bounds, PrivacyBudget.gdp(1.0),
                                 PipelineConfig(rho=0.05, k_max=50), rng)
        assert res.total_budget.kind == "gdp"
        assert res.total_budget.value == pytest.approx(math.sqrt(3.0), rel=1e-12)
        assert res.params.norm == "l2"

    def test_rejects_proximal_term(self, rng):
        model = make_ridge(rng, n=30, d=2, reg_lambda=0.5)
        bounds = certify_bounds(model, 1.0)
        with pytest.raises(ValueError):
            run_localized_asap(model, bounds, PrivacyBudget.gdp(1.0),
                               PipelineConfig(), rng)

    def test_default_failure_probability(self, rng):
        model = make_ridge(rng, n=60, d=2)
        bounds = certify_bounds(model, 1.0)
        res = run_localized_asap(model, bounds, PrivacyBudget.gdp(2.0),
                                 PipelineConfig(rho=None, k_max=50), rng)
        assert res.params.rho == pytest.approx(1.0 / (2 * bounds.kappa), rel=1e-12)

    def test_stage_wiring(self, rng):
        model = make_ridge(rng, n=60, d=2)
        bounds = certify_bounds(model, 1.0)
        budget = PrivacyBudget.gdp(2.0)
        cfg = PipelineConfig(rho=0.05, k_max=300)
        res = run_localized_asap(model, bounds, budget, cfg, rng)
        assert res.localization.budget_spent == budget
        assert res.params.schedule.n_steps <= 300
        assert res.params.schedule.n_steps_theoretical >= res.params.schedule.n_steps
        assert res.params.certification.norm == "l2"
        assert res.params.certification.xi.log < 0
        if res.sample.accepted_inside_domain:
            gap = float(np.linalg.norm(res.sample.theta - res.localization.theta_private))
            assert gap <= res.params.ball_radius * (1.0 + 1e-12)

    def test_deterministic_given_seed(self, rng):
        model = make_ridge(rng, n=40, d=2)
        bounds = certify_bounds(model, 1.0)
        a = run_localized_asap(model, bounds, PrivacyBudget.gdp(1.5),
                               PipelineConfig(rho=0.05, k_max=100), np.random.default_rng(6))
        b = run_localized_asap(model, bounds, PrivacyBudget.gdp(1.5),
                               PipelineConfig(rho=0.05, k_max=100), np.random.default_rng(6))
        assert np.array_equal(a.theta_hat, b.theta_hat)
        assert a.excess_risk == b.excess_risk

    def test_excess_risk_trend_over_budgets(self, rng):
        model = make_ridge(rng, n=50, d=2)
        bounds = certify_bounds(model, 1.0)
        star = exact_minimizer(model)
        trivial_gap = total_objective(model, np.zeros(2)) - total_objective(model, star)
        cfg = PipelineConfig(rho=0.05, k_max=2000)
        chain = np.random.default_rng(123)
        means = []
        for mu in (2.0, 4.0, 8.0, 16.0, 32.0):
            vals = [run_localized_asap(model, bounds, PrivacyBudget.gdp(mu), cfg, chain
                                       ).excess_risk for _ in range(40)]
            means.append(float(np.mean(vals)))
        assert all(means[i + 1] < means[i] for i in range(4))
        assert means[-1] < 0.1 * trivial_gap


class TestUtilityFloor:
    def test_quadratic_sample_utility_under_dim_over_gamma(self):
        # target exp(-gamma ||theta||^2 / 2): E[J] - min J = d / (2 gamma),
        # comfortably inside the d / gamma certificate
        model = gaussian_target_model(2)
        gamma = 4.0
        sigma = 1.0 / math.sqrt(gamma)
        schedule = MalaSchedule(gamma=gamma, step_size=0.1 * sigma**2, n_steps=5,
                                max_restarts=5, init_std=sigma)
        ball = DomainBall(center=np.zeros(2), radius=10.0 * sigma)
        rng = np.random.default_rng(12)
        vals = np.empty(20_000)
        for i in range(vals.shape[0]):
            theta = run_mala(model, schedule, ball, rng).theta
            vals[i] = total_objective(model, theta)
        mean = float(vals.mean())
        se = float(vals.std(ddof=1)) / math.sqrt(vals.shape[0])
        assert mean + 3.0 * se <= 2 / gamma
        assert mean == pytest.approx(2 / (2.0 * gamma), rel=0.05)
