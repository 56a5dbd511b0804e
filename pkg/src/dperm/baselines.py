"""Differentially private gradient descent baselines.

Two noisy-GD variants cover the Gaussian-DP regime: a Lipschitz variant with
decaying steps returning a weighted iterate average, and a smooth variant with
a constant step returning the final iterate. Both add per-step isotropic
Gaussian noise with std G sqrt(T/2) / mu to the summed gradient. The third
baseline privatizes per-sample-normalized gradient sums and supports both
budget kinds by splitting the budget evenly across steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .erm import LossModel, RegularityBounds, total_gradient
from .privacy import GDP, PURE, PrivacyBudget, calibrate, sample_noise

_AUTOCLIP_STABILITY = 0.01
_AUTOCLIP_SENSITIVITY = 2.0  # replace-one swap of one unit-bounded summand


@dataclass(frozen=True)
class GdConfig:
    """Iteration budget, step rule, projection ball, and privacy budget.

    step_rule "inverse_t" uses step_value / (alpha n t); "constant" uses
    step_value directly. The projection ball is centered at the origin.
    """

    n_iters: int
    step_rule: str
    step_value: float
    projection_radius: float
    budget: PrivacyBudget

    def __post_init__(self):
        if self.n_iters < 1:
            raise ValueError(f"n_iters must be >= 1, got {self.n_iters}")
        if self.step_rule not in ("inverse_t", "constant"):
            raise ValueError(f"step_rule must be 'inverse_t' or 'constant', got {self.step_rule!r}")
        if not (self.step_value > 0) or not math.isfinite(self.step_value):
            raise ValueError(f"step_value must be positive and finite, got {self.step_value}")
        if not (self.projection_radius > 0):
            raise ValueError(f"projection_radius must be positive, got {self.projection_radius}")


def _project(theta: np.ndarray, radius: float) -> np.ndarray:
    nrm = float(np.linalg.norm(theta))
    if nrm <= radius:
        return theta
    return theta * (radius / nrm)


def _gdp_step_noise(bounds: RegularityBounds, cfg: GdConfig) -> float:
    if cfg.budget.kind != GDP:
        raise ValueError("noisy GD is calibrated for Gaussian DP; pure budgets are rejected")
    t = cfg.n_iters
    return bounds.lipschitz * math.sqrt(t / 2.0) / cfg.budget.value


def noisy_gd_lipschitz(
    model: LossModel,
    bounds: RegularityBounds,
    cfg: GdConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Projected noisy GD with steps step_value/(alpha n t); returns the
    average of iterates theta_1..theta_T weighted by 2t / (T(T+1))."""
    if cfg.step_rule != "inverse_t":
        raise ValueError("the Lipschitz variant uses the inverse_t step rule")
    sigma = _gdp_step_noise(bounds, cfg)
    alpha_n = bounds.strong_convexity * model.n
    t_total = cfg.n_iters
    theta = np.zeros(model.d)
    avg = np.zeros(model.d)
    weight_norm = t_total * (t_total + 1.0)
    for t in range(1, t_total + 1):
        eta = cfg.step_value / (alpha_n * t)
        noise = sigma * rng.standard_normal(model.d)
        theta = _project(theta - eta * (total_gradient(model, theta) + noise), cfg.projection_radius)
        avg += (2.0 * t / weight_norm) * theta
    return avg


def noisy_gd_smooth(
    model: LossModel,
    bounds: RegularityBounds,
    cfg: GdConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Projected noisy GD with a constant step <= 1/(n beta); returns theta_T."""
    if cfg.step_rule != "constant":
        raise ValueError("the smooth variant uses the constant step rule")
    step_cap = 1.0 / (model.n * bounds.smoothness)
    if cfg.step_value > step_cap * (1.0 + 1e-12):
        raise ValueError(
            f"step {cfg.step_value:.3e} exceeds the smoothness cap 1/(n beta) = {step_cap:.3e}"
        )
    sigma = _gdp_step_noise(bounds, cfg)
    theta = np.zeros(model.d)
    for _ in range(cfg.n_iters):
        noise = sigma * rng.standard_normal(model.d)
        theta = _project(theta - cfg.step_value * (total_gradient(model, theta) + noise), cfg.projection_radius)
    return theta


def dp_gd_autoclip(model: LossModel, cfg: GdConfig, rng: np.random.Generator) -> np.ndarray:
    """DP-GD on per-sample gradients normalized to g / (||g|| + 0.01).

    Each normalized summand has norm < 1, so the replace-one sensitivity of
    the sum is 2. The budget splits evenly: eps/T per step composed
    additively, or mu/sqrt(T) per step in quadrature. Pure budgets lift the
    l2 sensitivity by sqrt(d) and add Laplace; GDP adds Gaussian.
    """
    if cfg.step_rule != "constant":
        raise ValueError("dp_gd_autoclip uses the constant step rule")
    t_total = cfg.n_iters
    if cfg.budget.kind == PURE:
        step_budget = PrivacyBudget.pure(cfg.budget.value / t_total)
    else:
        step_budget = PrivacyBudget.gdp(cfg.budget.value / math.sqrt(t_total))
    spec = calibrate(_AUTOCLIP_SENSITIVITY, step_budget, "l2", model.d)
    X = model.dataset.features
    y = model.dataset.labels
    alpha = model.reg_alpha
    theta = np.zeros(model.d)
    for _ in range(t_total):
        resid = X @ theta - y
        grads = X * resid[:, None] + alpha * theta
        norms = np.linalg.norm(grads, axis=1)
        clipped = grads / (norms + _AUTOCLIP_STABILITY)[:, None]
        noisy_sum = clipped.sum(axis=0) + sample_noise(spec, rng)
        theta = _project(theta - cfg.step_value * noisy_sum, cfg.projection_radius)
    return theta
