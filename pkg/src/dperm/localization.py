"""Private localization by output perturbation.

Replacing one record moves the ridge minimizer by at most 2G/(alpha n) in l2,
so an approximate minimizer within tau/n of the true one has replace-one
sensitivity sens = 2 tau / n + 2 G / (alpha n). Releasing it with noise
calibrated to sens is a standalone DP estimator and doubles as the center of
the sampling ball in the end-to-end pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .erm import LossModel, RegularityBounds, exact_minimizer, total_gradient
from .privacy import PrivacyBudget, calibrate, sample_noise


@dataclass(frozen=True)
class LocalizationResult:
    theta_private: np.ndarray
    theta_opt: np.ndarray
    sensitivity: float
    tau: float
    budget_spent: PrivacyBudget


def optimize_to_tolerance(model: LossModel, tau: float, method: str = "exact") -> np.ndarray:
    """Point within tau/n of the exact minimizer.

    "exact" solves the normal equations. "gd" runs plain gradient descent with
    step 1/(n beta + lam) until the gradient norm certifies the distance
    (||grad|| >= (n alpha + lam) ||theta - theta*||), which takes about
    kappa * ln(||theta0 - theta*|| n / tau) iterations.
    """
    if not (tau > 0) or not math.isfinite(tau):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    if method == "exact":
        return exact_minimizer(model)
    if method != "gd":
        raise ValueError(f"unknown method {method!r}")
    n = model.n
    row_sq = float(np.max(np.sum(model.dataset.features**2, axis=1)))
    smooth_total = n * (row_sq + model.reg_alpha) + model.reg_lambda
    strong_total = n * model.reg_alpha + model.reg_lambda
    if strong_total <= 0:
        raise ValueError("optimize_to_tolerance needs reg_alpha > 0 or reg_lambda > 0")
    step = 1.0 / smooth_total
    theta = model.center.copy()
    # Gradient norm threshold certifying ||theta - theta*|| <= tau / n.
    tol = strong_total * tau / n
    max_iters = 1000 + int(20 * (smooth_total / strong_total) * max(1.0, math.log(max(n / tau, 2.0))))
    for _ in range(max_iters):
        g = total_gradient(model, theta)
        if float(np.linalg.norm(g)) <= tol:
            return theta
        theta = theta - step * g
    raise ArithmeticError("gradient descent did not certify the requested tolerance")


def output_perturb(
    model: LossModel,
    bounds: RegularityBounds,
    tau: float,
    budget: PrivacyBudget,
    rng: np.random.Generator,
    method: str = "exact",
) -> LocalizationResult:
    """Release an approximate minimizer with noise calibrated to its sensitivity.

    Pure budgets get per-coordinate Laplace at the sqrt(d)-lifted l2 bound;
    GDP budgets get isotropic Gaussian.
    """
    theta_opt = optimize_to_tolerance(model, tau, method=method)
    n = model.n
    sens = 2.0 * tau / n + 2.0 * bounds.lipschitz / (bounds.strong_convexity * n)
    spec = calibrate(sens, budget, "l2", model.d)
    noise = sample_noise(spec, rng)
    return LocalizationResult(
        theta_private=theta_opt + noise,
        theta_opt=theta_opt,
        sensitivity=sens,
        tau=tau,
        budget_spent=budget,
    )
