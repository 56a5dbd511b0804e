"""Ridge regression objective with certified regularity constants.

The model is least squares with a per-sample quadratic penalty,

    loss_i(theta) = 0.5 * (x_i . theta - y_i)^2 + (alpha / 2) * ||theta||^2,

optionally localized by an extra proximal term (lam / 2) * ||theta - center||^2
on the summed objective. Every per-sample loss is alpha-strongly convex, so the
sum is (n * alpha)-strongly convex, which is what the privacy calibration and
the sampler schedule lean on. `certify_bounds` turns a data matrix plus a
domain ball into explicit Lipschitz / smoothness constants for that ball.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_vector(x, d: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float).ravel()
    if v.shape != (d,):
        raise ValueError(f"{name} must have shape ({d},), got {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} must be finite")
    return v


@dataclass
class Dataset:
    """Immutable feature matrix (n rows, d columns) with labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"features must be a nonempty 2-d array, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"label count {y.shape[0]} does not match row count {X.shape[0]}")
        if not np.isfinite(X).all() or not np.isfinite(y).all():
            raise ValueError("features and labels must be finite")
        X = X.copy()
        y = y.copy()
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass
class LossModel:
    """Dataset plus regularization; caches Gram products for O(d^2) evaluation.

    reg_alpha is the per-sample ridge weight. reg_lambda adds the proximal
    term (reg_lambda / 2) * ||theta - center||^2 to the summed objective and
    is zero unless a caller localizes explicitly.
    """

    dataset: Dataset
    reg_alpha: float
    reg_lambda: float = 0.0
    center: np.ndarray | None = None
    # Cached Gram products, filled in __post_init__.
    _gram: np.ndarray = field(init=False, repr=False)
    _xty: np.ndarray = field(init=False, repr=False)
    _yty: float = field(init=False, repr=False)

    def __post_init__(self):
        # alpha = 0 is a plain least-squares loss; operations that need strict
        # convexity (exact_minimizer, certify_bounds) check for it themselves.
        if not (self.reg_alpha >= 0):
            raise ValueError(f"reg_alpha must be >= 0, got {self.reg_alpha}")
        if self.reg_lambda < 0:
            raise ValueError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        d = self.dataset.d
        if self.center is None:
            self.center = np.zeros(d)
        else:
            self.center = _as_vector(self.center, d, "center")
        X = self.dataset.features
        y = self.dataset.labels
        self._gram = X.T @ X
        self._xty = X.T @ y
        self._yty = float(y @ y)

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def d(self) -> int:
        return self.dataset.d


@dataclass(frozen=True)
class RegularityBounds:
    """Certified constants over a stated domain ball.

    lipschitz bounds ||grad loss_i|| for every sample and every theta in the
    ball; smoothness bounds the per-sample Hessian operator norm; strong
    convexity equals reg_alpha. kappa = smoothness / strong_convexity >= 1.
    """

    lipschitz: float
    strong_convexity: float
    smoothness: float
    domain_radius: float
    domain_center: np.ndarray

    @property
    def kappa(self) -> float:
        return self.smoothness / self.strong_convexity


def per_sample_loss(model: LossModel, theta, i: int) -> float:
    """Loss of sample i at theta (proximal term excluded, it is not per-sample)."""
    theta = _as_vector(theta, model.d, "theta")
    if not 0 <= i < model.n:
        raise IndexError(f"sample index {i} out of range [0, {model.n})")
    x = model.dataset.features[i]
    r = float(x @ theta - model.dataset.labels[i])
    return 0.5 * r * r + 0.5 * model.reg_alpha * float(theta @ theta)


def total_objective(model: LossModel, theta) -> float:
    """Sum of per-sample losses plus the proximal localization term."""
    theta = _as_vector(theta, model.d, "theta")
    quad = float(theta @ model._gram @ theta) - 2.0 * float(model._xty @ theta) + model._yty
    val = 0.5 * quad + 0.5 * model.n * model.reg_alpha * float(theta @ theta)
    if model.reg_lambda > 0:
        dev = theta - model.center
        val += 0.5 * model.reg_lambda * float(dev @ dev)
    return val


def total_gradient(model: LossModel, theta) -> np.ndarray:
    """Gradient of total_objective at theta."""
    theta = _as_vector(theta, model.d, "theta")
    g = model._gram @ theta - model._xty + model.n * model.reg_alpha * theta
    if model.reg_lambda > 0:
        g = g + model.reg_lambda * (theta - model.center)
    return g


def exact_minimizer(model: LossModel, *, residual_tol: float = 1e-10) -> np.ndarray:
    """Solve the normal equations (X'X + n alpha I + lam I) theta = X'y + lam c.

    One step of iterative refinement keeps the gradient residual well under
    residual_tol for the problem scales this library targets; the residual is
    checked and a failure raises rather than returning a bad point.
    """
    if model.reg_alpha <= 0 and model.reg_lambda <= 0:
        raise ValueError("exact_minimizer needs reg_alpha > 0 or reg_lambda > 0")
    n, d = model.n, model.d
    a = model._gram + (n * model.reg_alpha + model.reg_lambda) * np.eye(d)
    b = model._xty + model.reg_lambda * model.center
    theta = np.linalg.solve(a, b)
    theta = theta + np.linalg.solve(a, b - a @ theta)
    grad_norm = float(np.linalg.norm(total_gradient(model, theta)))
    if not np.isfinite(grad_norm) or grad_norm > residual_tol * max(1.0, float(np.linalg.norm(b))):
        raise ArithmeticError(
            f"minimizer residual {grad_norm:.3e} exceeds tolerance; system may be ill-scaled"
        )
    return theta


def certify_bounds(model: LossModel, domain_radius: float, domain_center=None) -> RegularityBounds:
    """Certify Lipschitz/smoothness constants on the ball B(center, radius).

    For theta in the ball, ||theta|| <= r_max = ||center|| + radius and

        ||grad loss_i(theta)|| <= ||x_i|| (||x_i|| r_max + |y_i|) + alpha r_max,

    maximized over rows. Smoothness is max_i ||x_i||^2 + alpha, radius-free.
    """
    if not (domain_radius > 0) or not np.isfinite(domain_radius):
        raise ValueError(f"domain_radius must be positive and finite, got {domain_radius}")
    if model.reg_alpha <= 0:
        raise ValueError("certified strong convexity requires reg_alpha > 0")
    d = model.d
    if domain_center is None:
        domain_center = np.zeros(d)
    else:
        domain_center = _as_vector(domain_center, d, "domain_center")
    r_max = float(np.linalg.norm(domain_center)) + domain_radius
    X = model.dataset.features
    y = model.dataset.labels
    row_norms = np.linalg.norm(X, axis=1)
    alpha = model.reg_alpha
    lipschitz = float(np.max(row_norms * (row_norms * r_max + np.abs(y)) + alpha * r_max))
    smoothness = float(np.max(row_norms**2) + alpha)
    return RegularityBounds(
        lipschitz=lipschitz,
        strong_convexity=alpha,
        smoothness=smoothness,
        domain_radius=domain_radius,
        domain_center=domain_center,
    )
