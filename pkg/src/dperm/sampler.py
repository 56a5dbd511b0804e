"""Constrained Metropolis-adjusted Langevin sampling of Gibbs posteriors.

Target density is proportional to exp(-gamma * J(theta)) restricted to a ball.
The chain runs unconstrained from an initialization centered at the ball
center; a run is kept only if its terminal iterate lands inside the ball,
otherwise the chain restarts from a fresh initialization, up to a restart
budget. Acceptance uses the standard detailed-balance Metropolis ratio for
the Gaussian proposal theta' ~ N(theta - h gamma grad J(theta), 2 h I).

`default_schedule` instantiates the step size, step count, restart budget and
initialization scale from the certified problem constants. The target TV
accuracy xi it aims for underflows linear floats by design, so the schedule
works with log(xi) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .erm import LossModel, RegularityBounds, total_gradient, total_objective
from .geometry import DomainBall, LogValue, ball_volume, tv_threshold


@dataclass
class MalaSchedule:
    """Chain parameters; n_steps_theoretical records the uncapped count."""

    gamma: float
    step_size: float
    n_steps: int
    max_restarts: int
    init_std: float
    n_steps_theoretical: float = float("nan")
    log_xi: float = float("nan")

    def __post_init__(self):
        if not (self.gamma > 0 and self.step_size > 0 and self.init_std > 0):
            raise ValueError("gamma, step_size and init_std must be positive")
        if self.n_steps < 1 or self.max_restarts < 1:
            raise ValueError("n_steps and max_restarts must be >= 1")


@dataclass
class SampleResult:
    theta: np.ndarray
    restarts_used: int
    accepted_inside_domain: bool
    mh_acceptance_rate: float


def log_target(model: LossModel, gamma: float, theta) -> float:
    """Unnormalized log density -gamma * J(theta)."""
    return -gamma * total_objective(model, theta)


def mh_log_accept(theta, prop, step_size: float, gamma: float, model: LossModel) -> float:
    """Log Metropolis ratio for the Langevin proposal, detailed-balance form:

    log pi(prop) + log q(theta | prop) - log pi(theta) - log q(prop | theta).
    """
    theta = np.asarray(theta, dtype=float).ravel()
    prop = np.asarray(prop, dtype=float).ravel()
    h = step_size
    if not (h > 0):
        raise ValueError(f"step_size must be positive, got {h}")
    fwd_mean = theta - h * gamma * total_gradient(model, theta)
    bwd_mean = prop - h * gamma * total_gradient(model, prop)
    log_q_fwd = -float(np.sum((prop - fwd_mean) ** 2)) / (4.0 * h)
    log_q_bwd = -float(np.sum((theta - bwd_mean) ** 2)) / (4.0 * h)
    return (
        log_target(model, gamma, prop)
        + log_q_bwd
        - log_target(model, gamma, theta)
        - log_q_fwd
    )


def run_mala(
    model: LossModel,
    schedule: MalaSchedule,
    ball: DomainBall,
    rng: np.random.Generator,
    trace_file=None,
) -> SampleResult:
    """Sample the ball-restricted Gibbs posterior by restarted MALA.

    Each trial initializes at N(ball.center, init_std^2 I) and runs n_steps.
    The first trial whose terminal iterate lies in the ball is returned. If
    every trial ends outside, the ball center is returned as the documented
    deterministic fallback (flagged by accepted_inside_domain=False).
    """
    if ball.dim != model.d:
        raise ValueError("ball dimension does not match model dimension")
    gamma, h = schedule.gamma, schedule.step_size
    proposed = 0
    accepted = 0
    for trial in range(schedule.max_restarts):
        theta = ball.center + schedule.init_std * rng.standard_normal(model.d)
        grad = total_gradient(model, theta)
        if not np.isfinite(grad).all():
            raise ArithmeticError("non-finite gradient at initialization; check model scaling")
        log_pi = log_target(model, gamma, theta)
        for step in range(schedule.n_steps):
            prop = theta - h * gamma * grad + math.sqrt(2.0 * h) * rng.standard_normal(model.d)
            prop_grad = total_gradient(model, prop)
            if not np.isfinite(prop_grad).all():
                raise ArithmeticError("non-finite gradient at proposal; check model scaling")
            log_pi_prop = log_target(model, gamma, prop)
            bwd_mean = prop - h * gamma * prop_grad
            fwd_mean = theta - h * gamma * grad
            log_ratio = (
                log_pi_prop
                - float(np.sum((theta - bwd_mean) ** 2)) / (4.0 * h)
                - log_pi
                + float(np.sum((prop - fwd_mean) ** 2)) / (4.0 * h)
            )
            proposed += 1
            take = math.log(rng.random() + 5e-324) <= log_ratio
            if take:
                accepted += 1
                theta, grad, log_pi = prop, prop_grad, log_pi_prop
            if trace_file is not None:
                trace_file.write(f"{trial},{step},{log_pi:.17g},{int(take)}\n")
        if ball.contains(theta, tol=0.0):
            return SampleResult(
                theta=theta,
                restarts_used=trial + 1,
                accepted_inside_domain=True,
                mh_acceptance_rate=accepted / max(proposed, 1),
            )
    return SampleResult(
        theta=ball.center.copy(),
        restarts_used=schedule.max_restarts,
        accepted_inside_domain=False,
        mh_acceptance_rate=accepted / max(proposed, 1),
    )


def default_schedule(
    bounds: RegularityBounds,
    gamma: float,
    n: int,
    d: int,
    ball: DomainBall,
    delta_winf: float,
    norm: str,
    *,
    c_h: float = 1.0,
    c_k: float = 1.0,
    c_tau: float = 1.0,
    k_max: int | None = None,
) -> MalaSchedule:
    """Schedule hitting TV accuracy xi against the ball-restricted posterior.

    xi comes from tv_threshold at the smooth-branch density floor with probe
    at the minimizer, p_min = exp(-2 gamma n beta B^2) / Vol(B); then

        h     = c_h  * min(kappa^-1/2 / (gamma n beta sqrt(L)), 1/(gamma n beta d))
        K     = c_k  * L * max(kappa^3/2 sqrt(L), d kappa),  L = d ln kappa + ln(1/xi)
        t_max = ceil(c_tau * ln(2/xi))

    K is capped at k_max when given; the uncapped value is recorded.
    """
    if not (gamma > 0) or not math.isfinite(gamma):
        raise ValueError(f"gamma must be positive and finite, got {gamma}")
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    if min(c_h, c_k, c_tau) <= 0:
        raise ValueError("schedule constants must be positive")
    beta = bounds.smoothness
    kappa = bounds.kappa
    B = ball.radius
    gnb = gamma * n * beta
    log_p_min = -2.0 * gnb * B * B - ball_volume(d, B).log
    log_xi = tv_threshold(LogValue(log_p_min), delta_winf, d, norm).log
    # ln(1/xi) can only be non-positive when the requested accuracy is vacuous.
    big_l = d * math.log(max(kappa, 1.0)) + max(-log_xi, 0.0)
    big_l = max(big_l, 1e-12)
    h = c_h * min(
        1.0 / (math.sqrt(kappa) * gnb * math.sqrt(big_l)),
        1.0 / (gnb * d),
    )
    k_theory = c_k * big_l * max(kappa**1.5 * math.sqrt(big_l), d * kappa)
    n_steps = max(1, int(math.ceil(k_theory)))
    if k_max is not None:
        if k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {k_max}")
        n_steps = min(n_steps, k_max)
    tau_max = max(1, int(math.ceil(c_tau * (math.log(2.0) + max(-log_xi, 0.0)))))
    return MalaSchedule(
        gamma=gamma,
        step_size=h,
        n_steps=n_steps,
        max_restarts=tau_max,
        init_std=1.0 / math.sqrt(gnb),
        n_steps_theoretical=k_theory,
        log_xi=log_xi,
    )
