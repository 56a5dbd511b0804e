"""Domain balls, Gibbs density floors, and Wasserstein-infinity certification.

Everything that can underflow lives in log space: `LogValue` carries the log
of a positive quantity and exposes the linear value when representable. The
key conversion result used downstream: if two distributions on a ball satisfy
d_TV(P, Q) < xi, where xi is `tv_threshold` of Q's density floor and a target
displacement delta, then the W-infinity distance (in the requested norm) is at
most delta. `winf_oracle_grid` is the 1-d reference computation used to test
that chain end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .erm import LossModel, RegularityBounds, total_gradient, total_objective, _as_vector


@dataclass(frozen=True)
class LogValue:
    """A positive scalar stored as its natural log."""

    log: float

    @property
    def linear(self) -> float:
        # exp may under/overflow to 0.0/inf; the log is authoritative.
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    @staticmethod
    def from_linear(x: float) -> "LogValue":
        if not (x > 0):
            raise ValueError(f"LogValue needs a positive value, got {x}")
        return LogValue(math.log(x))


@dataclass
class DomainBall:
    """Euclidean ball; inner_radius_req records the mixing-room requirement."""

    center: np.ndarray
    radius: float
    inner_radius_req: float = 0.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).ravel()
        if not (self.radius > 0) or not math.isfinite(self.radius):
            raise ValueError(f"ball radius must be positive and finite, got {self.radius}")
        if self.inner_radius_req < 0:
            raise ValueError("inner_radius_req must be >= 0")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, theta, tol: float = 0.0) -> bool:
        theta = np.asarray(theta, dtype=float).ravel()
        return float(np.linalg.norm(theta - self.center)) <= self.radius * (1.0 + tol)


@dataclass(frozen=True)
class Certification:
    """Density floor and TV budget certifying a W-infinity displacement."""

    p_min: LogValue
    xi: LogValue
    delta_winf: float
    norm: str


def ball_volume(d: int, r: float) -> LogValue:
    """Volume pi^{d/2} r^d / Gamma(d/2 + 1) of the d-ball, in log space."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not (r > 0) or not math.isfinite(r):
        raise ValueError(f"radius must be positive and finite, got {r}")
    return LogValue(0.5 * d * math.log(math.pi) + d * math.log(r) - math.lgamma(0.5 * d + 1.0))


def p_min_lower_bound(
    gamma: float,
    model: LossModel,
    bounds: RegularityBounds,
    ball: DomainBall,
    probe=None,
) -> LogValue:
    """Floor on the Gibbs density exp(-gamma J) / Z restricted to the ball.

    Two valid floors exist: a Lipschitz branch exp(-gamma (2 n G B + 2 lam B^2))
    and a smooth branch exp(-gamma (2 B ||grad J(probe)|| + 2 (n beta + lam) B^2)),
    each divided by the ball volume. Both hold, so the larger is returned.
    The probe defaults to the ball center and must lie inside the ball.
    """
    if gamma < 0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be >= 0 and finite, got {gamma}")
    if ball.dim != model.d:
        raise ValueError("ball dimension does not match model dimension")
    if probe is None:
        probe = ball.center
    probe = _as_vector(probe, model.d, "probe")
    if not ball.contains(probe, tol=1e-12):
        raise ValueError("probe point must lie inside the ball")
    n = model.n
    b_rad = ball.radius
    lam = model.reg_lambda
    log_vol = ball_volume(model.d, b_rad).log
    exp_lip = gamma * (2.0 * n * bounds.lipschitz * b_rad + 2.0 * lam * b_rad**2)
    grad_norm = float(np.linalg.norm(total_gradient(model, probe)))
    exp_smooth = gamma * (
        2.0 * b_rad * grad_norm + 2.0 * (n * bounds.smoothness + lam) * b_rad**2
    )
    return LogValue(-min(exp_lip, exp_smooth) - log_vol)


def tv_threshold(p_min, delta: float, d: int, norm: str) -> LogValue:
    """TV radius below which closeness to the floor-p_min density pins W-inf.

    l1 norm:  xi = p_min pi^{d/2} delta^d / (2^{d+1} Gamma(d/2+1) d^{d/2})
    l2 norm:  the same without the d^{d/2} factor.
    Accepts p_min as a float or a LogValue.
    """
    if norm not in ("l1", "l2"):
        raise ValueError(f"norm must be 'l1' or 'l2', got {norm!r}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not (delta > 0) or not math.isfinite(delta):
        raise ValueError(f"delta must be positive and finite, got {delta}")
    log_p = p_min.log if isinstance(p_min, LogValue) else LogValue.from_linear(p_min).log
    log_xi = (
        log_p
        + 0.5 * d * math.log(math.pi)
        + d * math.log(delta)
        - (d + 1) * math.log(2.0)
        - math.lgamma(0.5 * d + 1.0)
    )
    if norm == "l1":
        log_xi -= 0.5 * d * math.log(d)
    return LogValue(log_xi)


def winf_oracle_grid(grid: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    """W-infinity distance between two distributions on a shared uniform 1-d grid.

    Returns the smallest r in {0, s, 2s, ...} (s the grid spacing) such that
    P(U) <= Q(U^r) for every open U. In one dimension it is enough to check
    every contiguous sub-interval: components of U whose gaps are <= 2r can be
    merged into their convex hull without changing U^r while only increasing
    P(U), and components farther apart than 2r split additively.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    m = grid.shape[0]
    if m < 2:
        raise ValueError("grid needs at least two points")
    if p.shape != (m,) or q.shape != (m,):
        raise ValueError("p and q must match the grid length")
    steps = np.diff(grid)
    s = float(steps[0])
    if s <= 0 or not np.allclose(steps, s, rtol=1e-9, atol=1e-12):
        raise ValueError("grid must be strictly increasing with uniform spacing")
    for name, w in (("p", p), ("q", q)):
        if np.any(w < -1e-15):
            raise ValueError(f"{name} has negative mass")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"{name} mass sums to {w.sum():.17g}, not 1")
    # cp[j] - cp[i] = P masses on grid[i..j-1].
    cp = np.concatenate(([0.0], np.cumsum(p)))
    cq = np.concatenate(([0.0], np.cumsum(q)))
    slack = 1e-12

    def ok(k: int) -> bool:
        for i in range(m):
            lo = max(0, i - k)
            for j in range(i, m):
                hi = min(m, j + 1 + k)
                if cp[j + 1] - cp[i] > cq[hi] - cq[lo] + slack:
                    return False
        return True

    # The answer is at most the full span; binary search over k.
    lo_k, hi_k = 0, m - 1
    if ok(0):
        return 0.0
    while hi_k - lo_k > 1:
        mid = (lo_k + hi_k) // 2
        if ok(mid):
            hi_k = mid
        else:
            lo_k = mid
    return hi_k * s


def min_density_on_grid(gamma: float, model: LossModel, ball: DomainBall, points: int = 61):
    """Quadrature floor check helper: min of the normalized Gibbs density on a
    grid over the ball (d <= 2 only). Returns (min_density, spacing)."""
    d = model.d
    if d > 2:
        raise ValueError("grid quadrature supported for d <= 2 only")
    c, B = ball.center, ball.radius
    axes = [np.linspace(c[k] - B, c[k] + B, points) for k in range(d)]
    if d == 1:
        pts = axes[0][:, None]
        h = axes[0][1] - axes[0][0]
        cell = h
    else:
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.column_stack([g0.ravel(), g1.ravel()])
        h = axes[0][1] - axes[0][0]
        cell = h * h
    inside = np.linalg.norm(pts - c, axis=1) <= B
    pts = pts[inside]
    logw = np.array([-gamma * total_objective(model, t) for t in pts])
    logw -= logw.max()
    w = np.exp(logw)
    z = w.sum() * cell
    dens = w / z
    return float(dens.min()), float(h)
