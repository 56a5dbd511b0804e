"""Minimax excess-risk rates for strongly convex DP-ERM.

Order-level rates (constants dropped) per privacy regime:

    pure    d^2 G^2 / (alpha n eps^2)
    gdp     d   G^2 / (alpha n mu^2)
    approx  d   G^2 ln(1/delta) / (alpha n eps^2)

`sweep` tabulates one regime family along an axis for plotting or for the
lower-bound column of experiment reports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

REGIMES = ("pure", "gdp", "approx")


@dataclass(frozen=True)
class RateQuery:
    regime: str
    d: int
    n: float
    lipschitz: float
    strong_convexity: float
    epsilon: float | None = None
    mu: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not (self.n >= 1):
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (self.lipschitz > 0 and self.strong_convexity > 0):
            raise ValueError("lipschitz and strong_convexity must be positive")


def excess_risk_rate(q: RateQuery) -> float:
    """Evaluate the rate; approx defaults delta to 1/n when unset."""
    base = q.lipschitz**2 / (q.strong_convexity * q.n)
    if q.regime == "pure":
        if q.epsilon is None or not (q.epsilon > 0):
            raise ValueError("pure regime needs epsilon > 0")
        return q.d * q.d * base / (q.epsilon * q.epsilon)
    if q.regime == "gdp":
        if q.mu is None or not (q.mu > 0):
            raise ValueError("gdp regime needs mu > 0")
        return q.d * base / (q.mu * q.mu)
    if q.epsilon is None or not (q.epsilon > 0):
        raise ValueError("approx regime needs epsilon > 0")
    delta = q.delta if q.delta is not None else 1.0 / q.n
    if not (0 < delta < 1):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return q.d * base * math.log(1.0 / delta) / (q.epsilon * q.epsilon)


_AXES = ("n", "epsilon", "mu", "d")


def sweep(template: RateQuery, axis: str, points) -> list[tuple[float, str, float]]:
    """Rates along one axis; returns (axis_value, regime, rate) rows."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    rows = []
    for value in points:
        if axis == "d":
            q = replace(template, d=int(value))
        else:
            q = replace(template, **{axis: float(value)})
        rows.append((float(value), q.regime, excess_risk_rate(q)))
    return rows


def write_sweep_csv(rows, path) -> None:
    """Rows of (axis_value, regime, rate) to CSV with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis_value", "regime", "rate"])
        for axis_value, regime, rate in rows:
            writer.writerow([f"{axis_value:.17g}", regime, f"{rate:.17g}"])
