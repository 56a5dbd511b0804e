"""Figure construction from the two CSV schemas the dperm tools emit.

Rate tables:  axis_value,regime,rate (one curve per regime, one panel per CSV).
Reports:      method,budget_kind,budget_value,mean_excess_risk,std,reps,lower_bound
              (mean +- std per method vs budget, one panel per budget kind,
              lower-bound curve overlaid).

Rendering goes straight to files through the Agg canvas; no interactive
backend is touched. Output is deterministic for identical inputs: fixed
style, fixed dpi, pinned PNG metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from matplotlib.figure import Figure

BOUNDS_COLUMNS = ("axis_value", "regime", "rate")
REPORT_COLUMNS = (
    "method",
    "budget_kind",
    "budget_value",
    "mean_excess_risk",
    "std",
    "reps",
    "lower_bound",
)

_KIND_LABELS = {"pure": "epsilon (pure DP)", "gdp": "mu (Gaussian DP)"}


@dataclass(frozen=True)
class FigureSpec:
    """What to read, where to write, and the axis scales.

    input_csvs: one rate-table CSV per panel for the bounds figure; exactly
    one report CSV for the experiment figure (its panels come from the
    budget kinds found inside).
    """

    input_csvs: tuple
    output_path: str
    log_x: bool = False
    log_y: bool = True
    x_label: str = "axis value"
    panel_titles: tuple = ()
    dpi: int = 150

    def __post_init__(self):
        if not self.input_csvs:
            raise ValueError("input_csvs must name at least one CSV file")
        if self.dpi <= 0:
            raise ValueError("dpi must be positive")


def _read_csv(path, required):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}; header was {header}")
        return list(reader)


def read_bounds_csv(path):
    """Rate-table rows as dicts with axis_value and rate already floats."""
    rows = _read_csv(path, BOUNDS_COLUMNS)
    return [
        {"axis_value": float(r["axis_value"]), "regime": r["regime"], "rate": float(r["rate"])}
        for r in rows
    ]


def read_report_csv(path):
    """Experiment-report rows with all numeric fields converted."""
    rows = _read_csv(path, REPORT_COLUMNS)
    out = []
    for r in rows:
        out.append(
            {
                "method": r["method"],
                "budget_kind": r["budget_kind"],
                "budget_value": float(r["budget_value"]),
                "mean_excess_risk": float(r["mean_excess_risk"]),
                "std": float(r["std"]),
                "reps": int(r["reps"]),
                "lower_bound": float(r["lower_bound"]),
            }
        )
    return out


def _apply_scales(ax, spec):
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")


def _save(fig, spec):
    fig.savefig(spec.output_path, dpi=spec.dpi, metadata={"Software": "dperm-plots"})


def render_bounds_figure(spec: FigureSpec) -> Figure:
    """One panel per input CSV, one rate curve per regime within a panel."""
    n_panels = len(spec.input_csvs)
    fig = Figure(figsize=(5.0 * n_panels, 4.0), constrained_layout=True)
    axes = fig.subplots(1, n_panels, squeeze=False)[0]
    for idx, (ax, path) in enumerate(zip(axes, spec.input_csvs)):
        rows = read_bounds_csv(path)
        for regime in sorted({r["regime"] for r in rows}):
            pts = sorted(
                ((r["axis_value"], r["rate"]) for r in rows if r["regime"] == regime)
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=regime)
        _apply_scales(ax, spec)
        ax.set_xlabel(spec.x_label)
        ax.set_ylabel("excess risk rate")
        if idx < len(spec.panel_titles):
            ax.set_title(spec.panel_titles[idx])
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
    _save(fig, spec)
    return fig


def render_experiment_figure(spec: FigureSpec) -> Figure:
    """Mean +- std per method vs budget, one panel per budget kind, with the
    lower-bound curve overlaid. The shaded band's half-width is exactly the
    std column."""
    if len(spec.input_csvs) != 1:
        raise ValueError("experiment figure takes exactly one report CSV")
    rows = read_report_csv(spec.input_csvs[0])
    if not rows:
        raise ValueError(f"{spec.input_csvs[0]}: no data rows to plot")
    kinds = sorted({r["budget_kind"] for r in rows})
    fig = Figure(figsize=(5.0 * len(kinds), 4.0), constrained_layout=True)
    axes = fig.subplots(1, len(kinds), squeeze=False)[0]
    for idx, (ax, kind) in enumerate(zip(axes, kinds)):
        sub = [r for r in rows if r["budget_kind"] == kind]
        for method in sorted({r["method"] for r in sub}):
            pts = sorted(
                (r["budget_value"], r["mean_excess_risk"], r["std"])
                for r in sub
                if r["method"] == method
            )
            xs = [p[0] for p in pts]
            means = [p[1] for p in pts]
            stds = [p[2] for p in pts]
            ax.plot(xs, means, marker="o", label=method)
            ax.fill_between(
                xs,
                [m - s for m, s in zip(means, stds)],
                [m + s for m, s in zip(means, stds)],
                alpha=0.25,
                linewidth=0,
            )
        bound_pts = sorted({(r["budget_value"], r["lower_bound"]) for r in sub})
        ax.plot(
            [p[0] for p in bound_pts],
            [p[1] for p in bound_pts],
            linestyle="--",
            color="black",
            label="lower bound",
        )
        _apply_scales(ax, spec)
        ax.set_xlabel(_KIND_LABELS.get(kind, kind))
        ax.set_ylabel("mean excess risk")
        if idx < len(spec.panel_titles):
            ax.set_title(spec.panel_titles[idx])
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
    _save(fig, spec)
    return fig
