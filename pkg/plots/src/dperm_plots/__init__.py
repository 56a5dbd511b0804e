"""Render dperm CSV artifacts (rate tables, experiment reports) to figures."""

from .figures import (
    FigureSpec,
    read_bounds_csv,
    read_report_csv,
    render_bounds_figure,
    render_experiment_figure,
)

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "read_bounds_csv",
    "read_report_csv",
    "render_bounds_figure",
    "render_experiment_figure",
    "__version__",
]
