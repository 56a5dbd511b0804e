"""Dataset ingestion: wine-quality CSV parsing, standardization, synthetics.

The wine-quality files are semicolon-delimited with one header row, eleven
physicochemical feature columns, and a final integer "quality" column. They
are not bundled; point DPERM_DATA_DIR (or a config dataset_path) at the
directory holding winequality-red.csv / winequality-white.csv.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .erm import Dataset

WINE_FEATURES = 11
WINE_FILENAMES = {"wine_red": "winequality-red.csv", "wine_white": "winequality-white.csv"}
WINE_ROWS = {"wine_red": 1599, "wine_white": 4898}


def load_wine_csv(path) -> Dataset:
    """Parse a wine-quality CSV; errors carry the offending line number."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise ValueError(f"{path}: empty file")
        n_cols = len(header.split(";"))
        if n_cols != WINE_FEATURES + 1:
            raise ValueError(
                f"{path}: line 1: expected {WINE_FEATURES + 1} semicolon-delimited columns, got {n_cols}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(";")
            if len(parts) != WINE_FEATURES + 1:
                raise ValueError(
                    f"{path}: line {lineno}: expected {WINE_FEATURES + 1} columns, got {len(parts)}"
                )
            try:
                rows.append([float(v.strip().strip('"')) for v in parts])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: non-numeric field ({exc})") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    return Dataset(features=arr[:, :WINE_FEATURES], labels=arr[:, WINE_FEATURES])


def standardize(ds: Dataset, center_labels: bool = True) -> Dataset:
    """Shift/scale features to mean 0 and sample std 1 (ddof=1).

    Zero-variance columns become all zeros. Labels are mean-centered when
    center_labels is set (the default for the experiments here).
    """
    X = ds.features
    mean = X.mean(axis=0)
    if ds.n > 1:
        std = X.std(axis=0, ddof=1)
    else:
        std = np.zeros(ds.d)
    out = np.zeros_like(X)
    nonconst = std > 0
    out[:, nonconst] = (X[:, nonconst] - mean[nonconst]) / std[nonconst]
    y = ds.labels - ds.labels.mean() if center_labels else ds.labels.copy()
    return Dataset(features=out, labels=y)


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape and signal of a synthetic ridge instance."""

    n: int
    d: int
    label_noise: float = 0.2
    signal_scale: float = 1.0
    interpolable: bool = False  # exact linear labels, no noise


def synthetic_ridge(spec: SyntheticSpec, rng: np.random.Generator) -> Dataset:
    """Gaussian features with a random linear signal, wine-like after standardize."""
    if spec.n < 1 or spec.d < 1:
        raise ValueError("n and d must be >= 1")
    if spec.label_noise < 0:
        raise ValueError("label_noise must be >= 0")
    X = rng.standard_normal((spec.n, spec.d))
    # Mild column correlations so the Gram matrix is not exactly isotropic.
    if spec.d > 1:
        mix = np.eye(spec.d) + 0.3 * rng.standard_normal((spec.d, spec.d)) / math.sqrt(spec.d)
        X = X @ mix
    w = spec.signal_scale * rng.standard_normal(spec.d) / math.sqrt(spec.d)
    y = X @ w
    if not spec.interpolable and spec.label_noise > 0:
        y = y + spec.label_noise * rng.standard_normal(spec.n)
    return Dataset(features=X, labels=y)
