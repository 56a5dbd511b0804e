import numpy as np
import pytest

from dperm.erm import Dataset, LossModel


def make_ridge(rng, n, d, reg_alpha=1.0, reg_lambda=0.0, center=None, label_noise=0.3):
    """Random dense ridge instance with O(1)-scale features and labels."""
    X = rng.standard_normal((n, d))
    w = rng.standard_normal(d) / np.sqrt(d)
    y = X @ w + label_noise * rng.standard_normal(n)
    return LossModel(
        dataset=Dataset(features=X, labels=y),
        reg_alpha=reg_alpha,
        reg_lambda=reg_lambda,
        center=center,
    )


def gaussian_target_model(dim):
    """Zero-feature model: J(theta) = ||theta||^2 / 2, so exp(-gamma J) is
    the N(0, I/gamma) density. Lets sampler tests start in stationarity."""
    return LossModel(dataset=Dataset(features=np.zeros((1, dim)), labels=np.zeros(1)),
                     reg_alpha=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
