import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_psd(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random PSD matrix from a rectangular factor."""
    A = rng.standard_normal((n, n + 2))
    return A @ A.T / n


def random_centered(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric matrix with both-sided centering applied."""
    A = rng.standard_normal((n, n))
    A = 0.5 * (A + A.T)
    C = np.eye(n) - np.ones((n, n)) / n
    return C @ A @ C


def random_labels(n: int, rng: np.random.Generator) -> np.ndarray:
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    if np.all(y == y[0]):
        y[0] = -y[0]
    return y
