import numpy as np
import pytest


def random_pd(p: int, rng: np.random.Generator, cond: float = 1.0) -> np.ndarray:
    """Well-conditioned random symmetric positive-definite matrix."""
    a = rng.standard_normal((p, p))
    return a @ a.T + cond * p * np.eye(p)


def standardized(x: np.ndarray) -> np.ndarray:
    return (x - x.mean(axis=0)) / x.std(axis=0, ddof=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
