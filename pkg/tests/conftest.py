import numpy as np
import pytest

from parallelity.ensemble import DensityOperator


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def diag_state(*probs) -> DensityOperator:
    return DensityOperator.from_matrix(np.diag(np.asarray(probs, dtype=complex)))


def max_abs(a) -> float:
    return float(np.max(np.abs(a)))


def angle_diff(a: float, b: float) -> float:
    """Distance between two angles modulo 2 pi."""
    return abs((a - b + np.pi) % (2 * np.pi) - np.pi)
