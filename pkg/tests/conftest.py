import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_matrices(rng, k, n):
    return [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(k)]


def random_points(rng, count, n=2, radius=0.5, center=0.0):
    return [tuple(center + radius * complex(a, b) for a, b in rng.uniform(-1, 1, (n, 2)))
            for _ in range(count)]


def well_conditioned(rng, n, cap=200.0):
    """Random invertible matrix, resampled until the condition number is tame."""
    while True:
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if np.linalg.cond(A) < cap:
            return A
