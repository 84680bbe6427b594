import numpy as np
import pytest

from kaczmarz_lab.linalg import DenseSystem, standardize
from kaczmarz_lab.rng import SeededRng


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    return request.param


def gaussian_system(m, n, seed, homogeneous=False):
    """Standardized consistent ``m x n`` system and its solution."""
    rng = SeededRng(seed)
    a = rng.standard_normal(m * n).reshape(m, n)
    x_true = np.zeros(n) if homogeneous else rng.standard_normal(n)
    return standardize(DenseSystem(a, a @ x_true)), x_true


def diagonal_residual_system(residuals):
    """Identity system whose residual at ``x = 0`` equals ``residuals``."""
    r = np.asarray(residuals, dtype=float)
    return DenseSystem(np.eye(r.size), r)
