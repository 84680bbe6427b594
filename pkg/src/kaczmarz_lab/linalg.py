"""Dense system storage and the operations shared by every row-selection rule.

Row indices are 1-based at this module's public surface.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotStandardized, ZeroRowError

ROW_NORM_EPS = 1e-300
UNIT_ROW_TOL = 1e-12


@dataclass(frozen=True)
class DenseSystem:
    """Consistent linear system ``A x = b`` with ``A`` stored row-major."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64).reshape(-1)
        if a.ndim != 2:
            raise DimensionMismatch(f"A must be 2-D, got shape {a.shape}")
        m, n = a.shape
        if not (m >= n >= 1):
            raise DimensionMismatch(f"need m >= n >= 1, got m={m}, n={n}")
        if b.shape[0] != m:
            raise DimensionMismatch(f"b has length {b.shape[0]}, expected {m}")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("A and b must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]

    def row(self, i):
        """Row ``i`` (1-based) as a read-only view."""
        return self.a[_to_zero_based(i, self.m)]

    def row_norms(self):
        return np.sqrt(np.einsum("ij,ij->i", self.a, self.a))

    def is_standardized(self, tol=UNIT_ROW_TOL):
        return bool(np.all(np.abs(self.row_norms() - 1.0) <= tol))


class ResidualCounter:
    """Caller-owned tally of residual entries evaluated."""

    def __init__(self):
        self.count = 0

    def add(self, k):
        self.count += int(k)


def _to_zero_based(i, m):
    i = int(i)
    if not 1 <= i <= m:
        raise IndexError(f"row index {i} outside 1..{m}")
    return i - 1


def as_state(x, n):
    x = np.array(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != n:
        raise DimensionMismatch(f"state has length {x.shape[0]}, expected {n}")
    if not np.isfinite(x).all():
        raise ValueError("state vector must be finite")
    return x


def standardize(system):
    """Scale every equation so its row has unit Euclidean norm.

    ``b`` is scaled by the same factor, so the solution set is unchanged.
    Rows whose computed norm is already 1 up to summation rounding are left
    untouched, which makes the operation idempotent.
    """
    norms = system.row_norms()
    bad = np.flatnonzero(~(norms > ROW_NORM_EPS))
    if bad.size:
        raise ZeroRowError(int(bad[0]) + 1)
    slack = min(2.0 * system.n * np.finfo(np.float64).eps, UNIT_ROW_TOL)
    norms = np.where(np.abs(norms - 1.0) <= slack, 1.0, norms)
    return DenseSystem(system.a / norms[:, None], system.b / norms)


def check_standardized(system, tol=1e-9):
    dev = np.abs(system.row_norms() - 1.0)
    if np.any(dev > tol):
        i = int(np.argmax(dev)) + 1
        raise NotStandardized(f"row {i} has norm deviating from 1 by {dev[i - 1]:.3g}")


def residual_entry(system, x, i, counter=None):
    """``b_i - <a_i, x>`` for 1-based ``i``; one inner product."""
    j = _to_zero_based(i, system.m)
    if counter is not None:
        counter.add(1)
    return float(system.b[j] - system.a[j] @ x)


def full_residual(system, x, counter=None):
    if counter is not None:
        counter.add(system.m)
    return system.b - system.a @ x


def kaczmarz_update(x, a_i, r_i):
    """Project ``x`` onto the hyperplane of a unit row: ``x + r_i * a_i``."""
    return x + r_i * a_i


def read_system(path):
    """Read the plain-text fixture format.

    First line ``m n``, then ``m`` lines of ``n`` floats for ``A``, then one
    line of ``m`` floats for ``b``.
    """
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValueError(f"{path}: first line must be 'm n'")
    m, n = int(lines[0][0]), int(lines[0][1])
    if len(lines) != m + 2:
        raise ValueError(f"{path}: expected {m + 2} non-empty lines, found {len(lines)}")
    a = np.array([[float(v) for v in ln] for ln in lines[1:m + 1]], dtype=np.float64)
    if a.shape != (m, n):
        raise ValueError(f"{path}: matrix block is not {m}x{n}")
    b = np.array([float(v) for v in lines[m + 1]], dtype=np.float64)
    return DenseSystem(a, b)


def write_system(path, system):
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    with open(path, "w") as fh:
        fh.write(f"{system.m} {system.n}\n")
        for row in system.a:
            fh.write(" ".join(fmt(v) for v in row) + "\n")
        fh.write(" ".join(fmt(v) for v in system.b) + "\n")
