"""Kaczmarz row-action solvers with greedy, weighted and tournament row selection."""
__version__ = "0.1.0"

from .linalg import DenseSystem, full_residual, kaczmarz_update, residual_entry, standardize  # noqa: E402
from .rng import SeededRng, new_rng  # noqa: E402
from .selection import Rule, SelectionOutcome, SelectionStrategy  # noqa: E402
from .solver import IterationTrace, SolverConfig, residual_count_histogram, run  # noqa: E402

__all__ = [
    "DenseSystem",
    "IterationTrace",
    "Rule",
    "SeededRng",
    "SelectionOutcome",
    "SelectionStrategy",
    "SolverConfig",
    "full_residual",
    "kaczmarz_update",
    "new_rng",
    "residual_count_histogram",
    "residual_entry",
    "run",
    "standardize",
]
