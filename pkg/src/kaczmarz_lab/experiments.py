"""Test matrices and multi-strategy comparison runs.

Scenarios start from ``x0 = ones`` with ``b = 0``, so the exact solution is
``x_true = 0`` and the error is simply ``||x_k||``.

Seeding: the matrix is drawn from ``SeededRng(seed)``; the strategy at
position ``j`` of the strategy list runs with ``SeededRng(seed + 1 + j)``.
"""
import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import DenseSystem, standardize
from .rng import SeededRng, derived_seed
from .selection import SelectionStrategy
from .solver import SolverConfig, run

THREADS_ENV = "KACZMARZ_LAB_THREADS"
DEFAULT_STRATEGIES = ("uniform", "partial", "two-sample", "greedy")


class Kind(enum.Enum):
    NICE = "nice"
    CHALLENGING = "challenging"
    CUSTOM = "custom"


DEFAULT_ITERATIONS = {Kind.NICE: 10_000, Kind.CHALLENGING: 20_000, Kind.CUSTOM: 10_000}


@dataclass(frozen=True)
class ScenarioSpec:
    """What to build and how to run it.

    ``nice`` and ``challenging`` are square ``n x n``; ``custom`` is
    ``m x n`` with ``shift`` added to the leading diagonal. ``m`` is ignored
    for the square kinds.
    """

    kind: Kind = Kind.NICE
    n: int = 1000
    m: int | None = None
    shift: float = 100.0
    seed: int = 42
    iterations: int | None = None
    strategies: tuple = field(default_factory=lambda: tuple(
        SelectionStrategy.parse(s) for s in DEFAULT_STRATEGIES))
    tolerance: float = 0.0
    trace_every: int = 1

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Kind.CHALLENGING:
            object.__setattr__(self, "shift", 0.0)
        m = self.n if kind is not Kind.CUSTOM or self.m is None else self.m
        object.__setattr__(self, "m", int(m))
        if self.iterations is None:
            object.__setattr__(self, "iterations", DEFAULT_ITERATIONS[kind])
        if not (self.m >= self.n >= 1):
            raise ValueError(f"need m >= n >= 1, got m={self.m}, n={self.n}")
        if self.shift < 0:
            raise ValueError("shift must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        labels = [s.label for s in self.strategies]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate strategies in {labels}")

    def strategy_seed(self, index):
        return derived_seed(self.seed, index + 1)

    def with_seed(self, seed):
        return replace(self, seed=seed)


def gaussian_matrix(m, n, rng, backend=None):
    """``m x n`` i.i.d. standard normal matrix (row-major fill) with ``b = 0``."""
    if not (m >= n >= 1):
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")
    a = rng.standard_normal(m * n, backend=backend).reshape(m, n)
    return DenseSystem(a, np.zeros(m))


def nice_matrix(n, shift, rng, backend=None):
    """Standard normal ``n x n`` plus ``shift * I``, then row-standardized."""
    if shift < 0:
        raise ValueError("shift must be >= 0")
    g = gaussian_matrix(n, n, rng, backend=backend).a.copy()
    g[np.diag_indices(n)] += shift
    return standardize(DenseSystem(g, np.zeros(n)))


def build_system(spec, backend=None):
    rng = SeededRng(spec.seed)
    if spec.kind is Kind.NICE:
        return nice_matrix(spec.n, spec.shift, rng, backend=backend)
    if spec.kind is Kind.CHALLENGING:
        return standardize(gaussian_matrix(spec.n, spec.n, rng, backend=backend))
    g = gaussian_matrix(spec.m, spec.n, rng, backend=backend).a.copy()
    g[np.arange(spec.n), np.arange(spec.n)] += spec.shift
    return standardize(DenseSystem(g, np.zeros(spec.m)))


def thread_count(spec, threads=None):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else len(spec.strategies)
    return max(1, min(int(threads), len(spec.strategies)))


def run_scenario(spec, threads=None, backend=None, system=None):
    """Run every strategy of ``spec`` on one shared matrix.

    Returns ``(system, traces)`` with ``traces`` a dict ordered like
    ``spec.strategies`` and keyed by strategy label.
    """
    if system is None:
        system = build_system(spec, backend=backend)
    x0 = np.ones(system.n)
    x_true = np.zeros(system.n)

    def one(index):
        strategy = spec.strategies[index]
        config = SolverConfig(strategy, spec.iterations, spec.tolerance,
                              spec.strategy_seed(index), spec.trace_every)
        return run(system, x0, config, x_true=x_true, backend=backend)

    workers = thread_count(spec, threads)
    indices = range(len(spec.strategies))
    if workers == 1:
        results = [one(j) for j in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, indices))
    return system, {s.label: t for s, t in zip(spec.strategies, results)}


def parse_strategies(text, p=None):
    return tuple(SelectionStrategy.parse(name, p) for name in text.split(",") if name.strip())


def read_config(path):
    """Parse a ``key=value`` scenario file (``#`` starts a comment)."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return spec_from_mapping(values)


_INT_KEYS = {"n", "m", "seed", "iterations", "trace_every", "p"}
_FLOAT_KEYS = {"shift", "tolerance"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | {"kind", "strategies", "plot"}


def spec_from_mapping(values):
    unknown = set(values) - _KNOWN_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    kw = {}
    for key in _INT_KEYS & set(values):
        kw[key] = int(values[key])
    for key in _FLOAT_KEYS & set(values):
        kw[key] = float(values[key])
    p = kw.pop("p", None)
    if "kind" in values:
        kw["kind"] = Kind(values["kind"].lower())
    if kw.get("kind") is Kind.CHALLENGING:
        kw.pop("shift", None)
    kw["strategies"] = parse_strategies(values.get("strategies", ",".join(DEFAULT_STRATEGIES)), p)
    return ScenarioSpec(**kw)
