"""Kaczmarz iteration engine with stopping rules and per-step traces."""
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._accel import resolve_backend
from .errors import DimensionMismatch, NeedTwoRows
from .linalg import as_state, check_standardized
from .rng import SeededRng
from .selection import (
    RULE_CODES,
    Rule,
    SelectionStrategy,
    greedy_pick,
    pair_pick,
    tournament_pick,
    weighted_p_pick,
)


@dataclass(frozen=True)
class SolverConfig:
    strategy: SelectionStrategy
    max_iterations: int = 10_000
    tolerance: float = 0.0
    seed: int = 0
    trace_every: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance >= 0.0:
            raise ValueError("tolerance must be >= 0")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")


class StepRecord(NamedTuple):
    k: int
    selected_row: int
    residual_used: float
    residuals_evaluated: int
    error: float | None


@dataclass
class IterationTrace:
    """Recorded steps of one run.

    ``error[j]`` is ``||x_k - x_true||`` *before* step ``k = k_index[j]``, so
    ``error(k+1)**2 == error(k)**2 - residual_used(k)**2`` along a stride-1
    trace. ``step_counts`` holds the per-step residual count for every step,
    whatever the recording stride.
    """

    strategy: SelectionStrategy
    seed: int
    k_index: np.ndarray
    selected_row: np.ndarray
    residual_used: np.ndarray
    residuals_evaluated: np.ndarray
    error: np.ndarray
    step_counts: np.ndarray
    final_x: np.ndarray
    final_error: float | None
    converged: bool
    iterations: int
    check_evaluations: int
    backend: str = field(default="numpy", compare=False)

    @property
    def total_residual_evaluations(self):
        return int(self.step_counts.sum()) + self.check_evaluations

    @property
    def has_error(self):
        return self.final_error is not None

    def steps(self):
        for j in range(self.k_index.shape[0]):
            err = float(self.error[j]) if self.has_error else None
            yield StepRecord(int(self.k_index[j]), int(self.selected_row[j]),
                             float(self.residual_used[j]), int(self.residuals_evaluated[j]), err)

    def error_curve(self):
        """Recorded errors plus the error after the last step."""
        if not self.has_error:
            raise ValueError("trace has no error data (run without x_true)")
        return np.append(self.k_index, self.iterations), np.append(self.error, self.final_error)


def _validate(system, x0, config, x_true):
    check_standardized(system)
    x = as_state(x0, system.n)
    if x_true is not None:
        x_true = as_state(x_true, system.n)
        gap = np.max(np.abs(system.a @ x_true - system.b))
        if gap > 1e-8:
            raise ValueError(f"x_true is not a solution: ||A x_true - b||_inf = {gap:.3g}")
    if config.strategy.rule is Rule.TWO_SAMPLE and system.m < 2:
        raise NeedTwoRows("two-sample selection needs at least two rows")
    return x, x_true


def run(system, x0, config, x_true=None, backend=None):
    """Iterate from ``x0`` until ``config.max_iterations`` or the stopping check.

    Full-residual rules (weighted-p, greedy) stop as soon as
    ``max |r| <= tolerance``. The other rules check ``||b - A x||_inf`` every
    ``m`` steps (starting at step 0); those evaluations are tallied in
    ``check_evaluations``, not in the per-step counts.
    """
    if len(np.shape(x0)) != 1:
        raise DimensionMismatch("x0 must be a vector")
    x, x_true = _validate(system, x0, config, x_true)
    backend = resolve_backend(backend)
    rng = SeededRng(config.seed)
    m = system.m
    cap = (config.max_iterations + config.trace_every - 1) // config.trace_every
    rec_k = np.zeros(cap, dtype=np.int64)
    rec_row = np.zeros(cap, dtype=np.int64)
    rec_res = np.zeros(cap, dtype=np.float64)
    rec_cnt = np.zeros(cap, dtype=np.int64)
    rec_err = np.full(cap, np.nan)
    step_counts = np.zeros(config.max_iterations, dtype=np.int64)
    pool = np.arange(m, dtype=np.int64)
    has_true = x_true is not None
    xt = x_true if has_true else np.zeros(system.n)
    p = config.strategy.p or 0
    args = (system.a, system.b, x, xt, has_true, config.strategy.code, p,
            config.max_iterations, float(config.tolerance), config.trace_every, rng,
            pool, rec_k, rec_row, rec_res, rec_cnt, rec_err, step_counts)
    if backend == "numba":
        from . import _kernels
        steps, n_rec, converged, checks = _kernels.solve(*args[:10], rng.state, *args[11:])
    else:
        steps, n_rec, converged, checks = _solve_reference(*args)

    return IterationTrace(
        strategy=config.strategy,
        seed=config.seed,
        k_index=rec_k[:n_rec],
        selected_row=rec_row[:n_rec],
        residual_used=rec_res[:n_rec],
        residuals_evaluated=rec_cnt[:n_rec],
        error=rec_err[:n_rec],
        step_counts=step_counts[:steps],
        final_x=x,
        final_error=float(np.linalg.norm(x - x_true)) if has_true else None,
        converged=bool(converged),
        iterations=int(steps),
        check_evaluations=int(checks),
        backend=backend,
    )


def _solve_reference(a, b, x, x_true, has_true, code, p, max_iter, tol, trace_every, rng,
                     pool, rec_k, rec_row, rec_res, rec_cnt, rec_err, step_counts):
    rule = _RULE_BY_CODE[code]
    m = a.shape[0]

    def residual_of(j):
        return float(b[j] - a[j] @ x)

    n_rec = 0
    checks = 0
    converged = False
    k = 0
    while k < max_iter:
        if rule in (Rule.WEIGHTED_P, Rule.GREEDY):
            r = b - a @ x
            if np.max(np.abs(r)) <= tol:
                converged = True
                break
            i = greedy_pick(r) if rule is Rule.GREEDY else weighted_p_pick(r, p, rng)
            ri = float(r[i])
            cnt = m
        else:
            if k % m == 0:
                checks += m
                if np.max(np.abs(b - a @ x)) <= tol:
                    converged = True
                    break
            if rule is Rule.PARTIAL:
                i, ri, cnt = tournament_pick(residual_of, m, rng, pool)
            elif rule is Rule.TWO_SAMPLE:
                i, ri, cnt = pair_pick(residual_of, m, rng, pool)
            else:
                i = k % m if rule is Rule.CYCLIC else rng.uniform_index(m) - 1
                ri = residual_of(i)
                cnt = 1
        if k % trace_every == 0:
            rec_k[n_rec] = k
            rec_row[n_rec] = i + 1
            rec_res[n_rec] = ri
            rec_cnt[n_rec] = cnt
            rec_err[n_rec] = np.linalg.norm(x - x_true) if has_true else np.nan
            n_rec += 1
        step_counts[k] = cnt
        x += ri * a[i]
        k += 1
    return k, n_rec, converged, checks


_RULE_BY_CODE = {code: rule for rule, code in RULE_CODES.items()}


def residual_count_histogram(trace, first=None, fill=False):
    """Frequency of per-step residual counts over the first ``first`` steps.

    With ``fill=True`` every count between the smallest and largest observed
    one gets an entry, zero if it never occurred.
    """
    counts = trace.step_counts if first is None else trace.step_counts[:first]
    hist = Counter(int(c) for c in counts)
    if fill and hist:
        hist = {c: hist.get(c, 0) for c in range(min(hist), max(hist) + 1)}
    return dict(sorted(hist.items()))


def format_count_table(hist):
    """Two aligned rows: ``# residuals`` and ``freq``."""
    keys = [str(k) for k in hist]
    vals = [str(v) for v in hist.values()]
    widths = [max(len(k), len(v)) for k, v in zip(keys, vals)]
    head = "# residuals | " + "  ".join(k.rjust(w) for k, w in zip(keys, widths))
    body = "freq        | " + "  ".join(v.rjust(w) for v, w in zip(vals, widths))
    return head + "\n" + body
