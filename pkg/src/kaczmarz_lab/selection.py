"""Row-selection rules.

Every rule maps ``(system, x, rng)`` to a :class:`SelectionOutcome` carrying
the chosen 1-based row and the number of residual entries it had to
evaluate. These functions are the reference implementation; the numba
kernels in ``_kernels`` reproduce them inside the solver loop.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import Converged, NeedTwoRows
from .linalg import full_residual


class Rule(enum.Enum):
    CYCLIC = "cyclic"
    UNIFORM = "uniform"
    WEIGHTED_P = "weighted-p"
    GREEDY = "greedy"
    PARTIAL = "partial"
    TWO_SAMPLE = "two-sample"


# integer codes shared with the numba kernels
RULE_CODES = {
    Rule.CYCLIC: 0,
    Rule.UNIFORM: 1,
    Rule.WEIGHTED_P: 2,
    Rule.GREEDY: 3,
    Rule.PARTIAL: 4,
    Rule.TWO_SAMPLE: 5,
}


@dataclass(frozen=True)
class SelectionStrategy:
    rule: Rule
    p: int | None = None

    def __post_init__(self):
        rule = Rule(self.rule)
        object.__setattr__(self, "rule", rule)
        if rule is Rule.WEIGHTED_P:
            if self.p is None or int(self.p) != self.p or self.p < 1:
                raise ValueError(f"weighted-p needs an integer exponent p >= 1, got {self.p!r}")
            object.__setattr__(self, "p", int(self.p))
        elif self.p is not None:
            raise ValueError(f"exponent p only applies to weighted-p, not {rule.value}")

    @classmethod
    def parse(cls, name, p=None):
        """Build from a CLI name such as ``partial`` or ``weighted-p``."""
        rule = Rule(name.strip())
        return cls(rule, p if rule is Rule.WEIGHTED_P else None)

    @property
    def name(self):
        return self.rule.value

    @property
    def label(self):
        if self.rule is Rule.WEIGHTED_P:
            return f"weighted-p{self.p}"
        return self.rule.value

    @property
    def code(self):
        return RULE_CODES[self.rule]

    @property
    def uses_full_residual(self):
        return self.rule in (Rule.WEIGHTED_P, Rule.GREEDY)


@dataclass(frozen=True)
class SelectionOutcome:
    row: int
    residuals_evaluated: int
    residual_at_row: float | None = None


def _residual0(system, x, j):
    return float(system.b[j] - system.a[j] @ x)


def _draw_from_pool(rng, pool, size):
    """Uniform pick among ``pool[:size]``; the pick is swapped to ``pool[size-1]``."""
    j = rng.uniform_index(size) - 1
    row = pool[j]
    pool[j] = pool[size - 1]
    pool[size - 1] = row
    return int(row)


def _new_pool(m, pool):
    if pool is None:
        return np.arange(m, dtype=np.int64)
    if pool.shape[0] != m:
        raise ValueError("pool must hold a permutation of 0..m-1")
    return pool


def select_cyclic(k, m):
    return SelectionOutcome(row=(int(k) % int(m)) + 1, residuals_evaluated=0)


def select_uniform(rng, m):
    return SelectionOutcome(row=rng.uniform_index(m), residuals_evaluated=0)


def residual_weights(residuals, p):
    """Unnormalized ``|r_i|**p``, scaled by ``max |r|**p`` to avoid overflow."""
    mag = np.abs(np.asarray(residuals, dtype=np.float64))
    top = mag.max()
    w = np.zeros_like(mag)
    nz = mag > 0.0
    w[nz] = np.exp(p * (np.log(mag[nz]) - np.log(top)))
    return w


def weighted_p_pick(residuals, p, rng):
    """Inverse-CDF draw (0-based) over ``|r|**p`` weights in row order."""
    w = residual_weights(residuals, p)
    total = w.sum()
    target = rng.uniform_real() * total
    acc = 0.0
    last = 0
    for i in range(w.shape[0]):
        if w[i] > 0.0:
            acc += w[i]
            last = i
            if acc > target:
                return i
    return last


def greedy_pick(residuals):
    """Smallest index attaining ``max |r|`` (0-based)."""
    return int(np.argmax(np.abs(residuals)))


def select_weighted_p(system, x, p, rng, tolerance=0.0):
    r = full_residual(system, x)
    if np.max(np.abs(r)) <= tolerance:
        raise Converged(f"max |r| <= {tolerance}")
    i = weighted_p_pick(r, p, rng)
    return SelectionOutcome(row=i + 1, residuals_evaluated=system.m, residual_at_row=float(r[i]))


def select_greedy(system, x):
    r = full_residual(system, x)
    i = greedy_pick(r)
    return SelectionOutcome(row=i + 1, residuals_evaluated=system.m, residual_at_row=float(r[i]))


def tournament_pick(residual_of, m, rng, pool):
    """Candidate/competitor tournament over rows drawn without replacement.

    ``residual_of(j)`` is called exactly once per drawn row. The candidate is
    kept only if its ``|r|`` strictly beats the competitor's; otherwise the
    competitor takes over. The last remaining row is selected unconditionally.
    Returns ``(row0, residual, count)``.
    """
    size = m
    cand = _draw_from_pool(rng, pool, size)
    size -= 1
    r_cand = residual_of(cand)
    count = 1
    while size > 0:
        comp = _draw_from_pool(rng, pool, size)
        size -= 1
        r_comp = residual_of(comp)
        count += 1
        if abs(r_cand) > abs(r_comp):
            return cand, r_cand, count
        cand, r_cand = comp, r_comp
    return cand, r_cand, count


def pair_pick(residual_of, m, rng, pool):
    """Two distinct uniform rows; larger ``|r|`` wins, ties go to the second draw."""
    first = _draw_from_pool(rng, pool, m)
    second = _draw_from_pool(rng, pool, m - 1)
    r1 = residual_of(first)
    r2 = residual_of(second)
    if abs(r1) > abs(r2):
        return first, r1, 2
    return second, r2, 2


def select_partially_weighted(system, x, rng, pool=None):
    pool = _new_pool(system.m, pool)
    row, r, count = tournament_pick(lambda j: _residual0(system, x, j), system.m, rng, pool)
    return SelectionOutcome(row=row + 1, residuals_evaluated=count, residual_at_row=r)


def select_two_sample(system, x, rng, pool=None):
    if system.m < 2:
        raise NeedTwoRows("two-sample selection needs at least two rows")
    pool = _new_pool(system.m, pool)
    row, r, count = pair_pick(lambda j: _residual0(system, x, j), system.m, rng, pool)
    return SelectionOutcome(row=row + 1, residuals_evaluated=count, residual_at_row=r)

