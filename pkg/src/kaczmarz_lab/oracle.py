"""Exact one-step expectations, computed by enumeration rather than sampling.

Everything here is conditional on the current iterate ``x``: a row ``i`` drawn
with probability ``prob[i]`` moves the squared error from ``||d||**2`` to
``||d||**2 - <a_i, d>**2`` where ``d = x - x_true``.
"""
import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._accel import resolve_backend
from .errors import InvalidDistribution, NotASolution, TooLarge, ZeroResidual
from .linalg import DenseSystem, check_standardized, full_residual, kaczmarz_update, standardize
from .rng import SeededRng, derived_seed
from .selection import RULE_CODES, Rule, residual_weights, select_partially_weighted

MAX_ENUMERATION_ROWS = 10
SUITE_SEED = 20240611


@dataclass(frozen=True)
class ExpectationReport:
    strategy_label: str
    exact_probabilities: np.ndarray
    expected_sq_error: float
    enumerated_sq_error: float
    max_decrement_row: int  # 1-based


def _check_distribution(prob, m):
    prob = np.asarray(prob, dtype=np.float64).reshape(-1)
    if prob.shape[0] != m:
        raise InvalidDistribution(f"need {m} probabilities, got {prob.shape[0]}")
    if np.any(prob < 0) or not np.isfinite(prob).all() or abs(prob.sum() - 1.0) > 1e-9:
        raise InvalidDistribution("probabilities must be non-negative and sum to 1")
    return prob


def exact_step_expectation(system, x, x_true, probabilities, label="custom"):
    """Closed-form and enumerated ``E ||x_next - x_true||**2`` for one step."""
    check_standardized(system)
    x = np.asarray(x, dtype=np.float64)
    x_true = np.asarray(x_true, dtype=np.float64)
    if np.max(np.abs(system.a @ x_true - system.b)) > 1e-9:
        raise NotASolution("x_true does not solve the system")
    prob = _check_distribution(probabilities, system.m)

    d = x - x_true
    proj = system.a @ d
    closed = float(d @ d - prob @ (proj * proj))

    r = full_residual(system, x)
    enumerated = 0.0
    for i in range(system.m):
        if prob[i] == 0.0:
            continue
        d_next = kaczmarz_update(x, system.a[i], r[i]) - x_true
        enumerated += prob[i] * float(d_next @ d_next)
    if abs(closed - enumerated) > 1e-10 * max(1.0, float(d @ d)):
        raise ArithmeticError(f"closed form {closed!r} disagrees with enumeration {enumerated!r}")

    return ExpectationReport(
        strategy_label=label,
        exact_probabilities=prob,
        expected_sq_error=closed,
        enumerated_sq_error=enumerated,
        max_decrement_row=int(np.argmax(np.abs(proj))) + 1,
    )


def weighted_p_probabilities(system, x, p):
    r = full_residual(system, x)
    if not np.any(r != 0.0):
        raise ZeroResidual("residual vector is zero")
    w = residual_weights(r, p)
    return w / w.sum()


def greedy_probabilities(system, x):
    r = full_residual(system, x)
    prob = np.zeros(system.m)
    prob[int(np.argmax(np.abs(r)))] = 1.0
    return prob


def tournament_distribution(magnitudes):
    """Exact selection law and expected draw count of the candidate/competitor tournament.

    Walks every draw sequence; sequences sharing (candidate, remaining rows)
    are merged, which keeps the walk at ``m * 2**(m-1)`` states.
    Returns ``(probabilities, expected_count)``.
    """
    mag = [abs(float(v)) for v in magnitudes]
    m = len(mag)
    if m > MAX_ENUMERATION_ROWS:
        raise TooLarge(f"exact enumeration limited to m <= {MAX_ENUMERATION_ROWS}, got {m}")

    @lru_cache(maxsize=None)
    def settle(cand, remaining):
        # remaining: bitmask of undrawn rows; returns (distribution tuple, expected further draws)
        rows = [j for j in range(m) if remaining >> j & 1]
        if not rows:
            out = [0.0] * m
            out[cand] = 1.0
            return tuple(out), 0.0
        out = [0.0] * m
        more = 1.0
        share = 1.0 / len(rows)
        for comp in rows:
            if mag[cand] > mag[comp]:
                out[cand] += share
            else:
                sub, sub_more = settle(comp, remaining & ~(1 << comp))
                for j in range(m):
                    out[j] += share * sub[j]
                more += share * sub_more
        return tuple(out), more

    full = (1 << m) - 1
    prob = np.zeros(m)
    expected = 0.0
    for first in range(m):
        sub, more = settle(first, full & ~(1 << first))
        prob += np.array(sub) / m
        expected += (1.0 + more) / m
    return prob, expected


def partially_weighted_probabilities(system, x):
    """Exact selection probabilities of the tournament rule at state ``x``.

    Returns ``(probabilities, expected_residuals_evaluated)``.
    """
    if system.m > MAX_ENUMERATION_ROWS:
        raise TooLarge(f"exact enumeration limited to m <= {MAX_ENUMERATION_ROWS}, got {system.m}")
    return tournament_distribution(full_residual(system, x))


def two_sample_probabilities(system, x):
    """Exact law of the size-two sample rule (ties go to the second draw)."""
    mag = np.abs(full_residual(system, x))
    m = system.m
    prob = np.zeros(m)
    for i in range(m):
        for j in range(m):
            if i != j:
                prob[i if mag[i] > mag[j] else j] += 1.0 / (m * (m - 1))
    return prob


def tournament_count_law(m):
    """Residual-count law of the tournament for distinct exchangeable magnitudes.

    The count is ``c`` when the first ``c - 1`` drawn magnitudes increase and
    the ``c``-th falls, so ``P(count > c) = 1/c!`` for ``1 <= c < m``.
    """
    if m == 1:
        return {1: 1.0}
    # tail[c] = 1/c!, built by division so large m underflows quietly to 0
    tail = [1.0]
    for c in range(1, m):
        tail.append(tail[-1] / c)
    law = {c: tail[c - 1] - tail[c] for c in range(2, m)}
    law[m] = tail[m - 1]
    return law


def verify_proposition(system, x, x_true, p=None, probabilities=None):
    """Check ``E_greedy ||d_next||**2 <= E_other ||d_next||**2``.

    The comparison distribution is the ``|r|**p`` law unless ``probabilities``
    is given. Returns ``(holds, greedy_report, other_report)``.
    """
    if probabilities is None:
        if p is None:
            raise ValueError("give either p or probabilities")
        probabilities = weighted_p_probabilities(system, x, p)
        label = f"weighted-p{p}"
    else:
        label = "custom"
    other = exact_step_expectation(system, x, x_true, probabilities, label=label)
    greedy = exact_step_expectation(system, x, x_true, greedy_probabilities(system, x), label="greedy")
    return greedy.expected_sq_error <= other.expected_sq_error + 1e-12, greedy, other


# --------------------------------------------------------------------------
# verification suite (the ``verify`` subcommand)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_instance(rng, m, n):
    """Standardized consistent system with a Gaussian solution and iterate."""
    a = rng.standard_normal(m * n).reshape(m, n)
    x_true = rng.standard_normal(n)
    system = standardize(DenseSystem(a, a @ x_true))
    x = rng.standard_normal(n)
    return system, x, x_true


def check_proposition(seed=SUITE_SEED, systems=100, exponents=(1, 2, 5, 20)):
    rng = SeededRng(seed)
    instances = 0
    failures = 0
    worst_gap = math.inf
    for _ in range(systems):
        m = rng.uniform_index(8)
        n = rng.uniform_index(min(m, 5))
        system, x, x_true = random_instance(rng, m, n)
        for p in exponents:
            ok, greedy, other = verify_proposition(system, x, x_true, p=p)
            instances += 1
            failures += not ok
            worst_gap = min(worst_gap, other.expected_sq_error - greedy.expected_sq_error)
    return CheckResult(
        "proposition: greedy <= weighted-p",
        failures == 0 and systems >= 100,
        f"{instances} instances over {systems} systems, {failures} failures, min gap {worst_gap:.3e}",
    )


def check_any_distribution(seed=SUITE_SEED + 1, systems=100):
    rng = SeededRng(seed)
    failures = 0
    for _ in range(systems):
        m = rng.uniform_index(8)
        n = rng.uniform_index(min(m, 5))
        system, x, x_true = random_instance(rng, m, n)
        w = -np.log(1.0 - np.array([rng.uniform_real() for _ in range(m)]))
        ok, _, _ = verify_proposition(system, x, x_true, probabilities=w / w.sum())
        failures += not ok
    return CheckResult("proposition: greedy <= arbitrary distribution", failures == 0,
                       f"{systems} systems, {failures} failures")


def check_closed_form(seed=SUITE_SEED + 2, systems=200):
    rng = SeededRng(seed)
    worst = 0.0
    for _ in range(systems):
        m = rng.uniform_index(8)
        n = rng.uniform_index(min(m, 5))
        system, x, x_true = random_instance(rng, m, n)
        prob = np.full(m, 1.0 / m)
        rep = exact_step_expectation(system, x, x_true, prob)
        worst = max(worst, abs(rep.expected_sq_error - rep.enumerated_sq_error))
    return CheckResult("closed form == enumeration", bool(worst <= 1e-10), f"max |diff| {worst:.3e}")


def check_known_tournament():
    system = DenseSystem(np.eye(3), np.array([3.0, 2.0, 1.0]))
    prob, expected = partially_weighted_probabilities(system, np.zeros(3))
    ok = np.allclose(prob, [5 / 6, 1 / 6, 0.0], rtol=0, atol=1e-15)
    return CheckResult("tournament |r|=(3,2,1) -> (5/6, 1/6, 0)", bool(ok),
                       f"got {np.round(prob, 12).tolist()}, expected count {expected:.6f}")


def sample_selection_frequencies(system, x, strategy, trials, seed, backend=None):
    """Empirical row and residual-count frequencies of one randomized rule at fixed ``x``."""
    rng = SeededRng(seed)
    m = system.m
    rows = np.zeros(m, dtype=np.int64)
    counts = np.zeros(m + 1, dtype=np.int64)
    pool = np.arange(m, dtype=np.int64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if resolve_backend(backend) == "numba":
        from ._kernels import sample_rows
        sample_rows(system.a, system.b, x, RULE_CODES[strategy.rule], strategy.p or 0,
                    trials, rng.state, pool, rows, counts)
        return rows, counts
    if strategy.rule is not Rule.PARTIAL:
        raise NotImplementedError("reference sampler covers the tournament rule only")
    for _ in range(trials):
        out = select_partially_weighted(system, x, rng, pool)
        rows[out.row - 1] += 1
        counts[out.residuals_evaluated] += 1
    return rows, counts


def check_sampling_consistency(seed=SUITE_SEED + 3, systems=5, trials=200_000):
    from .selection import SelectionStrategy

    rng = SeededRng(seed)
    worst_z = 0.0
    for s in range(systems):
        m = 2 + rng.uniform_index(5)
        n = rng.uniform_index(min(m, 4))
        system, x, _ = random_instance(rng, m, n)
        exact, _ = partially_weighted_probabilities(system, x)
        freq, _ = sample_selection_frequencies(system, x, SelectionStrategy(Rule.PARTIAL), trials,
                                               derived_seed(seed, s + 1))
        se = np.sqrt(np.maximum(exact * (1 - exact), 1e-300) / trials)
        z = np.abs(freq / trials - exact) / se
        z[exact == 0] = np.where(freq[exact == 0] > 0, np.inf, 0.0)
        worst_z = max(worst_z, float(z.max()))
    return CheckResult("tournament sampling matches enumeration", worst_z <= 3.0,
                       f"{systems} systems x {trials} trials, max |z| {worst_z:.2f}")


def check_step_identity(seed=SUITE_SEED + 4, steps=2_000):
    """Per-step decrement on a homogeneous system (``b = 0``, so no rounding floor)."""
    from .selection import SelectionStrategy
    from .solver import SolverConfig, run

    rng = SeededRng(seed)
    system, x0, _ = random_instance(rng, 60, 30)
    system = DenseSystem(system.a, np.zeros(system.m))
    worst = 0.0
    for rule in Rule:
        strategy = SelectionStrategy(rule, 2 if rule is Rule.WEIGHTED_P else None)
        trace = run(system, x0, SolverConfig(strategy, steps, seed=seed), x_true=np.zeros(system.n))
        e2 = trace.error ** 2
        pred = e2[:-1] - trace.residual_used[:-1] ** 2
        worst = max(worst, float(np.max(np.abs(e2[1:] - pred) / e2[:-1])))
    return CheckResult("per-step error identity", worst <= 1e-9, f"max relative deviation {worst:.3e}")


def run_suite(seed=SUITE_SEED):
    checks = [
        lambda: check_proposition(seed),
        lambda: check_any_distribution(seed + 1),
        lambda: check_closed_form(seed + 2),
        check_known_tournament,
        lambda: check_sampling_consistency(seed + 3),
        lambda: check_step_identity(seed + 4),
    ]
    results = []
    for check in checks:
        t0 = time.perf_counter()
        res = check()
        results.append(CheckResult(res.name, res.passed, f"{res.detail} ({time.perf_counter() - t0:.2f}s)"))
    return results
