"""Acceptance suite: one test per release criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with ``pytest -v``
or ``-s``) before asserting, so a run of this module doubles as a report.
Run it alone with ``pytest tests/test_acceptance.py -v`` or as a script.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from kaczmarz_lab.experiments import ScenarioSpec, gaussian_matrix, parse_strategies, run_scenario
from kaczmarz_lab.linalg import DenseSystem, standardize
from kaczmarz_lab.oracle import (
    check_proposition,
    partially_weighted_probabilities,
    random_instance,
    sample_selection_frequencies,
    tournament_count_law,
)
from kaczmarz_lab.rng import SeededRng
from kaczmarz_lab.selection import Rule, SelectionStrategy
from kaczmarz_lab.solver import SolverConfig, run

ALL_RULES = [("cyclic", None), ("uniform", None), ("partial", None), ("two-sample", None),
             ("weighted-p", 1), ("weighted-p", 2), ("weighted-p", 5), ("weighted-p", 20),
             ("greedy", None)]


def report(capsys, number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _warm():
    # compile the kernels once so the timed sections measure the work, not numba
    system = DenseSystem(np.eye(3), np.array([3.0, 2.0, 1.0]))
    for name, p in ALL_RULES:
        run(system, np.zeros(3), SolverConfig(SelectionStrategy.parse(name, p), 5), x_true=system.b)
    sample_selection_frequencies(system, np.zeros(3), SelectionStrategy(Rule.PARTIAL), 10, 0)
    SeededRng(0).standard_normal(4)


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    _warm()


def known_solution_system(m=200, n=100, seed=2024):
    rng = SeededRng(seed)
    g = standardize(gaussian_matrix(m, n, rng))
    x_true = rng.standard_normal(n)
    return DenseSystem(g.a, g.a @ x_true), x_true


def test_criterion_1_proposition(capsys):
    t0 = time.perf_counter()
    res = check_proposition(systems=100, exponents=(1, 2, 5, 20))
    dt = time.perf_counter() - t0
    ok = res.passed and "400 instances" in res.detail and dt < 5.0
    report(capsys, 1, ok, f"greedy <= weighted-p exactly, {res.detail}, {dt:.2f}s (< 5s)")
    assert ok


def test_criterion_2_step_decrement(capsys):
    system, x_true = known_solution_system()
    t0 = time.perf_counter()
    trace = run(system, np.zeros(system.n), SolverConfig(SelectionStrategy.parse("uniform"), 10_000, seed=7),
                x_true=x_true)
    dt = time.perf_counter() - t0
    e = np.append(trace.error, trace.final_error)
    rel = np.abs(e[1:] ** 2 - (e[:-1] ** 2 - trace.residual_used ** 2)) / e[:-1] ** 2
    ok = trace.iterations == 10_000 and rel.max() <= 1e-9 and dt < 5.0
    report(capsys, 2, ok, f"200x100, known x, uniform, 10^4 steps: max relative deviation "
                          f"{rel.max():.2e} (<= 1e-9), final error {e[-1]:.2e}, {dt:.2f}s (< 5s)")
    assert ok


def test_criterion_2_all_rules_homogeneous(capsys):
    # b = 0 keeps every rule clear of the rounding floor for all 10^4 steps
    system, _ = known_solution_system()
    system = DenseSystem(system.a, np.zeros(system.m))
    x0 = SeededRng(99).standard_normal(system.n)
    worst = {}
    for name, p in ALL_RULES:
        strategy = SelectionStrategy.parse(name, p)
        trace = run(system, x0, SolverConfig(strategy, 10_000, seed=7), x_true=np.zeros(system.n))
        e = np.append(trace.error, trace.final_error)
        rel = np.abs(e[1:] ** 2 - (e[:-1] ** 2 - trace.residual_used ** 2)) / e[:-1] ** 2
        worst[strategy.label] = float(rel.max())
    ok = max(worst.values()) <= 1e-9
    report(capsys, 2, ok, f"same identity for every rule on b = 0: max relative deviation "
                          f"{max(worst.values()):.2e} (<= 1e-9)")
    assert ok


def test_criterion_3_tournament_distribution(capsys):
    t0 = time.perf_counter()
    trials = 1_000_000
    known = DenseSystem(np.eye(3), np.array([3.0, 2.0, 1.0]))
    exact, _ = partially_weighted_probabilities(known, np.zeros(3))
    exact_ok = bool(np.allclose(exact, [5 / 6, 1 / 6, 0.0], rtol=0, atol=1e-15))

    rng = SeededRng(31337)
    cases = [(known, np.zeros(3))]
    for _ in range(12):
        m = 1 + rng.uniform_index(5)
        n = rng.uniform_index(min(m, 4))
        system, x, _ = random_instance(rng, m, n)
        cases.append((system, x))
    worst_z, rows = 0.0, 0
    for j, (system, x) in enumerate(cases):
        prob, _ = partially_weighted_probabilities(system, x)
        freq, _ = sample_selection_frequencies(system, x, SelectionStrategy(Rule.PARTIAL), trials, 500 + j)
        se = np.sqrt(prob * (1 - prob) / trials)
        dev = np.abs(freq / trials - prob)
        # rows of probability 0 or 1 must be hit never or always
        sure = se == 0
        z = np.where(sure, np.where(dev > 0, np.inf, 0.0), dev / np.where(sure, 1.0, se))
        worst_z = max(worst_z, float(z.max()))
        rows += system.m
    dt = time.perf_counter() - t0
    ok = exact_ok and worst_z <= 3.0 and dt < 30.0
    report(capsys, 3, ok, f"(3,2,1) -> (5/6,1/6,0) exact={exact_ok}; {len(cases)} systems m<=6, "
                          f"{rows} rows, 10^6 trials each, max |z| {worst_z:.2f} (<= 3), {dt:.1f}s (< 30s)")
    assert ok


def count_shape(kind, seed, iterations):
    spec = ScenarioSpec(kind=kind, n=1000, shift=100.0, seed=seed, iterations=iterations,
                        strategies=parse_strategies("partial"), trace_every=iterations)
    _, traces = run_scenario(spec)
    c = traces["partial"].step_counts
    assert c.size == iterations
    return float(np.mean(c == 2)), float(c.mean()), int(c.max())


def test_criterion_4_residual_count_shape(capsys):
    t0 = time.perf_counter()
    rows = []
    for kind, iterations in (("nice", 10_000), ("challenging", 20_000)):
        for seed in (42, 43, 44):
            rows.append((kind, seed, *count_shape(kind, seed, iterations)))
    dt = time.perf_counter() - t0
    ok = dt < 180.0 and all(0.40 <= s2 <= 0.60 and 2.5 <= mean <= 3.0 and mx <= 15 for _, _, s2, mean, mx in rows)
    shares = [r[2] for r in rows]
    means = [r[3] for r in rows]
    report(capsys, 4, ok, f"6 runs (nice/challenging x 3 seeds): share(2) in [{min(shares):.4f}, "
                          f"{max(shares):.4f}], mean in [{min(means):.4f}, {max(means):.4f}], "
                          f"max count {max(r[4] for r in rows)}, {dt:.1f}s (< 180s)")
    assert ok


@pytest.mark.slow
def test_criterion_5_error_ordering(capsys):
    t0 = time.perf_counter()
    medians = {}
    for kind in ("nice", "challenging"):
        finals = {"uniform": [], "partial": [], "greedy": []}
        for seed in (1, 2, 3, 4, 5):
            spec = ScenarioSpec(kind=kind, n=1000, shift=100.0, seed=seed,
                                strategies=parse_strategies("uniform,partial,greedy"), trace_every=1000)
            _, traces = run_scenario(spec)
            for label in finals:
                finals[label].append(traces[label].final_error)
        medians[kind] = {label: float(np.median(v)) for label, v in finals.items()}
    dt = time.perf_counter() - t0
    nice, hard = medians["nice"], medians["challenging"]
    ok = (nice["greedy"] < nice["partial"] < nice["uniform"]
          and nice["uniform"] >= 10 * nice["greedy"]
          and hard["greedy"] <= hard["partial"] <= hard["uniform"]
          and dt < 600.0)
    fmt = lambda d: ", ".join(f"{k} {v:.3e}" for k, v in d.items())  # noqa: E731
    report(capsys, 5, ok, f"median final error nice: {fmt(nice)} (uniform/greedy "
                          f"{nice['uniform'] / nice['greedy']:.0f}x); challenging: {fmt(hard)}; {dt:.1f}s (< 600s)")
    assert ok


def test_criterion_6_annihilation_and_no_repeat(capsys):
    system, x_true = known_solution_system()
    a, b = system.a, system.b
    # below this the iterate solves the system to working precision
    floor = 1e-12 * (1.0 + np.abs(b).max())
    worst_post, repeats, checked = 0.0, 0, 0
    for name, p in ALL_RULES:
        strategy = SelectionStrategy.parse(name, p)
        trace = run(system, np.zeros(system.n), SolverConfig(strategy, 10_000, seed=11), x_true=x_true)
        x = np.zeros(system.n)
        rows = trace.selected_row - 1
        for k in range(trace.iterations):
            i = rows[k]
            r = b[i] - a[i] @ x
            assert r == pytest.approx(trace.residual_used[k], rel=1e-9, abs=1e-13)
            if strategy.uses_full_residual and k > 0 and i == rows[k - 1]:
                if np.abs(b - a @ x).max() > floor:
                    repeats += 1
            x = x + r * a[i]
            worst_post = max(worst_post, abs(b[i] - a[i] @ x) / (1.0 + abs(b[i])))
            checked += 1
        np.testing.assert_allclose(x, trace.final_x, rtol=0, atol=1e-10)
    ok = worst_post <= 1e-10 and repeats == 0
    report(capsys, 6, ok, f"{checked} replayed steps over {len(ALL_RULES)} rules: max post-update "
                          f"|r_i|/(1+|b_i|) {worst_post:.2e} (<= 1e-10); weighted-p/greedy repeats "
                          f"before convergence: {repeats}")
    assert ok


def _compare(out, threads):
    env = dict(os.environ)
    if threads is None:
        env.pop("KACZMARZ_LAB_THREADS", None)
    else:
        env["KACZMARZ_LAB_THREADS"] = str(threads)
    cmd = [sys.executable, "-m", "kaczmarz_lab.cli", "compare", "--scenario", "nice", "--n", "1000",
           "--shift", "100", "--iters", "10000", "--seed", "42",
           "--strategies", "uniform,partial,two-sample,greedy", "--out", str(out), "--plot"]
    subprocess.run(cmd, env=env, check=True, capture_output=True)
    return {name: (out / name).read_bytes() for name in sorted(os.listdir(out))}


def test_criterion_7_golden_determinism(tmp_path, capsys):
    first = _compare(tmp_path / "first", None)
    second = _compare(tmp_path / "second", None)
    serial = _compare(tmp_path / "serial", 1)
    csvs = [n for n in first if n.endswith(".csv")]
    ok = (len(csvs) == 5 and first == second == serial)
    report(capsys, 7, ok, f"compare --seed 42 (nice, 10^4 steps): {len(first)} files byte-identical across "
                          f"2 invocations and KACZMARZ_LAB_THREADS=1 vs default")
    assert ok


def test_criterion_8_mean_count_limit(capsys):
    m, trials = 1000, 100_000
    residuals = SeededRng(8).standard_normal(m)
    system = DenseSystem(np.eye(m), residuals)
    _, counts = sample_selection_frequencies(system, np.zeros(m), SelectionStrategy(Rule.PARTIAL), trials, 88)
    mean = float(np.arange(counts.size) @ counts) / trials
    law_mean = sum(c * q for c, q in tournament_count_law(m).items())
    ok = counts.sum() == trials and 2.6 <= mean <= 2.85
    report(capsys, 8, ok, f"m=1000 continuous residuals, 10^5 trials: mean count {mean:.4f} in [2.6, 2.85] "
                          f"(exact law {law_mean:.6f}, e = {math.e:.6f})")
    assert ok


if __name__ == "__main__":
    import pathlib
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        _warm()
        failed = 0
        for test in (test_criterion_1_proposition, test_criterion_2_step_decrement,
                     test_criterion_2_all_rules_homogeneous, test_criterion_3_tournament_distribution,
                     test_criterion_4_residual_count_shape, test_criterion_5_error_ordering,
                     test_criterion_6_annihilation_and_no_repeat,
                     lambda _: test_criterion_7_golden_determinism(pathlib.Path(tmp), None),
                     test_criterion_8_mean_count_limit):
            try:
                test(None)
            except AssertionError:
                failed += 1
        sys.exit(1 if failed else 0)
