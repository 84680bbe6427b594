"""Time the numba kernels against the pure-numpy reference path.

    python benchmarks/bench_backends.py --n 1000 --iters 10000

Both backends run the same seeded problem, so besides the timings the script
checks that they pick the same rows. Kernels are compiled before timing.
"""
import argparse
import time

import numpy as np

from kaczmarz_lab._accel import HAVE_NUMBA
from kaczmarz_lab.experiments import ScenarioSpec, build_system, parse_strategies
from kaczmarz_lab.rng import SeededRng
from kaczmarz_lab.solver import SolverConfig, run


def best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n=1000, iters=10_000, shift=100.0, seed=42, strategies="cyclic,uniform,partial,two-sample,greedy",
          normals=1_000_000, repeat=3):
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    spec = ScenarioSpec(n=n, shift=shift, seed=seed, iterations=iters, strategies=parse_strategies(strategies))
    system = build_system(spec)
    x0, xt = np.ones(n), np.zeros(n)
    rows = []

    for be in backends:  # warm-up / compile
        SeededRng(0).standard_normal(8, backend=be)
    timings = {be: best_of(lambda: SeededRng(seed).standard_normal(normals, backend=be), repeat)
               for be in backends}
    draws = [t[1] for t in timings.values()]
    rows.append((f"normals x{normals}", timings, all(np.allclose(d, draws[0], rtol=1e-12) for d in draws)))

    for j, strategy in enumerate(spec.strategies):
        config = SolverConfig(strategy, iters, seed=spec.strategy_seed(j), trace_every=iters)
        for be in backends:
            run(system, x0, SolverConfig(strategy, 3, seed=0), x_true=xt, backend=be)
        timings = {be: best_of(lambda: run(system, x0, config, x_true=xt, backend=be), repeat)
                   for be in backends}
        finals = [t[1].final_error for t in timings.values()]
        rows.append((strategy.label, timings, bool(np.allclose(finals, finals[0], rtol=1e-6))))
    return backends, rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--iters", type=int, default=10_000)
    ap.add_argument("--shift", type=float, default=100.0)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--strategies", default="cyclic,uniform,partial,two-sample,greedy")
    ap.add_argument("--normals", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends, rows = bench(args.n, args.iters, args.shift, args.seed, args.strategies, args.normals, args.repeat)
    print(f"n={args.n} iters={args.iters} best of {args.repeat}")
    print(f"{'case':>18} " + " ".join(f"{be:>10}" for be in backends) + "    speedup  agree")
    for label, timings, same in rows:
        secs = [timings[be][0] for be in backends]
        speed = f"{secs[-1] / secs[0]:9.1f}x" if len(secs) == 2 else "        -"
        print(f"{label:>18} " + " ".join(f"{s:9.4f}s" for s in secs) + f"  {speed}  {'yes' if same else 'NO'}")
    return rows


if __name__ == "__main__":
    main()
