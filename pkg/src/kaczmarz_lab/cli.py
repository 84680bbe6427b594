"""``kaczmarz-lab`` command line front end."""
import argparse
import os
import sys

from . import __version__
from ._accel import resolve_backend
from .experiments import (
    DEFAULT_STRATEGIES,
    Kind,
    ScenarioSpec,
    parse_strategies,
    read_config,
    run_scenario,
)
from .oracle import run_suite
from .report import comparison_csv, comparison_svg, counts_csv, header_lines, trace_csv
from .selection import Rule
from .solver import format_count_table, residual_count_histogram


class CommandError(Exception):
    pass


def _write(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _prepare_out(out):
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise CommandError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise CommandError(f"output directory {out} is not writable")


def spec_from_args(args, default_strategies=DEFAULT_STRATEGIES):
    kind = Kind(args.scenario)
    kw = dict(kind=kind, n=args.n, seed=args.seed, tolerance=args.tolerance, trace_every=args.trace_every)
    if args.m is not None:
        kw["m"] = args.m
    if args.shift is not None:
        kw["shift"] = args.shift
    if args.iters is not None:
        kw["iterations"] = args.iters
    names = args.strategies or ",".join(default_strategies)
    kw["strategies"] = parse_strategies(names, args.p)
    return ScenarioSpec(**kw)


def cmd_compare(spec, out, plot, threads=None, backend=None):
    _prepare_out(out)
    backend = resolve_backend(backend)
    _, traces = run_scenario(spec, threads=threads, backend=backend)
    for strategy in spec.strategies:
        trace = traces[strategy.label]
        _write(os.path.join(out, f"trace_{strategy.label}.csv"),
               trace_csv(trace, header_lines(spec, strategy, backend)))
    _write(os.path.join(out, "comparison.csv"), comparison_csv(traces, header_lines(spec, backend=backend)))
    if plot:
        title = f"{spec.kind.value} scenario, m={spec.m}, n={spec.n}, seed={spec.seed}"
        _write(os.path.join(out, "comparison.svg"), comparison_svg(traces, title=title))
    for label, trace in traces.items():
        print(f"{label:>14}: {trace.iterations} steps, final error {trace.final_error:.6e}, "
              f"residuals evaluated {trace.total_residual_evaluations}")
    return 0


def cmd_hist(spec, out, threads=None, backend=None):
    partial = [s for s in spec.strategies if s.rule is Rule.PARTIAL]
    if not partial:
        raise CommandError("histogram requires the partial strategy")
    _prepare_out(out)
    backend = resolve_backend(backend)
    _, traces = run_scenario(spec, threads=threads, backend=backend)
    hist = residual_count_histogram(traces[partial[0].label], first=spec.iterations, fill=True)
    _write(os.path.join(out, "residual_counts.csv"),
           counts_csv(hist, header_lines(spec, partial[0], backend)))
    print(format_count_table(hist))
    total = sum(hist.values())
    mean = sum(c * f for c, f in hist.items()) / total
    print(f"steps={total} mean={mean:.4f} share(2)={hist.get(2, 0) / total:.4f} max={max(hist)}")
    return 0


def cmd_verify():
    results = run_suite()
    for res in results:
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


def _scenario_args(p):
    p.add_argument("--scenario", choices=[k.value for k in Kind], default="nice")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=None, help="row count (custom scenario only)")
    p.add_argument("--shift", type=float, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--strategies", default=None,
                   help="comma list of cyclic, uniform, weighted-p, greedy, partial, two-sample")
    p.add_argument("--p", type=int, default=None, help="exponent for weighted-p")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--trace-every", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="kaczmarz-lab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--backend", choices=["numba", "numpy"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="run several strategies and write traces + comparison")
    _scenario_args(p)
    p.add_argument("--out", default="results")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("hist", help="residual-count table of the partial strategy")
    _scenario_args(p)
    p.add_argument("--out", default="results")

    sub.add_parser("verify", help="run the exact-expectation verification suite")

    p = sub.add_parser("run", help="run a scenario described by a key=value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--plot", action="store_true")
    return parser


def _config_wants_plot(path):
    with open(path) as fh:
        for line in fh:
            key, _, value = line.split("#", 1)[0].partition("=")
            if key.strip() == "plot":
                return value.strip().lower() in ("1", "true", "yes", "on")
    return False


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify()
        if args.command == "compare":
            return cmd_compare(spec_from_args(args), args.out, args.plot, backend=args.backend)
        if args.command == "hist":
            return cmd_hist(spec_from_args(args, default_strategies=("partial",)), args.out,
                            backend=args.backend)
        spec = read_config(args.config)
        plot = args.plot or _config_wants_plot(args.config)
        return cmd_compare(spec, args.out, plot, backend=args.backend)
    except (CommandError, ValueError, OSError) as exc:
        print(f"kaczmarz-lab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
