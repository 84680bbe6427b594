"""CSV and SVG writers for traces, comparisons and residual-count tables."""
import math
from xml.sax.saxutils import escape

import numpy as np

from . import __version__

STRATEGY_COLORS = {
    "uniform": "blue",
    "partial": "green",
    "two-sample": "orange",
    "greedy": "red",
    "cyclic": "gray",
    "weighted-p": "purple",
}


def fmt_float(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return format(float(v), ".17g")


def header_lines(spec, strategy=None, backend=None):
    lines = [
        f"# kaczmarz-lab {__version__}",
        f"# seed={spec.seed}",
        f"# scenario={spec.kind.value}",
        f"# strategy={strategy.label if strategy is not None else ','.join(s.label for s in spec.strategies)}",
        f"# m={spec.m}, n={spec.n}",
        f"# shift={fmt_float(spec.shift)}, iterations={spec.iterations}, "
        f"tolerance={fmt_float(spec.tolerance)}, trace_every={spec.trace_every}",
    ]
    if strategy is not None:
        index = list(spec.strategies).index(strategy)
        lines.append(f"# run_seed={spec.strategy_seed(index)}")
    if backend is not None:
        lines.append(f"# backend={backend}")
    return lines


def trace_csv(trace, header):
    out = list(header)
    out.append("k,selected_row,residual_used,residuals_evaluated,error")
    for rec in trace.steps():
        out.append(f"{rec.k},{rec.selected_row},{fmt_float(rec.residual_used)},"
                   f"{rec.residuals_evaluated},{fmt_float(rec.error)}")
    return "\n".join(out) + "\n"


def comparison_table(traces):
    """Union of recorded k values with one error column per strategy."""
    curves = {label: dict(zip(*(arr.tolist() for arr in t.error_curve()))) for label, t in traces.items()}
    ks = sorted(set().union(*(c.keys() for c in curves.values())))
    return ks, curves


def comparison_csv(traces, header):
    ks, curves = comparison_table(traces)
    out = list(header)
    out.append(",".join(["k", *curves]))
    for k in ks:
        out.append(",".join([str(int(k)), *(fmt_float(c.get(k)) for c in curves.values())]))
    return "\n".join(out) + "\n"


def counts_csv(hist, header):
    out = list(header)
    out.append("count,frequency")
    out.extend(f"{c},{f}" for c, f in hist.items())
    return "\n".join(out) + "\n"


def _color(label):
    for key, color in STRATEGY_COLORS.items():
        if label.startswith(key):
            return color
    return "black"


def _downsample(ks, vals, limit):
    if len(ks) <= limit:
        return ks, vals
    idx = np.unique(np.append(np.linspace(0, len(ks) - 1, limit).astype(int), len(ks) - 1))
    return ks[idx], vals[idx]


def comparison_svg(traces, title="", width=800, height=500, max_points=2000):
    """Line chart of error versus iteration with a log10 y axis."""
    left, right, top, bottom = 80, 150, 40, 60
    pw, ph = width - left - right, height - top - bottom
    series = []
    for label, trace in traces.items():
        ks, errs = trace.error_curve()
        keep = errs > 0
        series.append((label, ks[keep].astype(float), errs[keep]))
    k_max = max([s[1].max() for s in series if s[1].size] + [1.0])
    positive = np.concatenate([s[2] for s in series if s[2].size] or [np.array([1.0])])
    lo = math.floor(math.log10(positive.min()))
    hi = math.ceil(math.log10(positive.max()))
    if hi == lo:
        hi = lo + 1

    def sx(k):
        return left + pw * k / k_max

    def sy(v):
        return top + ph * (hi - math.log10(v)) / (hi - lo)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    step = max(1, math.ceil((hi - lo) / 10))
    for e in range(lo, hi + 1, step):
        y = sy(10.0 ** e)
        parts.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end" font-size="11">1e{e}</text>')
    for j in range(6):
        k = k_max * j / 5
        x = sx(k)
        parts.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="11">{int(round(k))}</text>')
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="13">iteration k</text>')
    parts.append(f'<text x="20" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" '
                 f'transform="rotate(-90 20 {top + ph / 2:.1f})">error ||x_k - x||</text>')
    for j, (label, ks, errs) in enumerate(series):
        ks, errs = _downsample(ks, errs, max_points)
        pts = " ".join(f"{sx(k):.2f},{sy(v):.2f}" for k, v in zip(ks, errs))
        color = _color(label)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'data-strategy="{escape(label)}" points="{pts}"/>')
        ly = top + 20 + 20 * j
        parts.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 42}" y="{ly + 4}" font-size="12">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
