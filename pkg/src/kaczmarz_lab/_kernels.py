"""numba kernels for the hot loops.

These mirror ``rng``, ``selection`` and the reference loop in ``solver``
operation for operation; the generator stream is bit-identical, the float
reductions may differ from numpy's BLAS in the last bits.
"""
import math

import numpy as np
from numba import njit

_U5 = np.uint64(5)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_ZERO = np.uint64(0)
_TWO_POW_M53 = 1.0 / 9007199254740992.0

CYCLIC, UNIFORM, WEIGHTED_P, GREEDY, PARTIAL, TWO_SAMPLE = 0, 1, 2, 3, 4, 5


@njit(inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(nogil=True, cache=True)
def next_u64(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    out = _rotl(s1 * _U5, 7) * _U9
    t = s1 << _U17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return out


@njit(nogil=True, cache=True)
def bounded(s, k):
    """Uniform 0-based draw from ``range(k)`` by rejection."""
    kk = np.uint64(k)
    threshold = (_ZERO - kk) % kk
    while True:
        u = next_u64(s)
        if u >= threshold:
            return np.int64(u % kk)


@njit(nogil=True, cache=True)
def uniform_real(s):
    return np.float64(next_u64(s) >> _U11) * _TWO_POW_M53


@njit(nogil=True, cache=True)
def fill_u64(s, out):
    for i in range(out.shape[0]):
        out[i] = next_u64(s)


@njit(nogil=True, cache=True)
def fill_normals(s, out):
    size = out.shape[0]
    i = 0
    while i < size:
        u1 = 1.0 - uniform_real(s)
        u2 = uniform_real(s)
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        out[i] = radius * math.cos(angle)
        if i + 1 < size:
            out[i + 1] = radius * math.sin(angle)
        i += 2


@njit(nogil=True, cache=True, fastmath={"reassoc", "contract"})
def _dot_row(a, i, x):
    acc = 0.0
    for j in range(x.shape[0]):
        acc += a[i, j] * x[j]
    return acc


@njit(nogil=True, cache=True)
def _residual(a, b, x, i):
    return b[i] - _dot_row(a, i, x)


@njit(nogil=True, cache=True)
def _full_residual(a, b, x, r):
    top = 0.0
    for i in range(a.shape[0]):
        r[i] = b[i] - _dot_row(a, i, x)
        v = abs(r[i])
        if v > top:
            top = v
    return top


@njit(nogil=True, cache=True)
def _draw(s, pool, size):
    j = bounded(s, size)
    row = pool[j]
    pool[j] = pool[size - 1]
    pool[size - 1] = row
    return row


@njit(nogil=True, cache=True)
def _tournament(a, b, x, s, pool):
    size = a.shape[0]
    cand = _draw(s, pool, size)
    size -= 1
    r_cand = _residual(a, b, x, cand)
    count = 1
    while size > 0:
        comp = _draw(s, pool, size)
        size -= 1
        r_comp = _residual(a, b, x, comp)
        count += 1
        if abs(r_cand) > abs(r_comp):
            return cand, r_cand, count
        cand = comp
        r_cand = r_comp
    return cand, r_cand, count


@njit(nogil=True, cache=True)
def _pair(a, b, x, s, pool):
    m = a.shape[0]
    first = _draw(s, pool, m)
    second = _draw(s, pool, m - 1)
    r1 = _residual(a, b, x, first)
    r2 = _residual(a, b, x, second)
    if abs(r1) > abs(r2):
        return first, r1, 2
    return second, r2, 2


@njit(nogil=True, cache=True)
def _weighted_pick(r, top, p, s):
    m = r.shape[0]
    w = np.empty(m)
    log_top = math.log(top)
    total = 0.0
    for i in range(m):
        v = abs(r[i])
        if v > 0.0:
            w[i] = math.exp(p * (math.log(v) - log_top))
        else:
            w[i] = 0.0
        total += w[i]
    target = uniform_real(s) * total
    acc = 0.0
    last = 0
    for i in range(m):
        if w[i] > 0.0:
            acc += w[i]
            last = i
            if acc > target:
                return i
    return last


@njit(nogil=True, cache=True)
def _argmax_abs(r):
    best = 0
    top = abs(r[0])
    for i in range(1, r.shape[0]):
        v = abs(r[i])
        if v > top:
            top = v
            best = i
    return best


@njit(nogil=True, cache=True)
def _error(x, x_true):
    acc = 0.0
    for j in range(x.shape[0]):
        d = x[j] - x_true[j]
        acc += d * d
    return math.sqrt(acc)


@njit(nogil=True, cache=True)
def solve(a, b, x, x_true, has_true, code, p, max_iter, tol, trace_every, s, pool,
          rec_k, rec_row, rec_res, rec_cnt, rec_err, step_counts):
    """Run up to ``max_iter`` Kaczmarz steps in place on ``x``.

    Returns ``(steps, records, converged, check_evaluations)``.
    """
    m = a.shape[0]
    n = a.shape[1]
    r = np.empty(m)
    n_rec = 0
    checks = 0
    converged = False
    k = 0
    while k < max_iter:
        if code == WEIGHTED_P or code == GREEDY:
            top = _full_residual(a, b, x, r)
            if top <= tol:
                converged = True
                break
            if code == GREEDY:
                i = _argmax_abs(r)
            else:
                i = _weighted_pick(r, top, p, s)
            ri = r[i]
            cnt = m
        else:
            if k % m == 0:
                checks += m
                if _full_residual(a, b, x, r) <= tol:
                    converged = True
                    break
            if code == PARTIAL:
                i, ri, cnt = _tournament(a, b, x, s, pool)
            elif code == TWO_SAMPLE:
                i, ri, cnt = _pair(a, b, x, s, pool)
            else:
                if code == CYCLIC:
                    i = k % m
                else:
                    i = bounded(s, m)
                ri = _residual(a, b, x, i)
                cnt = 1
        if k % trace_every == 0:
            rec_k[n_rec] = k
            rec_row[n_rec] = i + 1
            rec_res[n_rec] = ri
            rec_cnt[n_rec] = cnt
            rec_err[n_rec] = _error(x, x_true) if has_true else np.nan
            n_rec += 1
        step_counts[k] = cnt
        for j in range(n):
            x[j] += ri * a[i, j]
        k += 1
    return k, n_rec, converged, checks


@njit(nogil=True, cache=True)
def sample_rows(a, b, x, code, p, trials, s, pool, row_freq, count_freq):
    """Repeat one randomized selection ``trials`` times at a fixed state."""
    for _ in range(trials):
        if code == PARTIAL:
            i, ri, cnt = _tournament(a, b, x, s, pool)
        elif code == TWO_SAMPLE:
            i, ri, cnt = _pair(a, b, x, s, pool)
        elif code == UNIFORM:
            i = bounded(s, a.shape[0])
            cnt = 0
        else:
            r = np.empty(a.shape[0])
            top = _full_residual(a, b, x, r)
            i = _weighted_pick(r, top, p, s)
            cnt = a.shape[0]
        row_freq[i] += 1
        count_freq[cnt] += 1
