"""Seedable xoshiro256** generator.

The 64-bit seed is expanded into 256 bits of state with splitmix64::

    z  = seed + 0x9E3779B97F4A7C15 * j          (j = 1, 2, 3, 4)
    z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
    s_j = z ^ (z >> 31)

and each output of xoshiro256** is::

    out = rotl(s1 * 5, 7) * 9
    t   = s1 << 17
    s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)

Derived variates:

* ``uniform_real``: ``(out >> 11) * 2**-53``, in ``[0, 1)``.
* ``uniform_index(k)``: rejection sampling. Words below ``2**64 mod k`` are
  discarded, the rest map to ``out % k + 1``; no modulo bias.
* ``standard_normal``: Box-Muller on pairs ``u1 = 1 - uniform_real()``,
  ``u2 = uniform_real()``, producing ``sqrt(-2 ln u1) cos(2 pi u2)`` then
  ``sqrt(-2 ln u1) sin(2 pi u2)``. An odd-length request discards the sine
  half of the last pair.

The state lives in a ``uint64[4]`` array so that the numba kernels advance
exactly the same stream in place.
"""
import math

import numpy as np

from ._accel import resolve_backend
from .errors import EmptyRange

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL2 = 0x94D049BB133111EB
TWO_POW_M53 = 1.0 / (1 << 53)


def splitmix64(x):
    """One splitmix64 step. Returns ``(new_x, output)``."""
    x = (x + GOLDEN_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * SPLITMIX_MUL1) & MASK64
    z = ((z ^ (z >> 27)) * SPLITMIX_MUL2) & MASK64
    return x, z ^ (z >> 31)


def expand_seed(seed):
    x = int(seed) & MASK64
    words = []
    for _ in range(4):
        x, z = splitmix64(x)
        words.append(z)
    if not any(words):  # pragma: no cover - splitmix64 is a bijection; cannot emit 4 zeros
        words[0] = GOLDEN_GAMMA
    return words


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def xoshiro_step(s):
    """Advance a 4-int list in place and return the next 64-bit output."""
    s0, s1, s2, s3 = s
    out = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return out


def bounded_from_word(word, k, bits=64):
    """Map a ``bits``-wide random word to ``{0, ..., k-1}`` or ``None`` (reject).

    Exposed with a configurable word width so uniformity can be checked by
    exhausting every word of a small generator.
    """
    threshold = (1 << bits) % k
    if word < threshold:
        return None
    return word % k


class SeededRng:
    """Deterministic 64-bit generator; one instance per solver run."""

    def __init__(self, seed=0):
        self.seed = int(seed) & MASK64
        self.state = np.array(expand_seed(self.seed), dtype=np.uint64)

    def __repr__(self):
        return f"SeededRng(seed={self.seed})"

    def _words(self):
        return [int(w) for w in self.state]

    def _store(self, s):
        self.state[:] = np.array(s, dtype=np.uint64)

    def next_u64(self):
        s = self._words()
        out = xoshiro_step(s)
        self._store(s)
        return out

    def uniform_index(self, k):
        """Uniform draw from ``{1, ..., k}``."""
        k = int(k)
        if k < 1:
            raise EmptyRange("uniform_index needs k >= 1")
        s = self._words()
        while True:
            j = bounded_from_word(xoshiro_step(s), k)
            if j is not None:
                break
        self._store(s)
        return j + 1

    def uniform_real(self):
        return (self.next_u64() >> 11) * TWO_POW_M53

    def random_u64(self, size):
        s = self._words()
        out = np.array([xoshiro_step(s) for _ in range(size)], dtype=np.uint64)
        self._store(s)
        return out

    def standard_normal(self, size, backend=None):
        """Return ``size`` standard normal variates (Box-Muller)."""
        size = int(size)
        out = np.empty(size, dtype=np.float64)
        if resolve_backend(backend) == "numba":
            from ._kernels import fill_normals
            fill_normals(self.state, out)
            return out
        s = self._words()
        i = 0
        while i < size:
            u1 = 1.0 - (xoshiro_step(s) >> 11) * TWO_POW_M53
            u2 = (xoshiro_step(s) >> 11) * TWO_POW_M53
            radius = math.sqrt(-2.0 * math.log(u1))
            angle = 2.0 * math.pi * u2
            out[i] = radius * math.cos(angle)
            if i + 1 < size:
                out[i + 1] = radius * math.sin(angle)
            i += 2
        self._store(s)
        return out


def new_rng(seed):
    return SeededRng(seed)


def derived_seed(seed, offset):
    """Seed for the ``offset``-th independent run (wraps modulo 2**64)."""
    return (int(seed) + int(offset)) & MASK64
