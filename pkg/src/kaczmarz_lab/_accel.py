"""Backend switch between the numba kernels and the pure numpy path.

Set ``KACZMARZ_LAB_DISABLE_NUMBA=1`` to force the reference path. The flag
is read on every call, so it can be flipped inside a running process.
"""
import os

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

ENV_FLAG = "KACZMARZ_LAB_DISABLE_NUMBA"
BACKENDS = ("numba", "numpy")


def numba_enabled():
    flag = os.environ.get(ENV_FLAG, "").strip().lower()
    return HAVE_NUMBA and flag not in ("1", "true", "yes", "on")


def resolve_backend(backend=None):
    """Return ``"numba"`` or ``"numpy"`` for an explicit or default choice."""
    if backend is None:
        return "numba" if numba_enabled() else "numpy"
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend
