"""Backend selection for the hot loops.

The compiled Cython module is used when it imports; otherwise the numpy
fallback. ``BACKEND`` names the active choice.
"""
import logging

import numpy as np

from . import _fallback

log = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
    log.debug("compiled kernels unavailable; using numpy fallback")

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

BACKEND = "cython" if _compiled is not None else "python"

# The compiled RK4 does dense O(n^2) stage updates; the modal fallback is
# O(n) per step after one eigendecomposition and wins above about n = 20.
RK4_DENSE_MAX_N = 20


def get_backend(name=None):
    """Kernel namespace for ``name`` (default: the active backend)."""
    name = name or BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}")
    return BACKENDS[name]


def score_combinations(Wo, orig, zero_cols, pool, q, count, backend=None):
    mod = get_backend(backend)
    return mod.score_combinations(
        np.ascontiguousarray(Wo, dtype=np.float64),
        np.ascontiguousarray(orig, dtype=np.int_),
        np.ascontiguousarray(zero_cols, dtype=np.int_),
        np.ascontiguousarray(pool, dtype=np.int_),
        int(q),
        int(count),
    )


def rk4_trajectory(L, B, U, x0, dt, steps, backend=None):
    if backend is None and np.shape(L)[0] > RK4_DENSE_MAX_N:
        backend = "python"
    mod = get_backend(backend)
    return mod.rk4_trajectory(
        np.ascontiguousarray(L, dtype=np.float64),
        np.ascontiguousarray(B, dtype=np.float64),
        np.ascontiguousarray(U, dtype=np.float64),
        np.ascontiguousarray(x0, dtype=np.float64),
        float(dt),
        int(steps),
    )

