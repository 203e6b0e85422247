"""Pure numpy/scipy versions of the compiled kernels.

Same signatures and results (to round-off) as ``leadersel._kernels``.
"""
import itertools

import numpy as np
from scipy.signal import lfilter


def score_combinations(Wo, orig, zero_cols, pool, q, count):
    orig = np.asarray(orig)
    pool = np.asarray(pool)
    zero = set(int(c) for c in zero_cols)
    keep = np.array([t for t in range(orig.size) if t not in zero], dtype=np.int64)
    base = float(sum(Wo[orig[c], orig[c]] for c in zero))

    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(pool.size), q)),
        dtype=np.int64,
        count=count * q,
    )
    combos = pool[flat.reshape(count, q)] if q else np.empty((count, 0), dtype=np.int64)
    if q == 0:
        return combos, np.full(count, base)

    a = np.broadcast_to(orig[keep], combos.shape)
    diag = np.diag(Wo)
    contrib = diag[a] + diag[combos] - 2.0 * Wo[a, combos]
    contrib[a == combos] = 0.0
    values = base + contrib.sum(axis=1)
    return combos, values


def rk4_trajectory(L, B, U, x0, dt, steps):
    """RK4 on x' = -L x + B u, evaluated mode by mode.

    For a linear system one RK4 step is exactly
    x+ = P x + Q0 B u(t+) + Qh B u(t + h/2) + Q1 B u((t + h)-), with P, Q*
    polynomials in (-h L). In the eigenbasis of L each mode is a scalar
    first-order recurrence, which ``lfilter`` runs without a Python loop.
    """
    lam, Q = np.linalg.eigh(L)
    a = -lam * dt
    h = dt
    p = 1 + a + a**2 / 2 + a**3 / 6 + a**4 / 24
    q0 = h / 6 + h * a / 6 + h * a**2 / 12 + h * a**3 / 24
    qh = 2 * h / 3 + h * a / 3 + h * a**2 / 12
    q1 = np.full_like(a, h / 6)

    drive = (U @ B.T) @ Q  # (3 * steps) x modes: start, midpoint, end of each step
    b = q0 * drive[0::3] + qh * drive[1::3] + q1 * drive[2::3]
    z0 = Q.T @ np.asarray(x0, dtype=float)
    Z = np.empty((steps + 1, lam.size))
    Z[0] = z0
    for i in range(lam.size):
        if steps:
            Z[1:, i], _ = lfilter([1.0], [1.0, -p[i]], b[:, i], zi=[p[i] * z0[i]])
    return Z @ Q.T
