# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: subset scoring and fixed-step RK4."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def score_combinations(
    const double[:, ::1] Wo,
    const long[::1] orig,
    const long[::1] zero_cols,
    const long[::1] pool,
    long q,
    long count,
):
    """Score every size-q subset of ``pool`` in lexicographic order.

    Column ``keep[t]`` (the t-th non-demoted position, ascending) is paired
    with the t-th chosen pool vertex. Returns (combos, values) where combos
    holds pool vertices (0-based) and values the trace form of the error.
    """
    cdef long m = orig.shape[0]
    cdef long npool = pool.shape[0]
    cdef long nz = zero_cols.shape[0]
    cdef long t, c, idx, a, b
    cdef double base = 0.0, acc
    cdef cnp.ndarray[cnp.int64_t, ndim=2] combos_arr = np.empty((count, q), dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] values_arr = np.empty(count, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] combos = combos_arr
    cdef double[::1] values = values_arr
    cdef long[::1] keep = np.empty(m - nz, dtype=np.int_)
    cdef long[::1] sel = np.empty(q if q > 0 else 1, dtype=np.int_)
    cdef char[::1] is_zero = np.zeros(m, dtype=np.int8)

    for t in range(nz):
        is_zero[zero_cols[t]] = 1
        a = orig[zero_cols[t]]
        base += Wo[a, a]
    idx = 0
    for t in range(m):
        if not is_zero[t]:
            keep[idx] = t
            idx += 1

    for t in range(q):
        sel[t] = t

    for c in range(count):
        acc = base
        for t in range(q):
            a = orig[keep[t]]
            b = pool[sel[t]]
            combos[c, t] = b
            if a != b:
                acc += Wo[a, a] + Wo[b, b] - 2.0 * Wo[a, b]
        values[c] = acc
        # advance to the next combination in lexicographic order
        t = q - 1
        while t >= 0 and sel[t] == npool - q + t:
            t -= 1
        if t < 0:
            break
        sel[t] += 1
        for idx in range(t + 1, q):
            sel[idx] = sel[idx - 1] + 1
    return combos_arr, values_arr


cdef inline void _deriv(
    const double[:, ::1] L, const double[:, ::1] B, const double* x,
    const double[:, ::1] U, long row, double* out, long n, long m,
) noexcept nogil:
    cdef long i, j
    cdef double s
    for i in range(n):
        s = 0.0
        for j in range(n):
            s -= L[i, j] * x[j]
        for j in range(m):
            s += B[i, j] * U[row, j]
        out[i] = s


def rk4_trajectory(
    const double[:, ::1] L,
    const double[:, ::1] B,
    const double[:, ::1] U,
    const double[::1] x0,
    double dt,
    long steps,
):
    """Classic RK4 for x' = -L x + B u(t).

    ``U`` holds three input samples per step: row 3k is u at the start of
    step k (right limit), row 3k+1 the midpoint, row 3k+2 the end (left
    limit). Returns the (steps + 1, n) trajectory.
    """
    cdef long n = L.shape[0]
    cdef long m = B.shape[1]
    cdef long k, i
    cdef cnp.ndarray[double, ndim=2] X_arr = np.empty((steps + 1, n), dtype=np.float64)
    cdef double[:, ::1] X = X_arr
    cdef double[::1] k1 = np.empty(n), k2 = np.empty(n), k3 = np.empty(n), k4 = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0

    for i in range(n):
        X[0, i] = x0[i]
    with nogil:
        for k in range(steps):
            _deriv(L, B, &X[k, 0], U, 3 * k, &k1[0], n, m)
            for i in range(n):
                tmp[i] = X[k, i] + h2 * k1[i]
            _deriv(L, B, &tmp[0], U, 3 * k + 1, &k2[0], n, m)
            for i in range(n):
                tmp[i] = X[k, i] + h2 * k2[i]
            _deriv(L, B, &tmp[0], U, 3 * k + 1, &k3[0], n, m)
            for i in range(n):
                tmp[i] = X[k, i] + dt * k3[i]
            _deriv(L, B, &tmp[0], U, 3 * k + 2, &k4[0], n, m)
            for i in range(n):
                X[k + 1, i] = X[k, i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return X_arr
