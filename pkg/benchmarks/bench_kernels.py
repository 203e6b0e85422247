"""Time the compiled and numpy backends on the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Subset scoring is timed on exhaustive selection problems of growing size,
RK4 on consensus networks of growing order. Results are checked for
agreement before timings are reported.
"""
import argparse
import json
import math
import time

import numpy as np

from leadersel import kernels
from leadersel.graph import derive_matrices, generate_graph
from leadersel.simulate import InputSignal
from leadersel.system import observability_gramian

SCORE_CASES = [(16, 6, 1), (24, 8, 2), (30, 8, 1)]  # (n, m, r)
RK4_CASES = [(5, 10_000), (50, 10_000), (200, 2_000)]  # (n, steps)


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_scores(repeat):
    rows = []
    for n, m, r in SCORE_CASES:
        Wo = observability_gramian(n)
        orig = np.arange(m)
        zero_cols = np.arange(r)
        pool = np.arange(r, n)
        q = m - r
        count = math.comb(pool.size, q)
        res = {}
        for name in sorted(kernels.BACKENDS):
            res[name] = best_of(lambda: kernels.score_combinations(
                Wo, orig, zero_cols, pool, q, count, backend=name), repeat)
        ref = res["python"][1]
        for name, (_, (combos, vals)) in res.items():
            assert np.array_equal(combos, ref[0]) and np.allclose(vals, ref[1], atol=1e-12)
        rows.append({"kernel": "score_combinations", "case": f"n={n} m={m} r={r}",
                     "size": count, **{name: t for name, (t, _) in res.items()}})
    return rows


def bench_rk4(repeat):
    rows = []
    for n, steps in RK4_CASES:
        g = generate_graph("random", n, seed=n, edge_prob=min(1.0, 6.0 / n), weights="loguniform")
        gm = derive_matrices(g)
        dt = min(1e-3, 0.5 / gm.spectrum.lambda_max)
        B = np.eye(n)[:, :3]
        U = InputSignal("exp", (1.0, -0.5, 2.0), beta=1.0).sample_steps(dt, steps, 3)
        x0 = np.zeros(n)
        res = {}
        for name in sorted(kernels.BACKENDS):
            res[name] = best_of(lambda: kernels.rk4_trajectory(gm.L, B, U, x0, dt, steps,
                                                               backend=name), repeat)
        ref = res["python"][1]
        for name, (_, X) in res.items():
            assert np.allclose(X, ref, atol=1e-9)
        rows.append({"kernel": "rk4_trajectory", "case": f"n={n} steps={steps}",
                     "size": steps, **{name: t for name, (t, _) in res.items()}})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write the rows here")
    args = ap.parse_args()

    rows = bench_scores(args.repeat) + bench_rk4(args.repeat)
    names = sorted(kernels.BACKENDS)
    print(f"active backend: {kernels.BACKEND} (RK4 switches to the modal fallback above "
          f"n = {kernels.RK4_DENSE_MAX_N} unless a backend is forced)")
    header = f"{'kernel':<20}{'case':<22}{'size':>10}" + "".join(f"{n + ' [s]':>14}" for n in names)
    if "cython" in names:
        header += f"{'speedup':>10}"
    print(header)
    for row in rows:
        line = f"{row['kernel']:<20}{row['case']:<22}{row['size']:>10}"
        line += "".join(f"{row[n]:>14.4f}" for n in names)
        if "cython" in names:
            line += f"{row['python'] / row['cython']:>9.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
