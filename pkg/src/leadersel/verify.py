"""Numerical checks of every structural claim for one graph and leader set.

Used by ``leadersel verify``. Checks run in a fixed order and the run stops
at the first failure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, derive_matrices
from .metrics import (
    h2_error_quadrature_oracle,
    h2_error_sq,
    h2_norm_sq,
    relative_error,
    structural_h2_formula,
)
from .relaxation import (
    SubspacePoint,
    finite_difference_gradient,
    gradient,
    hessian_apply,
    masked,
    objective,
    range_projection,
    solve_relaxed,
)
from .selection import select_bruteforce, select_closed_form, demotion_costs
from .simulate import InputSignal, check_output_bound
from .system import (
    assignment_from_sets,
    build_input_matrix,
    gramian_spectral_oracle,
    observability_gramian,
)

MAX_DEMOTION_SETS = 64


@dataclass(frozen=True)
class CheckResult:
    check: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


class CheckFailed(Exception):
    def __init__(self, result: CheckResult):
        super().__init__(f"{result.check}: {result.value:.3g} exceeds {result.tolerance:.3g} "
                         f"({result.detail})")
        self.result = result


def _result(check, value, tol, detail=""):
    return CheckResult(check, bool(value <= tol), float(value), float(tol), detail)


def _demotion_sets(leaders, sizes):
    out = []
    for r in sizes:
        out.extend(itertools.combinations(leaders, r))
        if len(out) >= MAX_DEMOTION_SETS:
            return out[:MAX_DEMOTION_SETS]
    return out


def graph_invariants(g: WeightedGraph) -> CheckResult:
    gm = derive_matrices(g)
    L = gm.L
    scale = 1.0 + np.linalg.norm(L)
    resid = np.linalg.norm(L - gm.R @ gm.W @ gm.R.T) / scale
    resid = max(resid, np.abs(L @ np.ones(g.n)).max() / scale)
    flipped = derive_matrices(g.flipped(range(g.k))).L
    resid = max(resid, np.abs(flipped - L).max())
    lam = np.linalg.eigvalsh(L)
    nzero = int(np.sum(lam < 1e-9 * np.linalg.norm(L, 2)))
    if nzero != 1:
        return CheckResult("graph.invariants", False, float(nzero), 1.0, "zero eigenvalue count")
    return _result("graph.invariants", resid, 1e-12, "L = R W R^T, L1 = 0, orientation")


def gramian_oracle(g: WeightedGraph) -> CheckResult:
    gm = derive_matrices(g)
    Wo = observability_gramian(g.n)
    err = np.linalg.norm(Wo - gramian_spectral_oracle(gm.L))
    lam = np.linalg.eigvalsh(Wo)
    expected = np.r_[0.0, np.full(g.n - 1, 0.5)]
    err = max(err, np.abs(lam - expected).max())
    return _result("gramian.oracle", err, 1e-8, "closed form vs spectral integral")


def closed_form_optimal(g, leaders) -> CheckResult:
    worst = 0.0
    for dem in _demotion_sets(leaders, range(len(leaders))):
        rep = select_bruteforce(g, leaders, dem)
        if rep.closed_form_solution not in rep.minimizers:
            return CheckResult("selection.closed_form", False, math.inf, 0.0,
                               f"closed form not a minimizer for demoted {list(dem)}")
        worst = max(worst, abs(rep.min_f - structural_h2_formula(g.n, len(dem), 0)))
    return _result("selection.closed_form", worst, 1e-10, "brute-force minimum vs closed form")


def structural_formula(g, leaders) -> CheckResult:
    worst = 0.0
    for dem in _demotion_sets(leaders, range(len(leaders) + 1)):
        rep = select_bruteforce(g, leaders, dem)
        for s, f in rep.candidates:
            d = assignment_from_sets(g.n, leaders, dem, s).mismatches
            worst = max(worst, abs(f - structural_h2_formula(g.n, len(dem), d)))
    return _result("structural.formula", worst, 1e-12, "trace form vs (r/2)(1-1/n) + d")


def demotion_constant(g, leaders) -> CheckResult:
    worst = 0.0
    for r in range(1, len(leaders) + 1):
        rep = demotion_costs(g, leaders, r)
        worst = max(worst, rep.max_deviation)
    return _result("demotion.constant", worst, 1e-10, "every demotion set gives the same cost")


def relative_error_at_optimum(g, leaders) -> CheckResult:
    n, m = g.n, len(leaders)
    Wo = observability_gramian(n)
    worst = 0.0
    for dem in _demotion_sets(leaders, range(m + 1)):
        a = assignment_from_sets(n, leaders, dem, select_closed_form(leaders, dem))
        M, Mt = build_input_matrix(a, "original"), build_input_matrix(a, "new")
        rel = relative_error(h2_error_sq(Wo, M, Mt), h2_norm_sq(Wo, M))
        worst = max(worst, abs(rel - math.sqrt(len(dem) / m)))
    return _result("selection.relative_error", worst, 1e-10, "relative error vs sqrt(r/m)")


def h2_oracle(g, leaders) -> CheckResult:
    gm = derive_matrices(g)
    worst_ratio = 0.0
    for dem in _demotion_sets(leaders, [1])[:3]:
        a = assignment_from_sets(g.n, leaders, dem, select_closed_form(leaders, dem))
        M, Mt = build_input_matrix(a, "original"), build_input_matrix(a, "new")
        est = h2_error_quadrature_oracle(gm, M, Mt, omega_max=max(1e3, 10 * gm.spectrum.lambda_max))
        f = h2_error_sq(observability_gramian(g.n), M, Mt)
        worst_ratio = max(worst_ratio, abs(f - est.estimate) / est.tolerance)
    return _result("h2.oracle", worst_ratio, 1.0, "|trace - quadrature| / certified tolerance")


def relax_gradient(g, leaders, rng) -> CheckResult:
    n = g.n
    Wo = observability_gramian(n)
    M = build_input_matrix(assignment_from_sets(n, leaders, [], leaders))
    worst = 0.0
    for dem in _demotion_sets(leaders, range(len(leaders)))[:8]:
        J = [leaders.index(v) for v in dem]
        for _ in range(10):
            X = SubspacePoint.project(rng.normal(size=M.shape), J)
            gr = gradient(Wo, M, X).matrix
            fd = finite_difference_gradient(Wo, M, X)
            worst = max(worst, np.abs(gr - fd).max() / (1.0 + np.linalg.norm(gr)))
    return _result("relax.gradient_fd", worst, 1e-5, "gradient vs central differences")


def relax_hessian(g, leaders, rng) -> CheckResult:
    n = g.n
    Wo = observability_gramian(n)
    M = build_input_matrix(assignment_from_sets(n, leaders, [], leaders))
    worst = 0.0
    for dem in _demotion_sets(leaders, range(len(leaders)))[:8]:
        J = [leaders.index(v) for v in dem]
        for _ in range(10):
            X = SubspacePoint.project(rng.normal(size=M.shape), J)
            D = SubspacePoint.project(rng.normal(size=M.shape), J)
            lhs = objective(Wo, M, SubspacePoint(X.matrix + D.matrix, J))
            rhs = (objective(Wo, M, X) + np.sum(gradient(Wo, M, X).matrix * D.matrix)
                   + 0.5 * np.sum(D.matrix * hessian_apply(Wo, D).matrix))
            curv = np.sum(D.matrix * hessian_apply(Wo, D).matrix)
            worst = max(worst, abs(lhs - rhs), -curv)
    return _result("relax.hessian", worst, 1e-10, "quadratic exactness and curvature >= 0")


def relax_descent(g, leaders, rng) -> CheckResult:
    n = g.n
    Wo = observability_gramian(n)
    M = build_input_matrix(assignment_from_sets(n, leaders, [], leaders))
    worst = worst_proj = 0.0
    for dem in _demotion_sets(leaders, range(len(leaders)))[:8]:
        J = [leaders.index(v) for v in dem]
        target = structural_h2_formula(n, len(J), 0)
        starts = [None, SubspacePoint.project(rng.uniform(-10, 10, size=M.shape), J)]
        for x0 in starts:
            tr = solve_relaxed(Wo, M, J, x0=x0)
            if not tr.converged:
                return CheckResult("relax.descent", False, math.inf, 1e-8, "did not converge")
            worst = max(worst, abs(tr.final_objective - target))
            worst_proj = max(worst_proj, np.abs(range_projection(tr.final.matrix)
                                                - range_projection(masked(M, J))).max())
    if worst_proj > 1e-6:
        return CheckResult("relax.descent", False, worst_proj, 1e-6, "range(Wo) projection")
    return _result("relax.descent", worst, 1e-8, "descent limit vs (r/2)(1-1/n)")


def output_bound(g, leaders, rng) -> CheckResult:
    gm = derive_matrices(g)
    n = g.n
    dt = min(1e-3, 0.1 / gm.spectrum.lambda_max)
    worst = 0.0
    for dem in _demotion_sets(leaders, [1, len(leaders)])[:6]:
        best = select_closed_form(leaders, dem)
        pool = [v for v in range(1, n + 1) if v not in dem]
        other = tuple(sorted(rng.choice(pool, size=len(best), replace=False).tolist()))
        for new in dict.fromkeys([best, other]):
            u = InputSignal("exp", tuple(rng.uniform(-1, 1, size=len(leaders))),
                            beta=float(rng.uniform(0.5, 2.0)))
            tr = check_output_bound(gm, leaders, dem, new, u, dt=dt)
            worst = max(worst, tr.slack_ratio)
    return _result("simulate.output_bound", worst, 1.005, "sup gap / (H2 error * ||u||)")


def run_checks(g: WeightedGraph, leaders, seed: int = 0, stop_on_failure: bool = True):
    """Run all checks; returns the list of results (up to the first failure)."""
    leaders = sorted(leaders)
    rng = np.random.default_rng(seed)
    steps = [
        lambda: graph_invariants(g),
        lambda: gramian_oracle(g),
        lambda: structural_formula(g, leaders),
        lambda: closed_form_optimal(g, leaders),
        lambda: demotion_constant(g, leaders),
        lambda: relative_error_at_optimum(g, leaders),
        lambda: h2_oracle(g, leaders),
        lambda: relax_gradient(g, leaders, rng),
        lambda: relax_hessian(g, leaders, rng),
        lambda: relax_descent(g, leaders, rng),
        lambda: output_bound(g, leaders, rng),
    ]
    results = []
    for step in steps:
        res = step()
        results.append(res)
        if not res.passed and stop_on_failure:
            break
    return results
