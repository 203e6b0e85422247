"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (JSON description on
stderr), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .errors import LeaderSelError, MaxIterExceeded
from .graph import (
    GRAPH_KINDS,
    WEIGHT_MODES,
    derive_matrices,
    generate_graph,
    graph_to_csv,
    graph_to_json,
    load_graph,
)
from .metrics import h2_report
from .relaxation import SubspacePoint, solve_relaxed
from .selection import (
    DEFAULT_CAP,
    SelectionReport,
    evaluate_selection,
    select_bruteforce,
    select_closed_form,
    demotion_costs,
)
from .simulate import parse_input, check_output_bound
from .system import assignment_from_sets, build_input_matrix, observability_gramian
from .verify import CheckFailed, run_checks

log = logging.getLogger("leadersel")


class UsageError(Exception):
    pass


def format_table(report: SelectionReport, decimals: int = 4) -> str:
    """CSV with one row per candidate set: ``new_leaders,f``.

    Rows are in lexicographic order of the set; values are rounded half-even.
    """
    if decimals < 1:
        raise ValueError(f"decimals must be >= 1, got {decimals}")
    quantum = Decimal(1).scaleb(-decimals)
    rows = sorted(report.candidates)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["new_leaders", "f"])
    for s, f in rows:
        writer.writerow([_set_label(s), str(Decimal(repr(f)).quantize(quantum, rounding=ROUND_HALF_EVEN))])
    return buf.getvalue()


def _vertices(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated vertex ids, got {text!r}")


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _set_label(vs) -> str:
    return "{" + ",".join(str(v) for v in vs) + "}"


# -- commands ----------------------------------------------------------------

def cmd_validate(args):
    g = load_graph(args.graph)
    gm = derive_matrices(g)
    sp = gm.spectrum
    resid = float(np.linalg.norm(gm.L - gm.R @ gm.W @ gm.R.T))
    out = {
        "n": g.n,
        "k": g.k,
        "edges": [list(e) for e in g.edges],
        "degrees": np.diag(gm.D).tolist(),
        "algebraic_connectivity": sp.algebraic_connectivity,
        "lambda_max": sp.lambda_max,
        "laplacian_residual": resid,
    }
    _emit(args, _dump(out))


def cmd_gen(args):
    if args.weights == "loguniform" and args.seed is None:
        raise UsageError("--weights loguniform needs --seed")
    if args.kind == "random" and args.seed is None:
        raise UsageError("--kind random needs --seed")
    g = generate_graph(args.kind, args.n, seed=args.seed or 0, edge_prob=args.p,
                       weights=args.weights)
    _emit(args, graph_to_csv(g) if args.format == "csv" else graph_to_json(g) + "\n")


def cmd_h2norm(args):
    g = load_graph(args.graph)
    new = args.new if args.new is not None else select_closed_form(args.leaders, args.demote)
    a = assignment_from_sets(g.n, args.leaders, args.demote, new)
    gm = None if args.no_oracle else derive_matrices(g)
    rep = h2_report(a, gm, omega_max=args.omega_max, n_points=args.points)
    if args.format == "csv":
        o = rep.oracle
        _emit(args, _csv_text(
            ["f", "g_norm_sq", "rel_error", "oracle_estimate", "oracle_tolerance"],
            [[rep.f_value, rep.g_norm_sq, rep.rel_error,
              o.estimate if o else "", o.tolerance if o else ""]],
        ))
    else:
        _emit(args, _dump(rep.to_dict()))


def cmd_select(args):
    g = load_graph(args.graph)
    if args.sample is not None and args.seed is None:
        raise UsageError("--sample needs --seed")
    if args.sample is not None and not args.brute_force:
        raise UsageError("--sample only applies with --brute-force")
    if args.brute_force:
        rep = select_bruteforce(g, args.leaders, args.demote, cap=args.cap,
                                        sample=args.sample, seed=args.seed)
        if args.format == "csv":
            _emit(args, _csv_text(["new_leaders", "f"],
                                  [[_set_label(s), repr(f)] for s, f in rep.candidates]))
        else:
            _emit(args, _dump(rep.to_dict()))
        return
    best = select_closed_form(args.leaders, args.demote)
    f = evaluate_selection(g.n, args.leaders, args.demote, best)
    if args.format == "csv":
        _emit(args, _csv_text(["new_leaders", "f"], [[_set_label(best), repr(f)]]))
    else:
        _emit(args, _dump({"leaders": sorted(args.leaders), "demoted": sorted(args.demote),
                           "closed_form_solution": list(best), "min_f": f}))


def cmd_demote(args):
    g = load_graph(args.graph)
    rep = demotion_costs(g, args.leaders, args.r, cap=args.cap, exhaustive=args.brute_force)
    if args.format == "csv":
        _emit(args, _csv_text(["demoted", "new_leaders", "g"],
                              [[_set_label(d), _set_label(s), repr(v)] for d, s, v in rep.entries]))
    else:
        _emit(args, _dump(rep.to_dict()))
    if not rep.consistent:
        raise LeaderSelError(f"demotion costs differ by {rep.max_deviation:.3g}", rep.max_deviation)


def cmd_table(args):
    g = load_graph(args.graph)
    rep = select_bruteforce(g, args.leaders, args.demote, cap=args.cap)
    _emit(args, format_table(rep, args.decimals))


def cmd_relax(args):
    g = load_graph(args.graph)
    if args.x0 == "random" and args.seed is None:
        raise UsageError("--x0 random needs --seed")
    leaders = sorted(args.leaders)
    a = assignment_from_sets(g.n, leaders, args.demote,
                             select_closed_form(leaders, args.demote))
    J = a.zero_columns
    Wo = observability_gramian(g.n)
    M = build_input_matrix(a, "original")
    x0 = None
    if args.x0 == "random":
        rng = np.random.default_rng(args.seed)
        x0 = SubspacePoint.project(rng.uniform(-10, 10, size=M.shape), J)
    tr = solve_relaxed(Wo, M, J, x0=x0, step=args.step, tol=args.tol, max_iter=args.max_iter)
    trace_csv = _csv_text(["iter", "h", "grad_norm"],
                          [[i, repr(h), repr(gn)] for i, h, gn in tr.iterates])
    summary = {
        "converged": tr.converged,
        "iterations": tr.iterations,
        "final_objective": tr.final_objective,
        "target": float(0.5 * len(J) * (1 - 1 / g.n)),
        "final_grad_norm": tr.iterates[-1][2],
        "zero_columns": [j + 1 for j in J],
    }
    _emit(args, trace_csv)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(_dump(summary))
    elif args.out not in (None, "-"):
        sys.stdout.write(_dump(summary))
    if not tr.converged:
        raise MaxIterExceeded(f"no convergence in {args.max_iter} iterations", tr.iterations)


def cmd_simulate(args):
    g = load_graph(args.graph)
    gm = derive_matrices(g)
    try:
        u = parse_input(args.input)
    except ValueError as exc:
        raise UsageError(str(exc))
    T = None if args.T == "auto" else float(args.T)
    tr = check_output_bound(gm, args.leaders, args.demote, args.new, u, dt=args.dt, T=T)
    n = g.n
    header = ["t"] + [f"x_{i}" for i in range(1, n + 1)] + [f"xt_{i}" for i in range(1, n + 1)] + ["gap"]
    idx = np.arange(0, tr.t.size, args.stride)
    if idx[-1] != tr.t.size - 1:
        idx = np.append(idx, tr.t.size - 1)
    block = np.column_stack([tr.t[idx], tr.x[idx], tr.x_tilde[idx], tr.gap[idx]])
    rows = ([repr(float(v)) for v in row] for row in block)
    summary = {"input": u.to_dict(), **tr.summary()}
    _emit(args, _csv_text(header, rows))
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(_dump(summary))
    elif args.out not in (None, "-"):
        sys.stdout.write(_dump(summary))


def cmd_verify(args):
    g = load_graph(args.graph)
    results = run_checks(g, args.leaders, seed=args.seed)
    _emit(args, _dump({"checks": [r.to_dict() for r in results],
                       "passed": all(r.passed for r in results)}))
    for r in results:
        if not r.passed:
            raise CheckFailed(r)


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leadersel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=True):
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        if formats:
            sp.add_argument("--format", choices=("json", "csv"), default="json")

    def graph_arg(sp):
        sp.add_argument("--graph", required=True, help="graph file (.json or .csv)")

    def leaders_arg(sp, demote=True):
        sp.add_argument("--leaders", type=_vertices, required=True, help="e.g. 1,2,3")
        if demote:
            sp.add_argument("--demote", type=_vertices, default=[], help="e.g. 1")

    sp = sub.add_parser("validate", help="check a graph and print its invariants")
    graph_arg(sp)
    common(sp, formats=False)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("gen", help="generate a test graph")
    sp.add_argument("--kind", choices=GRAPH_KINDS, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--p", type=float, default=0.5, help="edge probability (random)")
    sp.add_argument("--weights", choices=WEIGHT_MODES, default="unit")
    common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("h2norm", help="H2 error of a new leader set")
    graph_arg(sp)
    leaders_arg(sp)
    sp.add_argument("--new", type=_vertices, default=None,
                    help="new leaders (default: surviving originals)")
    sp.add_argument("--no-oracle", action="store_true", help="skip the quadrature check")
    sp.add_argument("--omega-max", type=float, default=1e3)
    sp.add_argument("--points", type=int, default=100_001)
    common(sp)
    sp.set_defaults(func=cmd_h2norm)

    sp = sub.add_parser("select", help="choose new leaders for a fixed demotion set")
    graph_arg(sp)
    leaders_arg(sp)
    sp.add_argument("--brute-force", action="store_true")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--sample", type=int, default=None,
                    help="sample this many subsets when the cap is exceeded")
    sp.add_argument("--seed", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("demote", help="cost of every size-r demotion set")
    graph_arg(sp)
    leaders_arg(sp, demote=False)
    sp.add_argument("-r", type=int, required=True)
    sp.add_argument("--brute-force", action="store_true",
                    help="minimize over all new-leader sets instead of using the closed form")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common(sp)
    sp.set_defaults(func=cmd_demote)

    sp = sub.add_parser("table", help="candidate-set table as CSV")
    graph_arg(sp)
    leaders_arg(sp)
    sp.add_argument("--decimals", type=int, default=4)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common(sp, formats=False)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("relax", help="gradient descent on the relaxed problem")
    graph_arg(sp)
    leaders_arg(sp)
    sp.add_argument("--x0", choices=("zero", "random"), default="zero")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--step", type=float, default=0.9)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--max-iter", type=int, default=10_000)
    sp.add_argument("--summary", default=None, help="write the JSON summary here")
    common(sp, formats=False)
    sp.set_defaults(func=cmd_relax)

    sp = sub.add_parser("simulate", help="simulate both systems and check the output bound")
    graph_arg(sp)
    leaders_arg(sp)
    sp.add_argument("--new", type=_vertices, required=True)
    sp.add_argument("--input", default="exp:alpha=1,beta=1")
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("-T", default="auto", help="horizon or 'auto'")
    sp.add_argument("--stride", type=int, default=1, help="write every k-th sample")
    sp.add_argument("--summary", default=None, help="write the JSON summary here")
    common(sp, formats=False)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run every numerical check")
    graph_arg(sp)
    leaders_arg(sp, demote=False)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, formats=False)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LEADERSEL_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "T", "auto") != "auto":
        try:
            float(args.T)
        except ValueError:
            parser.error(f"-T must be a number or 'auto', got {args.T!r}")
    if getattr(args, "stride", 1) < 1:
        parser.error("--stride must be >= 1")
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except LeaderSelError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), default=_jsonable) + "\n")
        return 1
    except ValueError as exc:
        parser.error(str(exc))
    except CheckFailed as exc:
        sys.stderr.write(json.dumps({"error": "CheckFailed", "message": str(exc),
                                     "datum": exc.result.to_dict()}) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "IOError", "message": str(exc),
                                     "datum": getattr(exc, "filename", None)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
