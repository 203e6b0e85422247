"""Leader selection (fixed demotion set) and leader demotion solvers."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import CombinatorialBlowup, NotASubset, SizeMismatch
from .graph import WeightedGraph
from .metrics import h2_error_sq, structural_h2_formula
from .system import (
    check_vertices,
    assignment_from_sets,
    build_input_matrix,
    observability_gramian,
)

DEFAULT_CAP = 10**7
TIE_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class SelectionReport:
    n: int
    leaders: tuple[int, ...]
    demoted: tuple[int, ...]
    sets: np.ndarray    # (count, m - r) candidate new-leader sets, 1-based, ascending rows
    values: np.ndarray  # f for each candidate
    closed_form_solution: tuple[int, ...]
    exhaustive: bool = True
    total_candidates: int = 0

    @property
    def candidates(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(int(v) for v in row), float(f)) for row, f in zip(self.sets, self.values)]

    @property
    def min_f(self) -> float:
        return float(self.values.min()) if self.values.size else math.nan

    @property
    def minimizers(self) -> list[tuple[int, ...]]:
        if not self.values.size:
            return []
        hit = self.values <= self.min_f + TIE_ATOL
        return [tuple(int(v) for v in row) for row in self.sets[hit]]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "leaders": list(self.leaders),
            "demoted": list(self.demoted),
            "exhaustive": self.exhaustive,
            "total_candidates": self.total_candidates,
            "evaluated": int(self.values.size),
            "candidates": [{"new_leaders": list(s), "f": f} for s, f in self.candidates],
            "minimizers": [list(s) for s in self.minimizers],
            "closed_form_solution": list(self.closed_form_solution),
            "min_f": self.min_f,
        }


@dataclass(frozen=True)
class DemotionReport:
    n: int
    leaders: tuple[int, ...]
    r: int
    entries: list = field(default_factory=list)  # (demoted, new_leaders, g)
    constant: float = 0.0

    @property
    def max_deviation(self) -> float:
        return max((abs(g - self.constant) for _, _, g in self.entries), default=0.0)

    @property
    def consistent(self) -> bool:
        return self.max_deviation <= 1e-12

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "leaders": list(self.leaders),
            "r": self.r,
            "constant": self.constant,
            "max_deviation": self.max_deviation,
            "entries": [
                {"demoted": list(d), "new_leaders": list(s), "g": g} for d, s, g in self.entries
            ],
        }


def select_closed_form(leaders, demoted) -> tuple[int, ...]:
    """Keep every original leader that was not demoted."""
    lead, dem = set(leaders), set(demoted)
    if not dem <= lead:
        raise NotASubset(f"demoted {sorted(dem - lead)} are not leaders", sorted(dem - lead))
    return tuple(sorted(lead - dem))


def select_bruteforce(
    g: WeightedGraph,
    leaders,
    demoted,
    cap: int = DEFAULT_CAP,
    sample: Optional[int] = None,
    seed: Optional[int] = None,
    backend: Optional[str] = None,
) -> SelectionReport:
    """Evaluate f for every admissible new-leader set.

    Candidates are size-(m - r) subsets of V minus the demoted set, taken in
    lexicographic order and labelled with the ascending-position convention
    of :func:`~leadersel.system.assignment_from_sets`.

    When the count exceeds ``cap`` a ``CombinatorialBlowup`` is raised,
    unless ``sample`` is given: then ``sample`` subsets are drawn uniformly
    with ``seed`` and the report is flagged non-exhaustive.
    """
    n = g.n
    closed = select_closed_form(leaders, demoted)
    lead = tuple(sorted(check_vertices(leaders, n, "leader")))
    dem = check_vertices(demoted, n, "demoted")
    if not lead:
        raise SizeMismatch("at least one leader is required", [])
    pool = [v for v in range(1, n + 1) if v not in dem]
    q = len(lead) - len(dem)
    count = math.comb(len(pool), q)
    Wo = observability_gramian(n)
    orig = np.array(lead) - 1
    zero_cols = [l for l, v in enumerate(lead) if v in dem]

    if count > cap:
        if sample is None:
            raise CombinatorialBlowup(
                f"{count} candidate sets exceed the cap of {cap}",
                {"count": count, "cap": cap},
            )
        if seed is None:
            raise ValueError("sampling mode needs an explicit seed")
        return _sampled(n, lead, dem, pool, q, count, Wo, closed, sample, seed)

    combos, values = kernels.score_combinations(
        Wo, orig, zero_cols, np.array(pool) - 1, q, count, backend=backend
    )
    return SelectionReport(
        n=n,
        leaders=lead,
        demoted=tuple(sorted(dem)),
        sets=combos + 1,
        values=values,
        closed_form_solution=closed,
        exhaustive=True,
        total_candidates=count,
    )


def _sampled(n, lead, dem, pool, q, count, Wo, closed, sample, seed):
    rng = np.random.default_rng(seed)
    pool = np.array(pool)
    drawn = {tuple(sorted(int(v) for v in rng.choice(pool, size=q, replace=False)))
             for _ in range(int(sample))}
    sets = sorted(drawn)
    M = build_input_matrix(assignment_from_sets(n, lead, dem, closed), "original")
    values = []
    for s in sets:
        Mt = build_input_matrix(assignment_from_sets(n, lead, dem, s), "new")
        values.append(h2_error_sq(Wo, M, Mt))
    return SelectionReport(
        n=n,
        leaders=lead,
        demoted=tuple(sorted(dem)),
        sets=np.array(sets, dtype=np.int64).reshape(len(sets), q),
        values=np.array(values),
        closed_form_solution=closed,
        exhaustive=False,
        total_candidates=count,
    )


def evaluate_selection(n: int, leaders, demoted, new_set) -> float:
    """f for one labelled new-leader set, via the trace form."""
    a = assignment_from_sets(n, leaders, demoted, new_set)
    Wo = observability_gramian(n)
    return h2_error_sq(Wo, build_input_matrix(a, "original"), build_input_matrix(a, "new"))


def demotion_costs(g: WeightedGraph, leaders, r: int, cap: int = DEFAULT_CAP,
                   exhaustive: bool = False, backend: Optional[str] = None) -> DemotionReport:
    """Optimal selection cost g for every size-r demotion set.

    By default g is evaluated at the closed-form selection. With
    ``exhaustive=True`` it is the brute-force minimum instead, which does not
    rely on the closed form being optimal.
    """
    n = g.n
    lead = tuple(sorted(check_vertices(leaders, n, "leader")))
    m = len(lead)
    if not 1 <= r <= m:
        raise SizeMismatch(f"r must lie in 1..{m}, got {r}", r)
    count = math.comb(m, r)
    if count > cap:
        raise CombinatorialBlowup(
            f"{count} demotion sets exceed the cap of {cap}", {"count": count, "cap": cap}
        )
    entries = []
    for dem in itertools.combinations(lead, r):
        if exhaustive:
            rep = select_bruteforce(g, lead, dem, cap=cap, backend=backend)
            entries.append((dem, rep.minimizers[0], rep.min_f))
        else:
            best = select_closed_form(lead, dem)
            entries.append((dem, best, evaluate_selection(n, lead, dem, best)))
    return DemotionReport(
        n=n, leaders=lead, r=r, entries=entries, constant=structural_h2_formula(n, r, 0)
    )
