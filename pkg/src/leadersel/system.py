"""Leader configurations, input matrices, the observability Gramian and
pointwise transfer-function evaluation for the consensus system

    x' = -L x + M u,    y = W^{1/2} R^T x.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import (
    DemotedReselected,
    InvalidVertex,
    MultipleZeroEigenvalues,
    NotASubset,
    PoleEvaluation,
    SizeMismatch,
)
from .graph import GraphMatrices

ZERO_EIG_RTOL = 1e-9


@dataclass(frozen=True)
class LeaderAssignment:
    """Original leaders, the demoted subset, and the labeled new leaders.

    ``leaders`` is ascending; column ``l`` of the input matrix belongs to
    ``leaders[l]``. ``new_leaders[l]`` is ``None`` for demoted positions.
    """

    n: int
    leaders: tuple[int, ...]
    demoted: frozenset[int]
    new_leaders: tuple[Optional[int], ...]

    @property
    def m(self) -> int:
        return len(self.leaders)

    @property
    def r(self) -> int:
        return len(self.demoted)

    @property
    def zero_columns(self) -> tuple[int, ...]:
        """0-based column positions of demoted leaders (the index set J)."""
        return tuple(l for l, v in enumerate(self.leaders) if v in self.demoted)

    @property
    def new_set(self) -> tuple[int, ...]:
        return tuple(sorted(v for v in self.new_leaders if v is not None))

    @property
    def mismatches(self) -> int:
        """Surviving positions whose new leader differs from the original one."""
        return sum(
            1
            for v, nv in zip(self.leaders, self.new_leaders)
            if nv is not None and nv != v
        )

    def to_dict(self) -> dict:
        return {
            "leaders": list(self.leaders),
            "demoted": sorted(self.demoted),
            "new_leaders": list(self.new_set),
        }


def check_vertices(vs: Iterable[int], n: int, what: str) -> frozenset[int]:
    out = []
    for v in vs:
        if int(v) != v or not 1 <= v <= n:
            raise InvalidVertex(f"{what} vertex {v} outside 1..{n}", v)
        out.append(int(v))
    if len(set(out)) != len(out):
        raise SizeMismatch(f"{what} contains repeated vertices: {out}", out)
    return frozenset(out)


def assignment_from_sets(n: int, leaders, demoted, new_set) -> LeaderAssignment:
    """Label an unordered new-leader set against the original leaders.

    The sorted new leaders fill the non-demoted column positions in
    ascending position order.
    """
    leaders, demoted = list(leaders), list(demoted)
    if not set(demoted) <= set(leaders):
        stray = sorted(set(demoted) - set(leaders))
        raise NotASubset(f"demoted {stray} are not leaders", stray)
    lead = check_vertices(leaders, n, "leader")
    if not lead:
        raise SizeMismatch("at least one leader is required", [])
    dem = check_vertices(demoted, n, "demoted")
    new = check_vertices(new_set, n, "new leader")
    if new & dem:
        raise DemotedReselected(f"demoted vertices {sorted(new & dem)} reselected", sorted(new & dem))
    if len(new) != len(lead) - len(dem):
        raise SizeMismatch(
            f"need {len(lead) - len(dem)} new leaders, got {len(new)}",
            {"expected": len(lead) - len(dem), "got": len(new)},
        )
    ordered = tuple(sorted(lead))
    fill = iter(sorted(new))
    labeled = tuple(None if v in dem else next(fill) for v in ordered)
    return LeaderAssignment(n, ordered, dem, labeled)


def build_input_matrix(a: LeaderAssignment, which: str = "original") -> np.ndarray:
    """0/1 input matrix M (``which="original"``) or M-tilde (``"new"``)."""
    if which == "original":
        cols = a.leaders
    elif which == "new":
        cols = a.new_leaders
    else:
        raise ValueError(f"which must be 'original' or 'new', got {which!r}")
    M = np.zeros((a.n, a.m))
    for l, v in enumerate(cols):
        if v is not None:
            M[v - 1, l] = 1.0
    return M


def in_selection_set(Mt: np.ndarray, J) -> bool:
    """Membership test for 0/1 matrices with zero columns J and distinct
    unit-vector columns elsewhere."""
    J = set(J)
    if not np.all((Mt == 0) | (Mt == 1)):
        return False
    seen = set()
    for l in range(Mt.shape[1]):
        col = Mt[:, l]
        if l in J:
            if col.any():
                return False
            continue
        nz = np.flatnonzero(col)
        if nz.size != 1 or nz[0] in seen:
            return False
        seen.add(int(nz[0]))
    return True


def observability_gramian(n: int) -> np.ndarray:
    """Closed form ``I/2 - 11^T/(2n)``; independent of the graph's edges."""
    if n < 2:
        raise InvalidVertex(f"need n >= 2, got {n}", n)
    return 0.5 * np.eye(n) - np.full((n, n), 0.5 / n)


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    eigvals: np.ndarray  # nonzero eigenvalues, ascending
    eigvecs: np.ndarray  # matching orthonormal columns
    kernel: np.ndarray   # unit vector spanning ker L
    output_modes: np.ndarray  # W^{1/2} R^T q_i, one column per nonzero mode

    @property
    def algebraic_connectivity(self) -> float:
        return float(self.eigvals[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigvals[-1])


def laplacian_spectrum(gm: GraphMatrices) -> LaplacianSpectrum:
    lam, Q = np.linalg.eigh(gm.L)
    thresh = ZERO_EIG_RTOL * max(1.0, float(lam[-1]))
    zero = lam < thresh
    if zero.sum() != 1:
        raise MultipleZeroEigenvalues(
            f"{int(zero.sum())} Laplacian eigenvalues below {thresh:.3g}",
            lam[zero].tolist(),
        )
    Qp = Q[:, ~zero]
    return LaplacianSpectrum(
        eigvals=lam[~zero],
        eigvecs=Qp,
        kernel=Q[:, zero][:, 0],
        output_modes=gm.output_map @ Qp,
    )


def gramian_spectral_oracle(L: np.ndarray) -> np.ndarray:
    """Evaluate the integral of ``exp(-Lt) L exp(-Lt)`` mode by mode.

    Each nonzero eigenpair contributes ``lambda / (2 lambda) q q^T``.
    """
    lam, Q = np.linalg.eigh(L)
    thresh = ZERO_EIG_RTOL * max(1.0, float(lam[-1]))
    pos = lam >= thresh
    if (~pos).sum() != 1:
        raise MultipleZeroEigenvalues(
            f"{int((~pos).sum())} Laplacian eigenvalues below {thresh:.3g}",
            lam[~pos].tolist(),
        )
    Qp, lp = Q[:, pos], lam[pos]
    weights = lp / (2.0 * lp)
    return (Qp * weights) @ Qp.T


def transfer_eval(gm: GraphMatrices, Min: np.ndarray, s: complex) -> np.ndarray:
    """``W^{1/2} R^T (sI + L)^{-1} Min`` as a k x m complex matrix.

    The kernel mode of L is annihilated by R^T, so only nonzero modes are
    summed and s = 0 (or any point on the imaginary axis) is finite.
    """
    return transfer_eval_many(gm, Min, np.atleast_1d(np.asarray(s, dtype=complex)))[0]


def transfer_eval_many(gm: GraphMatrices, Min: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Vectorized :func:`transfer_eval` over an array of points; shape (len(s), k, m)."""
    sp = gm.spectrum
    s = np.asarray(s, dtype=complex).ravel()
    denom = s[:, None] + sp.eigvals[None, :]
    tol = 1e-12 * np.maximum(1.0, sp.eigvals)
    hit = np.abs(denom) <= tol
    if hit.any():
        idx = np.argwhere(hit)[0]
        raise PoleEvaluation(
            f"s = {s[idx[0]]} is a pole (-lambda = {-sp.eigvals[idx[1]]:.6g})",
            [s[idx[0]].real, s[idx[0]].imag],
        )
    proj = sp.eigvecs.T @ Min  # modes x m
    return sp.output_modes @ ((1.0 / denom)[:, :, None] * proj[None, :, :])


def transfer_eval_dense(gm: GraphMatrices, Min: np.ndarray, s: complex) -> np.ndarray:
    """Dense-solve counterpart of :func:`transfer_eval`, used as a check."""
    n = gm.n
    if s == 0:
        P = np.eye(n) - np.full((n, n), 1.0 / n)
        X = np.linalg.solve(gm.L + np.full((n, n), 1.0 / n), P @ Min)
    else:
        X = np.linalg.solve(s * np.eye(n) + gm.L, Min.astype(complex))
    return gm.output_map @ X


def parse_leader_config(text: str, n: int) -> dict:
    """Read ``{"leaders": [...], "demoted": [...], "new_leaders": [...]}``.

    ``new_leaders`` may be absent. Vertex ranges are validated against n.
    """
    obj = json.loads(text)
    leaders = sorted(check_vertices(obj["leaders"], n, "leader"))
    demoted = sorted(check_vertices(obj.get("demoted", []), n, "demoted"))
    new = obj.get("new_leaders")
    if new is not None:
        new = sorted(check_vertices(new, n, "new leader"))
    return {"leaders": leaders, "demoted": demoted, "new_leaders": new}
