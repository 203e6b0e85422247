"""Continuous relaxation of the selection problem.

The variable is any real n x m matrix whose demoted columns (index set J)
are zero. On that subspace the objective ``tr((M - X)^T Wo (M - X))`` is a
convex quadratic and ``M_J`` (M with demoted columns zeroed) is a global
minimizer.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SubspacePoint:
    matrix: np.ndarray
    zero_columns: tuple[int, ...] = ()

    def __post_init__(self):
        J = tuple(sorted(set(int(c) for c in self.zero_columns)))
        object.__setattr__(self, "zero_columns", J)
        X = np.array(self.matrix, dtype=float)
        if X.ndim != 2:
            raise ShapeMismatch(f"expected a matrix, got shape {X.shape}", X.shape)
        if J and np.any(X[:, list(J)] != 0):
            raise ValueError(f"columns {J} must be zero")
        X.setflags(write=False)
        object.__setattr__(self, "matrix", X)

    @classmethod
    def project(cls, X, zero_columns) -> "SubspacePoint":
        """Zero the J columns of an arbitrary matrix."""
        X = np.array(X, dtype=float)
        X[:, list(zero_columns)] = 0.0
        return cls(X, tuple(zero_columns))


def masked(M: np.ndarray, J) -> np.ndarray:
    """``M_J``: copy of M with columns J set to zero."""
    MJ = np.array(M, dtype=float)
    MJ[:, list(J)] = 0.0
    return MJ


def _check(Wo, M, X: SubspacePoint):
    if M.shape != X.matrix.shape or Wo.shape != (M.shape[0], M.shape[0]):
        raise ShapeMismatch(
            f"Wo {Wo.shape}, M {M.shape}, X {X.matrix.shape} are incompatible",
            [Wo.shape, M.shape, X.matrix.shape],
        )


def objective(Wo: np.ndarray, M: np.ndarray, X: SubspacePoint) -> float:
    _check(Wo, M, X)
    D = M - X.matrix
    return float(np.sum(D * (Wo @ D)))


def objective_batch(Wo: np.ndarray, M: np.ndarray, Xs: np.ndarray) -> np.ndarray:
    """Objective for a stack of raw matrices of shape (..., n, m)."""
    D = M - Xs
    return np.einsum("...im,ij,...jm->...", D, Wo, D)


def gradient(Wo: np.ndarray, M: np.ndarray, X: SubspacePoint) -> SubspacePoint:
    """Riemannian gradient ``-2 Wo (M_J - X)`` on the subspace."""
    _check(Wo, M, X)
    G = -2.0 * Wo @ (masked(M, X.zero_columns) - X.matrix)
    return SubspacePoint.project(G, X.zero_columns)


def hessian_apply(Wo: np.ndarray, direction: SubspacePoint) -> SubspacePoint:
    """``2 Wo direction``; the same at every base point."""
    return SubspacePoint.project(2.0 * Wo @ direction.matrix, direction.zero_columns)


def finite_difference_gradient(Wo, M, X: SubspacePoint, spacing: float = 1e-4) -> np.ndarray:
    """Central differences of :func:`objective` over the free entries."""
    n, m = X.matrix.shape
    free = [(i, l) for l in range(m) if l not in X.zero_columns for i in range(n)]
    E = np.zeros((len(free), n, m))
    for t, (i, l) in enumerate(free):
        E[t, i, l] = spacing
    plus = objective_batch(Wo, M, X.matrix + E)
    minus = objective_batch(Wo, M, X.matrix - E)
    out = np.zeros((n, m))
    for t, (i, l) in enumerate(free):
        out[i, l] = (plus[t] - minus[t]) / (2.0 * spacing)
    return out


@dataclass
class DescentTrace:
    iterates: list = field(default_factory=list)  # (iteration, objective, grad norm)
    final: SubspacePoint | None = None
    converged: bool = False

    @property
    def final_objective(self) -> float:
        return self.iterates[-1][1]

    @property
    def iterations(self) -> int:
        return self.iterates[-1][0]


def solve_relaxed(
    Wo: np.ndarray,
    M: np.ndarray,
    J,
    x0: SubspacePoint | None = None,
    step: float = 0.9,
    tol: float = 1e-9,
    max_iter: int = 10_000,
) -> DescentTrace:
    """Fixed-step gradient descent on the relaxed objective.

    The gradient is 1-Lipschitz (``2 ||Wo|| = 1``), so any step in (0, 1]
    decreases the objective monotonically. Stops when the gradient's
    Frobenius norm drops below ``tol``; otherwise returns the trace with
    ``converged=False`` after ``max_iter`` steps.
    """
    if not 0 < step <= 1:
        raise ValueError(f"step must lie in (0, 1], got {step}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    J = tuple(sorted(set(J)))
    if x0 is None:
        x0 = SubspacePoint(np.zeros_like(M, dtype=float), J)
    elif x0.zero_columns != J:
        x0 = SubspacePoint.project(x0.matrix, J)

    X = x0
    trace = DescentTrace()
    for it in range(max_iter + 1):
        grad = gradient(Wo, M, X)
        gnorm = float(np.linalg.norm(grad.matrix))
        trace.iterates.append((it, objective(Wo, M, X), gnorm))
        if gnorm < tol:
            trace.converged = True
            break
        if it == max_iter:
            break
        X = SubspacePoint(X.matrix - step * grad.matrix, J)
    trace.final = X
    if not trace.converged:
        log.warning("descent stopped after %d iterations, |grad| = %.3g", max_iter, gnorm)
    return trace


def range_projection(X: np.ndarray) -> np.ndarray:
    """Remove the column means: projection of each column onto range(Wo)."""
    return X - X.mean(axis=0, keepdims=True)
