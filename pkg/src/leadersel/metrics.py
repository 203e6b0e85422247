"""H2 norms and errors between the original and the new leader systems."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .errors import ShapeMismatch, ZeroNorm
from .graph import GraphMatrices
from .system import (
    LeaderAssignment,
    build_input_matrix,
    observability_gramian,
    transfer_eval_many,
)

# Largest number of complex entries evaluated per quadrature chunk.
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class QuadratureEstimate:
    estimate: float
    tolerance: float
    truncated: float         # quadrature over [-omega_max, omega_max] only
    tail_term: float         # analytic correction for |w| > omega_max
    tail_bound: float        # bound on the error of tail_term
    quadrature_bound: float  # Simpson error bound
    omega_max: float
    n_points: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "tolerance": self.tolerance}


@dataclass(frozen=True)
class H2Report:
    f_value: float
    g_norm_sq: float
    rel_error: float
    oracle: Optional[QuadratureEstimate] = None

    def to_dict(self) -> dict:
        return {
            "f": self.f_value,
            "g_norm_sq": self.g_norm_sq,
            "rel_error": self.rel_error,
            "oracle": self.oracle.to_dict() if self.oracle else None,
        }


def _quad_form(Wo: np.ndarray, X: np.ndarray) -> float:
    # tr(X^T Wo X)
    return float(np.sum(X * (Wo @ X)))


def h2_error_sq(Wo: np.ndarray, M: np.ndarray, Mt: np.ndarray) -> float:
    """Squared H2 distance ``tr((M - Mt)^T Wo (M - Mt))``."""
    if M.shape != Mt.shape:
        raise ShapeMismatch(f"M is {M.shape} but Mt is {Mt.shape}", [M.shape, Mt.shape])
    if Wo.shape != (M.shape[0], M.shape[0]):
        raise ShapeMismatch(f"Gramian is {Wo.shape}, inputs have {M.shape[0]} rows", Wo.shape)
    return _quad_form(Wo, M - Mt)


def h2_norm_sq(Wo: np.ndarray, M: np.ndarray) -> float:
    """``tr(M^T Wo M)``; equals ``m/2 (1 - 1/n)`` for any leader placement."""
    return _quad_form(Wo, M)


def relative_error(f_value: float, g_norm_sq: float) -> float:
    if not g_norm_sq > 0:
        raise ZeroNorm("reference system has zero H2 norm (no leaders)", g_norm_sq)
    return math.sqrt(max(f_value, 0.0) / g_norm_sq)


def structural_h2_formula(n: int, r: int, d: int) -> float:
    """``r/2 (1 - 1/n) + d``: the trace form specialised to 0/1 inputs.

    A demoted column contributes ``e_v^T Wo e_v = (1 - 1/n)/2``; a surviving
    column relabelled to a different vertex contributes
    ``(e_a - e_b)^T Wo (e_a - e_b) = 1``; an unchanged column contributes 0.
    """
    return 0.5 * r * (1.0 - 1.0 / n) + d


def h2_report(a: LeaderAssignment, gm: Optional[GraphMatrices] = None, *,
              omega_max: float = 1e3, n_points: int = 100_001) -> H2Report:
    """f, ||G||^2 and the relative error for an assignment; adds the
    frequency-domain oracle when graph matrices are given."""
    Wo = observability_gramian(a.n)
    M = build_input_matrix(a, "original")
    Mt = build_input_matrix(a, "new")
    f = h2_error_sq(Wo, M, Mt)
    g = h2_norm_sq(Wo, M)
    oracle = None
    if gm is not None:
        oracle = h2_error_quadrature_oracle(gm, M, Mt, omega_max, n_points)
    return H2Report(f, g, relative_error(f, g), oracle)


def h2_error_quadrature_oracle(
    gm: GraphMatrices,
    M: np.ndarray,
    Mt: np.ndarray,
    omega_max: float = 1e3,
    n_points: int = 100_001,
) -> QuadratureEstimate:
    """Estimate ``||G - Gt||_H2^2`` by integrating ``||G(iw) - Gt(iw)||_F^2``.

    Composite Simpson on [0, omega_max] (the integrand is even) plus an
    analytic tail. Per mode the integrand is ``lam c / (w^2 + lam^2)``, so
    the two-sided tail is ``sum c (pi/2 - atan(omega_max/lam)) / pi``.
    For ``omega_max > lam_max`` the alternating series
    ``pi/2 - atan(x) = 1/x - 1/(3x^3) + 1/(5x^5) - ...`` puts the tail within
    ``C5 / (5 pi omega_max^5)`` above ``C1 / (pi omega_max) - C3 / (3 pi omega_max^3)``,
    where ``Cj = ||W^{1/2} R^T L^((j-1)/2) X||_F^2 = sum c lam^j`` and
    ``X = M - Mt``. The Simpson error is bounded using
    ``|d^4/dw^4 lam/(w^2 + lam^2)| <= 24 / lam^5``.

    ``tolerance`` is the tail bound plus the Simpson bound plus a round-off
    allowance, so ``|estimate - true value| <= tolerance``.
    """
    if M.shape != Mt.shape:
        raise ShapeMismatch(f"M is {M.shape} but Mt is {Mt.shape}", [M.shape, Mt.shape])
    if not omega_max > 0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    if n_points < 100:
        raise ValueError(f"need at least 100 quadrature points, got {n_points}")
    if n_points % 2 == 0:
        n_points += 1

    sp = gm.spectrum
    if omega_max <= sp.lambda_max:
        raise ValueError(
            f"omega_max={omega_max:.6g} must exceed lambda_max={sp.lambda_max:.6g} "
            "for the tail bound to hold"
        )

    omega = np.linspace(0.0, omega_max, n_points)
    k, m = gm.k, M.shape[1]
    chunk = max(1, _CHUNK_ENTRIES // max(1, k * m))
    integrand = np.empty(n_points)
    for start in range(0, n_points, chunk):
        s = 1j * omega[start:start + chunk]
        diff = transfer_eval_many(gm, M, s) - transfer_eval_many(gm, Mt, s)
        integrand[start:start + chunk] = np.sum(diff.real**2 + diff.imag**2, axis=(1, 2))
    truncated = float(2.0 * simpson(integrand, x=omega) / (2.0 * math.pi))

    X = M - Mt
    LX = gm.L @ X
    C1 = float(np.sum((gm.output_map @ X) ** 2))
    C3 = float(np.sum((gm.output_map @ LX) ** 2))
    C5 = float(np.sum((gm.output_map @ (gm.L @ LX)) ** 2))
    tail_term = C1 / (math.pi * omega_max) - C3 / (3.0 * math.pi * omega_max**3)
    tail_bound = C5 / (5.0 * math.pi * omega_max**5)

    modal = np.sum((sp.eigvecs.T @ X) ** 2, axis=1)
    h = omega_max / (n_points - 1)
    d4 = 24.0 * float(np.sum(modal / sp.eigvals**5))
    quad_bound = (omega_max * h**4 * d4 / 180.0) / math.pi

    estimate = truncated + tail_term
    tol = tail_bound + quad_bound + 1e-12 * (1.0 + abs(estimate))
    return QuadratureEstimate(
        estimate, tol, truncated, tail_term, tail_bound, quad_bound, float(omega_max), int(n_points)
    )
