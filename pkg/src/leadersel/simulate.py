"""Time-domain simulation of the original and new leader systems and an
empirical check of the output bound

    sup_t ||y(t) - y~(t)|| <= ||G - G~||_H2 * ||u||_L2

for forced responses from the zero state.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import StepTooLarge
from .graph import GraphMatrices
from .metrics import h2_error_sq
from .system import assignment_from_sets, build_input_matrix, observability_gramian

log = logging.getLogger(__name__)

STABILITY_LIMIT = 2.5
SLACK_TOL = 5e-3
INPUT_KINDS = ("exp", "pulse", "zero")


@dataclass(frozen=True)
class InputSignal:
    """Per-channel input ``u_l(t)``.

    ``exp``: ``alpha_l * exp(-beta t)``; ``pulse``: ``alpha_l`` on
    ``[0, width)`` and zero afterwards; ``zero``: identically zero.
    A scalar ``alpha`` is broadcast to every channel.
    """

    kind: str = "exp"
    alpha: tuple[float, ...] | float = 1.0
    beta: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in INPUT_KINDS:
            raise ValueError(f"unknown input kind {self.kind!r}; choose from {INPUT_KINDS}")
        if self.kind == "exp" and not self.beta > 0:
            raise ValueError(f"decay rate must be positive, got {self.beta}")
        if self.kind == "pulse" and not self.width > 0:
            raise ValueError(f"pulse width must be positive, got {self.width}")

    def amplitudes(self, m: int) -> np.ndarray:
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if a.size == 1:
            return np.full(m, a[0])
        if a.size != m:
            raise ValueError(f"{a.size} amplitudes given for {m} input channels")
        return a

    def sample(self, t: np.ndarray, m: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a = self.amplitudes(m)
        if self.kind == "zero":
            return np.zeros((t.size, m))
        if self.kind == "exp":
            return np.exp(-self.beta * t)[:, None] * a[None, :]
        return (t < self.width).astype(float)[:, None] * a[None, :]

    def sample_steps(self, dt: float, steps: int, m: int) -> np.ndarray:
        """Start, midpoint and end samples of every step, stacked as rows
        ``3k, 3k+1, 3k+2``. Starts use right limits and ends left limits, so
        a pulse edge on the grid is integrated without a stage error."""
        t0 = np.arange(steps) * dt
        if self.kind != "pulse":
            start = self.sample(t0, m)
            mid = self.sample(t0 + 0.5 * dt, m)
            end = self.sample(t0 + dt, m)
        else:
            # edges within round-off of a grid point count as on the grid
            eps = 1e-9 * dt
            a = self.amplitudes(m)[None, :]
            start = (t0 < self.width - eps)[:, None] * a
            mid = (t0 + 0.5 * dt < self.width)[:, None] * a
            end = (t0 + dt <= self.width + eps)[:, None] * a
        return np.stack([start, mid, end], axis=1).reshape(3 * steps, m)

    def l2_norm_sq(self, m: int) -> float:
        a2 = float(np.sum(self.amplitudes(m) ** 2))
        if self.kind == "zero":
            return 0.0
        if self.kind == "exp":
            return a2 / (2.0 * self.beta)
        return a2 * self.width

    def settle_time(self) -> float:
        if self.kind == "exp":
            return 10.0 / self.beta
        if self.kind == "pulse":
            return self.width
        return 0.0

    def to_dict(self) -> dict:
        alpha = self.alpha if np.isscalar(self.alpha) else list(self.alpha)
        out = {"kind": self.kind, "alpha": alpha}
        if self.kind == "exp":
            out["beta"] = self.beta
        elif self.kind == "pulse":
            out["width"] = self.width
        return out


def parse_input(text: str) -> InputSignal:
    """Parse ``exp:alpha=1,beta=2``, ``pulse:alpha=1/2/3,width=0.5`` or ``zero``.

    Per-channel amplitudes are separated by ``/``.
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"bad input parameter {item!r}")
        params[key.strip()] = val.strip()
    unknown = set(params) - {"alpha", "beta", "width"}
    if unknown:
        raise ValueError(f"unknown input parameters {sorted(unknown)}")
    kw = {}
    if "alpha" in params:
        vals = [float(v) for v in params["alpha"].split("/")]
        kw["alpha"] = vals[0] if len(vals) == 1 else tuple(vals)
    if "beta" in params:
        kw["beta"] = float(params["beta"])
    if "width" in params:
        kw["width"] = float(params["width"])
    return InputSignal(kind, **kw)


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    x: np.ndarray


def _check_step(gm: GraphMatrices, dt: float) -> None:
    lam_max = gm.spectrum.lambda_max
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt * lam_max >= STABILITY_LIMIT:
        raise StepTooLarge(
            f"dt * lambda_max = {dt * lam_max:.4g} >= {STABILITY_LIMIT}",
            {"dt": dt, "lambda_max": lam_max, "product": dt * lam_max},
        )


def integrate(
    gm: GraphMatrices,
    Min: np.ndarray,
    u: InputSignal,
    x0: np.ndarray | None = None,
    dt: float = 1e-3,
    T: float = 10.0,
    backend: str | None = None,
) -> Trajectory:
    """Classic RK4 for ``x' = -L x + Min u(t)`` on a uniform grid."""
    _check_step(gm, dt)
    if T < dt:
        raise ValueError(f"horizon T={T} shorter than one step dt={dt}")
    steps = int(np.ceil(T / dt - 1e-9))
    n, m = Min.shape
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if u.kind == "pulse" and abs(u.width / dt - round(u.width / dt)) > 1e-9:
        log.warning("pulse width %.6g is not a multiple of dt=%.3g; accuracy drops to O(dt)",
                    u.width, dt)
    U = u.sample_steps(dt, steps, m)
    X = kernels.rk4_trajectory(gm.L, Min, U, x0, dt, steps, backend=backend)
    return Trajectory(np.arange(steps + 1) * dt, X)


def group_disagreement(gm: GraphMatrices, x: np.ndarray) -> float:
    """``x^T L x``, the squared norm of the output ``W^{1/2} R^T x``."""
    x = np.asarray(x, dtype=float)
    return float(x @ gm.L @ x)


def _refine_peak(gm, e, X, U, dt, k, sub=64):
    """Largest gap on the steps either side of grid point k.

    e(t) is rebuilt on each step as the cubic Hermite interpolant of the
    grid values and the one-sided derivatives e' = -L e + X u.
    """
    tau = np.linspace(0.0, 1.0, sub + 1)
    h00 = 2 * tau**3 - 3 * tau**2 + 1
    h10 = tau**3 - 2 * tau**2 + tau
    h01 = -2 * tau**3 + 3 * tau**2
    h11 = tau**3 - tau**2
    best = 0.0
    for j in (k - 1, k):
        if j < 0 or j + 1 >= e.shape[0]:
            continue
        d0 = -gm.L @ e[j] + X @ U[3 * j]
        d1 = -gm.L @ e[j + 1] + X @ U[3 * j + 2]
        seg = (np.outer(h00, e[j]) + np.outer(h10, dt * d0)
               + np.outer(h01, e[j + 1]) + np.outer(h11, dt * d1))
        g2 = np.einsum("ti,ij,tj->t", seg, gm.L, seg)
        best = max(best, float(np.sqrt(max(g2.max(), 0.0))))
    return best


def auto_horizon(gm: GraphMatrices, u: InputSignal) -> float:
    return max(u.settle_time(), 10.0 / gm.spectrum.algebraic_connectivity)


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    t: np.ndarray
    x: np.ndarray
    x_tilde: np.ndarray
    gap: np.ndarray
    output_map: np.ndarray = field(repr=False)
    f_value: float = 0.0
    u_l2_sq: float = 0.0
    dt: float = 0.0
    T: float = 0.0
    horizon_ok: bool = True
    peak: float = 0.0  # sup of the gap between grid points, from Hermite reconstruction

    @cached_property
    def y(self) -> np.ndarray:
        return self.x @ self.output_map.T

    @cached_property
    def y_tilde(self) -> np.ndarray:
        return self.x_tilde @ self.output_map.T

    @property
    def linf_output_gap(self) -> float:
        return max(float(self.gap.max()), self.peak)

    @property
    def bound_rhs(self) -> float:
        return math.sqrt(max(self.f_value, 0.0)) * math.sqrt(self.u_l2_sq)

    @property
    def slack_ratio(self) -> float:
        if self.bound_rhs == 0.0:
            return 0.0 if self.linf_output_gap == 0.0 else math.inf
        return self.linf_output_gap / self.bound_rhs

    @property
    def passed(self) -> bool:
        return self.slack_ratio <= 1.0 + SLACK_TOL

    def summary(self) -> dict:
        return {
            "linf_output_gap": self.linf_output_gap,
            "bound_rhs": self.bound_rhs,
            "h2_error": math.sqrt(max(self.f_value, 0.0)),
            "u_l2": math.sqrt(self.u_l2_sq),
            "slack_ratio": self.slack_ratio,
            "passed": self.passed,
            "dt": self.dt,
            "T": self.T,
            "horizon_ok": self.horizon_ok,
        }


def check_output_bound(
    gm: GraphMatrices,
    leaders,
    demoted,
    new_leaders,
    u: InputSignal,
    dt: float = 1e-3,
    T: float | None = None,
    backend: str | None = None,
) -> SimulationTrace:
    """Simulate both systems from rest with the same input and compare the
    sup-norm of the output gap with the H2-based bound."""
    n = gm.n
    a = assignment_from_sets(n, leaders, demoted, new_leaders)
    M = build_input_matrix(a, "original")
    Mt = build_input_matrix(a, "new")
    needed = auto_horizon(gm, u)
    if T is None:
        T = needed
    horizon_ok = T >= needed * (1 - 1e-9)
    if not horizon_ok:
        log.warning("horizon T=%.4g is shorter than the decay estimate %.4g", T, needed)

    orig = integrate(gm, M, u, dt=dt, T=T, backend=backend)
    new = integrate(gm, Mt, u, dt=dt, T=T, backend=backend)
    e = orig.x - new.x
    gap = np.sqrt(np.maximum(np.einsum("ti,ij,tj->t", e, gm.L, e), 0.0))
    f = h2_error_sq(observability_gramian(n), M, Mt)
    steps = orig.t.size - 1
    peak = _refine_peak(gm, e, M - Mt, u.sample_steps(dt, steps, a.m), dt, int(np.argmax(gap)))
    return SimulationTrace(
        t=orig.t,
        x=orig.x,
        x_tilde=new.x,
        gap=gap,
        output_map=gm.output_map,
        f_value=f,
        u_l2_sq=u.l2_norm_sq(a.m),
        dt=dt,
        T=float(orig.t[-1]),
        horizon_ok=horizon_ok,
        peak=peak,
    )
