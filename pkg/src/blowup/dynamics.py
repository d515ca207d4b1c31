"""Adaptive integration of Y' = a(t) b(Y + g(t)) with blow-up detection."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import _kernels
from .errors import DomainError, InconsistencyError, NonConvergenceError, PreconditionError
from .funcat import FunctionSpec, integrate_improper, running_sup
from .osgood import ExplosionReport, osgood_test
from .transforms import A_infinity, A_inverse, A_of, B_infinity, ProblemSpec

_STATUS = {
    _kernels.T_MAX: "t_max",
    _kernels.CAP: "blow_up",
    _kernels.RESOLUTION: "blow_up",
    _kernels.UNDERFLOW: "step_underflow",
    _kernels.NONFINITE: "nonfinite",
    _kernels.MAX_STEPS: "max_steps",
}
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SolverControls:
    """Stepper settings.  ``tol`` is the relative local error target."""

    h0: float = 1e-3
    tol: float = 1e-10
    atol: float = 1e-12
    y_cap: float = 1e10
    t_max: float = 10.0
    h_max: float = 0.0  # 0 disables the cap
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (self.h0 > 0 and self.tol > 0 and self.atol >= 0 and self.y_cap > 0 and self.t_max > 0):
            raise ValueError(f"invalid solver controls {self}")


@dataclass(frozen=True)
class BlowUp:
    t_lo: float
    t_hi: float
    y_cap_hit: float
    reason: str  # "cap" or "resolution"

    @property
    def width(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_lo + self.t_hi)


@dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    local_error: np.ndarray
    blow_up: BlowUp | None
    status: str
    level_crossing: float | None = None
    residual_stats: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.grid, self.values, self.slopes, self.local_error):
            arr.setflags(write=False)

    @property
    def x0(self) -> float:
        return float(self.values[0])

    def value_at(self, t):
        return CubicHermiteSpline(self.grid, self.values, self.slopes)(t)

    def time_of(self, y):
        """Y^-1 by cubic Hermite interpolation of (value, time) pairs."""
        return _inverse_spline(self)(y)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "Y", "local_error"])
            for row in zip(self.grid, self.values, self.local_error):
                writer.writerow([repr(float(x)) for x in row])


def _inverse_spline(traj):
    vals = np.asarray(traj.values)
    keep = np.concatenate(([True], np.diff(vals) > 0))
    return CubicHermiteSpline(vals[keep], np.asarray(traj.grid)[keep], 1.0 / np.asarray(traj.slopes)[keep])


def _encode_problem(p: ProblemSpec):
    ac, ap, _, _ = _kernels.encode(p.a)
    bc, bp, _, _ = _kernels.encode(p.b)
    gc, gp, path, pdt = _kernels.encode(p.g)
    return ac, ap, bc, bp, gc, gp, path, pdt


def tail_correction(p: ProblemSpec, t_lo: float, y_from: float) -> float:
    """int_{y_from}^inf ds / (a(t_lo) b(s)), with a frozen and g dropped."""
    res = integrate_improper(p.inv_b, y_from)
    if not res.converged:
        raise NonConvergenceError("tail correction did not converge")
    return res.value / float(p.a(t_lo))


def solve_noisy(p: ProblemSpec, controls: SolverControls = SolverControls(), level=None,
                record=True) -> Trajectory:
    """Integrate until Y >= y_cap, t = t_max, or the step size underflows.

    Blow-up is also declared once the remaining time to infinity (frozen-a
    tail integral at the current Y) drops below what the time axis can
    resolve.  Cubic drifts hit that limit long before Y = 1e10.  The blow-up
    bracket is [t_lo, t_lo + tail_correction].  ``level`` records the first
    time Y reaches that value.
    """
    if p.g is not None and p.g.kind == "abs_brownian" and controls.t_max > p.g.path.horizon + 1e-12:
        raise DomainError(f"noise path horizon {p.g.path.horizon} shorter than t_max {controls.t_max}")
    ac, ap, bc, bp, gc, gp, path, pdt = _encode_problem(p)
    out = _kernels.solve_kernel(
        ac, ap, bc, bp, gc, gp, path, pdt, float(p.x0), float(controls.t_max), float(controls.h0),
        float(controls.tol), float(controls.atol), float(controls.h_max), float(controls.y_cap),
        float(level) if level is not None else -1.0, record, int(controls.max_steps))
    status, t_end, y_end, t_level, n_acc, n_rej, ts, ys, dys, errs, count = out
    blow = None
    if status in (_kernels.CAP, _kernels.RESOLUTION):
        y_from = controls.y_cap if status == _kernels.CAP else y_end
        tail = tail_correction(p, t_end, y_from)
        t_hi = t_end + tail if math.isfinite(tail) else max(controls.t_max, t_end)
        if not t_hi > t_end:
            t_hi = np.nextafter(t_end, math.inf)
        blow = BlowUp(float(t_end), float(t_hi), float(y_end),
                      "cap" if status == _kernels.CAP else "resolution")
    stats = {"n_accepted": int(n_acc), "n_rejected": int(n_rej), "t_end": float(t_end),
             "max_local_error": float(np.max(errs[:count])) if record else math.nan}
    return Trajectory(ts[:count].copy(), ys[:count].copy(), dys[:count].copy(), errs[:count].copy(),
                      blow, _STATUS[int(status)], t_level if t_level >= 0 else None, stats)


def bbar_of(p: ProblemSpec, traj: Trajectory, y: float) -> float:
    """int_{x0}^y ds / b(s + g(Y^-1(s))) along a computed trajectory."""
    if y < p.x0:
        raise DomainError(f"Bbar needs y >= x0={p.x0}, got {y}")
    vals = np.asarray(traj.values)
    if y > vals[-1] * (1 + 1e-12):
        raise DomainError(f"y={y} beyond trajectory range {vals[-1]}")
    y = min(y, vals[-1])
    if y == p.x0:
        return 0.0
    cum, knots = _bbar_cumulative(p, traj)
    i = int(np.searchsorted(knots, y, side="right") - 1)
    i = min(max(i, 0), len(knots) - 2)
    return float(cum[i] + _bbar_segments(p, traj, np.array([knots[i]]), np.array([y]))[0])


def _noise_at(p, t):
    if p.g is None:
        return np.zeros_like(t)
    return np.asarray(p.g(t), dtype=float)


def _bbar_segments(p, traj, lo, hi):
    inv = _inverse_spline(traj)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    s = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    t = np.clip(inv(s), 0.0, traj.grid[-1])
    integrand = 1.0 / p.b(s + _noise_at(p, t))
    return half * (integrand @ _GL_WEIGHTS)


def _bbar_cumulative(p, traj):
    vals = np.asarray(traj.values)
    knots = vals[np.concatenate(([True], np.diff(vals) > 0))]
    segs = _bbar_segments(p, traj, knots[:-1], knots[1:])
    return np.concatenate(([0.0], np.cumsum(segs))), knots


def bbar_infinity(p: ProblemSpec, traj: Trajectory) -> float:
    """Bbar over the whole trajectory plus a tail with g frozen at its last value."""
    cum, knots = _bbar_cumulative(p, traj)
    y_last = knots[-1]
    g_last = float(_noise_at(p, np.array([traj.grid[-1]]))[0])
    tail = integrate_improper(p.inv_b, y_last + g_last)
    if not tail.converged:
        raise NonConvergenceError("Bbar tail did not converge")
    return float(cum[-1] + tail.value)


def explosion_time_thm2(p: ProblemSpec, traj: Trajectory) -> ExplosionReport:
    """t_e = A^-1(Bbar(inf)) under b non-decreasing and B(inf) < A(inf)."""
    p.require_nondecreasing("explosion_time_thm2")
    b_inf, a_inf = B_infinity(p), A_infinity(p)
    if not (math.isfinite(b_inf) and b_inf < a_inf):
        raise PreconditionError(f"explosion_time_thm2 needs B(inf) < A(inf); got B(inf)={b_inf}, A(inf)={a_inf}")
    if p.noiseless:
        return osgood_test(p)
    if traj.blow_up is None:
        raise InconsistencyError(
            f"trajectory ended with status {traj.status!r} at t={traj.grid[-1]} without blowing up, "
            "although B(inf) < A(inf) guarantees explosion")
    bbar = bbar_infinity(p, traj)
    t_e = A_inverse(p, bbar)
    details = {"Bbar_inf": bbar, "B_inf": b_inf, "A_inf": a_inf,
               "numeric_bracket": [traj.blow_up.t_lo, traj.blow_up.t_hi]}
    return ExplosionReport(True, t_e, None, "numeric_blowup", {"solver_tol": None}, details)


def prop1_hypothesis_holds(p: ProblemSpec, t: float) -> bool:
    """sup_{s<=t} g(s) < b(x0) * int_t^inf a."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    a_inf = A_infinity(p)
    if math.isinf(a_inf):
        return True
    ghat = running_sup(p.g, t)
    return ghat < float(p.b(p.x0)) * (a_inf - A_of(p, t))


def noiseless(p: ProblemSpec) -> ProblemSpec:
    return ProblemSpec(p.x0, p.a, p.b, None)
