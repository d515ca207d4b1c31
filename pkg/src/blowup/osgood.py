"""Generalized Osgood test, the noiseless closed-form solution, and the
comparison check between two computed trajectories."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import DomainError, NonConvergenceError, OutOfRangeError, PreconditionError
from .funcat import IMPROPER_TOL, PROPER_TOL
from .transforms import A_infinity, A_inverse, A_of, B_infinity, B_r_inverse, ProblemSpec

METHODS = ("osgood_exact", "numeric_blowup", "epa_bounds", "submult_bound")
COMPARISON_RTOL = 1e-6


class SaturationWarning(UserWarning):
    """noiseless_solution was asked for a value in the last tolerance sliver before blow-up."""


@dataclass(frozen=True)
class ExplosionReport:
    explodes: bool
    T_point: float
    T_bracket: tuple | None
    method: str
    tolerances: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.explodes != math.isfinite(self.T_point):
            raise ValueError("explodes must agree with finiteness of T_point")
        if self.T_bracket is not None:
            lo, hi = self.T_bracket
            if not lo <= self.T_point <= hi:
                raise ValueError(f"bracket {self.T_bracket} does not contain {self.T_point}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["T_bracket"] = list(self.T_bracket) if self.T_bracket is not None else None
        out["warnings"] = list(self.warnings)
        return out


def osgood_test(p: ProblemSpec, ignore_noise=False) -> ExplosionReport:
    """Explosion iff B(inf) < A(inf); then T = A^-1(B(inf)).

    With noise present the caller has to opt in to the g-ignored baseline via
    ``ignore_noise=True``.
    """
    if not p.noiseless and not ignore_noise:
        raise PreconditionError("osgood_test applies to g = 0; pass ignore_noise=True for the baseline")
    b_inf = B_infinity(p)
    a_inf = A_infinity(p)
    tols = {"proper": PROPER_TOL, "improper": IMPROPER_TOL}
    details = {"B_inf": b_inf, "A_inf": a_inf}
    notes = ()
    if not p.noiseless:
        notes = ("noise ignored: result is the noiseless baseline",)
    if math.isinf(b_inf) or b_inf >= a_inf:
        return ExplosionReport(False, math.inf, None, "osgood_exact", tols, details, notes)
    T = A_inverse(p, b_inf)
    if not math.isfinite(T):
        raise NonConvergenceError(f"explosion time A^-1({b_inf}) overflows the floating-point range")
    return ExplosionReport(True, T, None, "osgood_exact", tols, details, notes)


def noiseless_solution(p: ProblemSpec, t: float, tol=PROPER_TOL) -> float:
    """y(t) = B^-1(A(t)) for 0 <= t < T."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0:
        return p.x0
    b_inf = B_infinity(p)
    a_t = A_of(p, t)
    if a_t >= b_inf:
        raise DomainError(f"t={t} is at or past the explosion time (A(t)={a_t} >= B(inf)={b_inf})")
    if math.isfinite(b_inf) and a_t > b_inf - tol:
        warnings.warn(f"pre-blow-up saturation at t={t}: evaluation capped at B(inf) - tol",
                      SaturationWarning, stacklevel=2)
        a_t = b_inf - tol
    try:
        return B_r_inverse(p, 0.0, a_t)
    except OutOfRangeError as exc:  # pragma: no cover - guarded above
        raise DomainError(str(exc)) from exc


@dataclass(frozen=True)
class ComparisonReport:
    violations: list
    precondition_failures: list
    explosion_order_ok: bool
    max_shortfall: float
    n_compared: int

    @property
    def ok(self) -> bool:
        return not self.violations and not self.precondition_failures and self.explosion_order_ok


def _interpolant(traj):
    grid = np.asarray(traj.grid)
    values = np.asarray(traj.values)
    slopes = getattr(traj, "slopes", None)
    if slopes is not None and len(grid) >= 2:
        return CubicHermiteSpline(grid, values, np.asarray(slopes))
    if len(grid) >= 2:
        return PchipInterpolator(grid, values)
    return lambda t: np.full_like(np.asarray(t, dtype=float), values[0])


def check_comparison(u, v, drift=None, x0=None, x1=None, rtol=COMPARISON_RTOL) -> ComparisonReport:
    """Check v(t) >= u(t) on the union of both grids, restricted to the common span.

    ``u`` solves the equality equation from x0; ``v`` satisfies the inequality
    from x1 >= x0.  Each trajectory is resampled onto the other's grid with
    its own cubic Hermite interpolant.  Shortfalls below
    ``rtol * (1 + |u|)`` are ignored.  Also checks that v does not explode
    later than u.
    """
    failures = []
    if drift is not None and drift.monotone != "nondecreasing":
        failures.append("drift b is not non-decreasing")
    if x0 is not None and x1 is not None and x1 < x0:
        failures.append(f"x1={x1} < x0={x0}")

    t_end = min(u.grid[-1], v.grid[-1])
    grid = np.union1d(u.grid[u.grid <= t_end], v.grid[v.grid <= t_end])
    u_vals = _interpolant(u)(grid)
    v_vals = _interpolant(v)(grid)
    shortfall = u_vals - v_vals
    allowed = rtol * (1.0 + np.abs(u_vals))
    bad = np.nonzero(shortfall > allowed)[0]
    violations = [(float(grid[i]), float(u_vals[i]), float(v_vals[i])) for i in bad[:50]]

    order_ok = True
    u_blow = getattr(u, "blow_up", None)
    v_blow = getattr(v, "blow_up", None)
    if u_blow is not None:
        if v_blow is None:
            # v still finite past u's explosion, and v covered that span
            order_ok = v.grid[-1] < u_blow.t_lo
        else:
            order_ok = v_blow.t_lo <= u_blow.t_hi + rtol * (1.0 + u_blow.t_hi)
    return ComparisonReport(violations, failures, order_ok,
                            float(np.max(shortfall / (1.0 + np.abs(u_vals)), initial=-np.inf)),
                            int(grid.size))
