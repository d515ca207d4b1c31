"""Two-sided explosion-time bounds that do not need the solution itself.

Upper bound: T = A^-1(B(inf)).  Lower bounds:

* ``epa``      A^-1(beta(ghat(T))) with ghat the running supremum of g;
* ``submult``  Atilde^-1(B(inf)) for sub-multiplicative drifts, where
  Atilde(t) = c * int_0^t a(s) b(g(s)/x0 + 1) ds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, NonConvergenceError, PreconditionError
from .funcat import FunctionSpec, adaptive_simpson, invert_monotone, running_sup
from .transforms import (
    A_infinity,
    A_inverse,
    A_of,
    B_infinity,
    ProblemSpec,
    beta_of,
    require_finite_T,
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)
_DEFAULT_PROBE = np.concatenate(([0.0], np.logspace(-3, 3, 61)))


@dataclass(frozen=True)
class BoundReport:
    lower_epa: float
    upper: float
    lower_submult: float | None = None
    c_used: float | None = None
    which_lower_is_tighter: str = "epa_only"
    ghat_T: float = 0.0
    notes: tuple = ()

    def __post_init__(self):
        if self.lower_epa > self.upper * (1 + 1e-9) + 1e-12:
            raise ValueError(f"EPA lower bound {self.lower_epa} exceeds upper bound {self.upper}")
        if self.lower_submult is not None and self.lower_submult > self.upper * (1 + 1e-9) + 1e-12:
            raise ValueError(f"sub-multiplicative bound {self.lower_submult} exceeds upper bound {self.upper}")

    def to_dict(self):
        out = asdict(self)
        out["notes"] = list(self.notes)
        return out


def epa_lower(p: ProblemSpec, ghat: float) -> float:
    """A^-1(beta(ghat)); 0 when beta(ghat) lies outside A's range."""
    y = beta_of(p, ghat)
    if y >= A_infinity(p):
        return 0.0
    return A_inverse(p, y)


def epa_bounds(p: ProblemSpec) -> BoundReport:
    p.require_nondecreasing("epa_bounds")
    T = require_finite_T(p, "epa_bounds")
    ghat = running_sup(p.g, T)
    return BoundReport(min(epa_lower(p, ghat), T), T, ghat_T=ghat)


# -- sub-multiplicativity ------------------------------------------------------

def _analytic_submult(b: FunctionSpec):
    if b.kind in ("constant", "power"):
        return 1.0 / b.k
    if b.kind == "shifted_power" and b.s0 <= 0 and b.p >= 0:
        if b.s0 == 0:
            return 1.0 / b.k
        sigma = -b.s0
        # x*y + sigma <= max(1, 1/sigma) * (x + sigma) * (y + sigma)
        return max(1.0, 1.0 / sigma) ** b.p / b.k
    return None


def _grid_ratio(b, grid):
    x = grid[:, None]
    y = grid[None, :]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        num = np.broadcast_to(np.asarray(b(x * y), dtype=float), (grid.size, grid.size))
        den = np.asarray(b(x), dtype=float) * np.asarray(b(y), dtype=float)
        ratio = np.where(num == 0, 0.0, num / den)
    return float(np.max(ratio)) if np.all(np.isfinite(ratio)) else math.inf


def submult_constant(b: FunctionSpec, probe_grid=None) -> float:
    """Constant c with b(xy) <= c b(x) b(y) for x, y >= 0.

    Constant and power kinds use the exact per-kind constant.  Other kinds get
    the empirical ratio supremum, accepted only if it stays put when the
    probe range widens.  In every case the inequality is then checked on the
    probe grid.  A rejected drift raises ``PreconditionError``.
    """
    if not b.is_positive():
        raise PreconditionError("sub-multiplicativity needs a positive drift")
    grid = np.asarray(_DEFAULT_PROBE if probe_grid is None else probe_grid, dtype=float)
    if b.domain_lo > 0 or (b.kind in ("power", "shifted_power") and b.p < 0):
        grid = grid[grid > max(b.domain_lo, 0.0)]
    c = _analytic_submult(b)
    if c is None:
        narrow = _grid_ratio(b, grid[grid <= 10.0])
        wide = _grid_ratio(b, grid[grid <= 20.0])
        if not (math.isfinite(wide) and wide <= narrow * 1.01):
            raise PreconditionError(
                f"{b.kind} drift is not sub-multiplicative: b(xy)/(b(x)b(y)) keeps growing "
                f"({narrow:.3g} on [0,10], {wide:.3g} on [0,20])")
        c = _grid_ratio(b, grid)
        if not math.isfinite(c):
            raise PreconditionError(f"{b.kind} drift is not sub-multiplicative on the probe grid")
    if _grid_ratio(b, grid) > c * (1 + 1e-9):
        raise PreconditionError(f"b(xy) <= {c} b(x) b(y) fails on the probe grid")
    return c


# -- Atilde ---------------------------------------------------------------------

class _PathAtilde:
    """Cumulative Atilde on the nodes of a sampled noise path."""

    def __init__(self, p: ProblemSpec, c: float):
        path = p.g.path
        self.p, self.c, self.dt = p, c, path.dt
        self.knots = path.times
        segs = self._segment(self.knots[:-1], self.knots[1:])
        self.cum = np.concatenate(([0.0], np.cumsum(segs)))

    def _segment(self, lo, hi):
        lo = np.atleast_1d(lo)
        hi = np.atleast_1d(hi)
        half = 0.5 * (hi - lo)
        s = 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.asarray(self.p.a(s), dtype=float) * np.asarray(self.p.b(self.p.g(s) / self.p.x0 + 1.0), dtype=float)
        return self.c * half * (vals @ _GL_WEIGHTS)

    def __call__(self, t):
        if t <= 0:
            return 0.0
        i = min(int(np.searchsorted(self.knots, t, side="right")) - 1, len(self.knots) - 2)
        return float(self.cum[i] + self._segment(self.knots[i], t)[0])

    def inverse(self, y):
        i = int(np.searchsorted(self.cum, y, side="left"))
        if i == 0:
            return 0.0
        if i >= len(self.cum):
            return None
        lo, hi = self.knots[i - 1], self.knots[i]
        return invert_monotone(self, y, (lo, hi), tol=1e-13)


def A_tilde_of(p: ProblemSpec, c: float, t: float) -> float:
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if p.g is None:
        return c * float(p.b(1.0)) * A_of(p, t)
    if p.g.kind == "abs_brownian":
        return _PathAtilde(p, c)(t)
    res = adaptive_simpson(lambda s: c * float(p.a(s)) * float(p.b(float(p.g(s)) / p.x0 + 1.0)), 0.0, t, 1e-11)
    if not res.converged:
        raise NonConvergenceError("Atilde quadrature did not converge")
    return res.value


def prop2_lower(p: ProblemSpec, c: float | None = None, t_max: float | None = None) -> float:
    """Atilde^-1(B(inf)); 0.0 when B(inf) is not reached on [0, t_max]."""
    p.require_nondecreasing("prop2_lower")
    if c is None:
        c = submult_constant(p.b)
    b_inf = B_infinity(p)
    if math.isinf(b_inf):
        return math.inf
    if p.g is None:
        return A_inverse(p, b_inf / (c * float(p.b(1.0)))) if b_inf / (c * float(p.b(1.0))) < A_infinity(p) else 0.0
    if p.g.kind == "abs_brownian":
        at = _PathAtilde(p, c)
        if t_max is not None:
            if at(t_max) < b_inf:
                return 0.0
        t = at.inverse(b_inf)
        return 0.0 if t is None else t
    if t_max is None:
        T = require_finite_T(p, "prop2_lower without t_max")
        t_max = T
    if A_tilde_of(p, c, t_max) < b_inf:
        return 0.0
    return invert_monotone(lambda s: A_tilde_of(p, c, s), b_inf, (0.0, t_max), tol=1e-12)


def bound_report(p: ProblemSpec) -> BoundReport:
    """EPA bounds plus the sub-multiplicative lower bound when b admits one."""
    base = epa_bounds(p)
    notes = []
    try:
        c = submult_constant(p.b)
    except PreconditionError as exc:
        notes.append(f"sub-multiplicative bound omitted: {exc}")
        return BoundReport(base.lower_epa, base.upper, None, None, "epa_only", base.ghat_T, tuple(notes))
    lower = prop2_lower(p, c, t_max=base.upper)
    if lower > base.lower_epa:
        which = "submult"
    elif lower < base.lower_epa:
        which = "epa"
    else:
        which = "equal"
    return BoundReport(base.lower_epa, base.upper, lower, c, which, base.ghat_T, tuple(notes))


def pathwise_bounds(p: ProblemSpec, T: float, c: float | None = None) -> tuple:
    """(epa_lower, prop2_lower, T) for a problem whose noise is one sampled path."""
    ghat = running_sup(p.g, min(T, p.g.domain_hi)) if p.g is not None else 0.0
    lo_epa = epa_lower(p, ghat)
    lo_sub = prop2_lower(p, c) if c is not None else None
    return lo_epa, lo_sub, T
