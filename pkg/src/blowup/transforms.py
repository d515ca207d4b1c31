"""Problem instances and the integral transforms built on them.

For a problem ``Y' = a(t) b(Y + g(t))``, ``Y(0) = x0``:

    A(t)        = int_0^t a
    B_r(x)      = int_{x0 - r}^x ds / b(s)          (B = B_0)
    tilde_B_r   = B_{-r}
    beta(r)     = tilde_B_r(inf) = int_{x0 + r}^inf ds / b(s)

together with their inverses.  All integrals of 1/b go through the catalog
reciprocal of ``b``, so power, exponential and constant drifts get exact
antiderivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .errors import DomainError, NonConvergenceError, OutOfRangeError, PreconditionError
from .funcat import (
    IMPROPER_TOL,
    PROPER_TOL,
    FunctionSpec,
    integrate,
    integrate_improper,
    invert_monotone,
)

INVERSE_TOL = 1e-12
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class ProblemSpec:
    """An instance (x0, a, b, g).  ``g=None`` means no noise."""

    x0: float
    a: FunctionSpec
    b: FunctionSpec
    g: FunctionSpec | None = None
    b_nondecreasing: bool | None = None

    def __post_init__(self):
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise DomainError(f"x0 must be a positive real, got {self.x0}")
        if not self.a.is_positive() or self.a.domain_lo > 0:
            raise DomainError(f"intensity must be positive on [0, inf): {self.a!r}")
        if not self.b.is_positive() or self.b.domain_lo > self.x0:
            raise DomainError(f"drift must be positive on [x0, inf): {self.b!r}")
        if self.g is not None:
            if not self.g.is_nonnegative():
                raise DomainError(f"noise must be nonnegative: {self.g!r}")
            if self.g.kind == "shifted_power" and self.g.s0 > 0:
                raise DomainError("noise must be defined on [0, inf)")
            if self.g.is_zero:
                object.__setattr__(self, "g", None)
        if self.b_nondecreasing is None:
            object.__setattr__(self, "b_nondecreasing", self.b.monotone == "nondecreasing")

    @property
    def noiseless(self) -> bool:
        return self.g is None

    @cached_property
    def inv_b(self) -> FunctionSpec:
        return self.b.reciprocal()

    def with_noise(self, g):
        return ProblemSpec(self.x0, self.a, self.b, g)

    def require_nondecreasing(self, what):
        if not self.b_nondecreasing:
            raise PreconditionError(f"{what} needs a non-decreasing drift b")


def _value(res, what):
    if not res.converged:
        raise NonConvergenceError(f"{what}: quadrature did not converge "
                                  f"(value {res.value}, error {res.abs_error_estimate})")
    return res.value


# -- A ----------------------------------------------------------------------

def A_of(p: ProblemSpec, t: float, tol=PROPER_TOL) -> float:
    if t < 0:
        raise DomainError(f"A(t) needs t >= 0, got {t}")
    return _value(integrate(p.a, 0.0, t, tol), "A(t)")


def A_infinity(p: ProblemSpec, tol=IMPROPER_TOL) -> float:
    return _value(integrate_improper(p.a, 0.0, tol), "A(inf)")


def A_inverse(p: ProblemSpec, y: float, tol=INVERSE_TOL) -> float:
    if y < 0:
        raise DomainError(f"A^-1 needs y >= 0, got {y}")
    if y == 0:
        return 0.0
    a_inf = A_infinity(p)
    if y >= a_inf:
        raise OutOfRangeError(f"A^-1({y}) undefined: A(inf) = {a_inf}", attained=(0.0, a_inf))
    return invert_monotone(lambda t: A_of(p, t), y, (0.0, 1.0), tol)


# -- B_r and tilde B ----------------------------------------------------------

def B_r_of(p: ProblemSpec, r: float, x: float) -> float:
    """int_{x0 - r}^x ds / b(s); negative r gives tilde_B_{-r}."""
    lo = p.x0 - r
    if r > p.x0:
        raise DomainError(f"B_r needs r <= x0, got r={r}")
    if x < lo:
        if lo - x <= 4 * _EPS * abs(lo):
            return 0.0  # endpoint lost to rounding in x0 - r
        raise DomainError(f"B_r(x) needs x >= x0 - r = {lo}, got {x}")
    if x == math.inf:
        return B_infinity(p, r)
    return _value(integrate(p.inv_b, lo, x), "B_r(x)")


def B_infinity(p: ProblemSpec, r: float = 0.0, tol=IMPROPER_TOL) -> float:
    if r > p.x0:
        raise DomainError(f"B_r needs r <= x0, got r={r}")
    return _value(integrate_improper(p.inv_b, p.x0 - r, tol), "B_r(inf)")


def B_r_inverse(p: ProblemSpec, r: float, y: float, tol=INVERSE_TOL) -> float:
    lo = p.x0 - r
    if y < 0:
        raise DomainError(f"B_r^-1 needs y >= 0, got {y}")
    if y == 0:
        return lo
    b_inf = B_infinity(p, r)
    if y >= b_inf:
        raise OutOfRangeError(f"B_r^-1({y}) undefined: B_r(inf) = {b_inf}", attained=(0.0, b_inf))
    return invert_monotone(lambda x: B_r_of(p, r, x), y, (lo, lo + 1.0), tol)


def tilde_B(p: ProblemSpec, r: float, x: float) -> float:
    """int_{x0 + r}^x ds / b(s)."""
    if r < -p.x0:
        raise DomainError(f"tilde_B_r needs r >= -x0, got {r}")
    return B_r_of(p, -r, x)


def tilde_B_inverse_in_x(p: ProblemSpec, r: float, y: float, tol=INVERSE_TOL) -> float:
    if r < -p.x0:
        raise DomainError(f"tilde_B_r needs r >= -x0, got {r}")
    return B_r_inverse(p, -r, y, tol)


def tilde_B_inverse_in_r(p: ProblemSpec, x: float, y: float, tol=INVERSE_TOL) -> float:
    """Solve tilde_B_r(x) = y for r in [-x0, x - x0] (decreasing in r)."""
    if x < p.x0:
        raise DomainError(f"tilde_B^x needs x >= x0, got {x}")
    lo, hi = -p.x0, x - p.x0
    top = tilde_B(p, lo, x)
    if y < 0 or y > top:
        raise OutOfRangeError(f"tilde_B^x(r) = {y} has no solution: range [0, {top}]",
                              attained=(0.0, top))
    if y == 0:
        return hi
    return invert_monotone(lambda r: tilde_B(p, r, x), y, (lo, hi), tol, direction="decreasing")


# -- beta -------------------------------------------------------------------

def beta_of(p: ProblemSpec, r: float) -> float:
    """int_{x0 + r}^inf ds / b(s); may be +inf at r = -x0 for power drifts."""
    if r < -p.x0:
        raise DomainError(f"beta needs r >= -x0, got {r}")
    if math.isinf(B_infinity(p)):
        raise DomainError("beta is identically infinite: int^inf ds/b(s) diverges")
    return _value(integrate_improper(p.inv_b, p.x0 + r), "beta(r)")


def beta_inverse(p: ProblemSpec, y: float, tol=INVERSE_TOL) -> float:
    top = beta_of(p, -p.x0)
    if not (0 < y <= top):
        raise OutOfRangeError(f"beta^-1({y}) undefined: range (0, {top}]", attained=(0.0, top))
    if y == top:
        return -p.x0
    return invert_monotone(lambda r: beta_of(p, r), y, (-p.x0, 1.0 - p.x0), tol,
                           direction="decreasing")


def T_upper(p: ProblemSpec) -> float:
    """T = A^-1(B(inf)); +inf when B(inf) >= A(inf)."""
    b_inf = B_infinity(p)
    if math.isinf(b_inf) or b_inf >= A_infinity(p):
        return math.inf
    return A_inverse(p, b_inf)


def require_finite_T(p: ProblemSpec, what) -> float:
    T = T_upper(p)
    if math.isinf(T):
        raise PreconditionError(f"{what} needs B(inf) < A(inf)")
    return T
