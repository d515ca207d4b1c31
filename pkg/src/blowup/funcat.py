"""Closed-form function catalog plus the quadrature and inversion kernels.

Every intensity ``a``, drift ``b`` and noise ``g`` in the package is a
:class:`FunctionSpec`.  Keeping the set of kinds closed means each one can
carry an antiderivative, an exact tail integral and a monotonicity flag,
which the improper integrals and inverses downstream depend on.

Adding a kind means extending ``KINDS`` and the branches of ``__call__``,
``antiderivative``, ``tail`` and ``monotone`` (and ``_kernels._feval`` if it
should be usable by the ODE stepper).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NonMonotoneError, OutOfRangeError

KINDS = ("constant", "power", "shifted_power", "exponential", "abs_brownian")

PROPER_TOL = 1e-9
IMPROPER_TOL = 1e-7
MAX_DOUBLINGS = 60
_EPS = float(np.finfo(float).eps)


def _pow(u, q):
    try:
        return u**q
    except OverflowError:
        return math.inf


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _expm1(x):
    try:
        return math.expm1(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class FunctionSpec:
    """One member of the catalog.

    ``constant``       s -> k
    ``power``          s -> k * s**p                 (s >= 0)
    ``shifted_power``  s -> k * (s - s0)**p          (s >= s0)
    ``exponential``    s -> k * exp(c * s)
    ``abs_brownian``   s -> |W_s| read off a sampled path (0 <= s <= horizon)

    Use the classmethod constructors rather than the raw initializer.
    """

    kind: str
    k: float = 0.0
    p: float = 0.0
    s0: float = 0.0
    c: float = 0.0
    path: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        for name in ("k", "p", "s0", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{self.kind}: parameter {name} must be finite")
        if self.kind == "abs_brownian" and self.path is None:
            raise ValueError("abs_brownian needs a sampled path")

    @classmethod
    def constant(cls, k):
        return cls("constant", k=float(k))

    @classmethod
    def power(cls, k, p):
        return cls("power", k=float(k), p=float(p))

    @classmethod
    def shifted_power(cls, k, p, s0):
        return cls("shifted_power", k=float(k), p=float(p), s0=float(s0))

    @classmethod
    def exponential(cls, k, c):
        return cls("exponential", k=float(k), c=float(c))

    @classmethod
    def abs_brownian(cls, path):
        return cls("abs_brownian", path=path)

    # -- metadata -----------------------------------------------------------

    @property
    def domain_lo(self) -> float:
        if self.kind == "power":
            return 0.0
        if self.kind == "shifted_power":
            return self.s0
        if self.kind == "abs_brownian":
            return 0.0
        return -math.inf

    @property
    def domain_hi(self) -> float:
        if self.kind == "abs_brownian":
            return self.path.horizon
        return math.inf

    @property
    def monotone(self) -> str:
        """'nondecreasing', 'nonincreasing' or 'none'."""
        if self.kind == "constant":
            return "nondecreasing"
        if self.kind in ("power", "shifted_power"):
            if self.k == 0 or self.p == 0:
                return "nondecreasing"
            up = (self.k > 0) == (self.p > 0)
            return "nondecreasing" if up else "nonincreasing"
        if self.kind == "exponential":
            if self.k == 0 or self.c == 0:
                return "nondecreasing"
            up = (self.k > 0) == (self.c > 0)
            return "nondecreasing" if up else "nonincreasing"
        return "none"

    @property
    def is_zero(self) -> bool:
        return self.kind in ("constant", "power", "shifted_power", "exponential") and self.k == 0

    def is_positive(self) -> bool:
        """Strictly positive on the interior of the domain."""
        if self.kind == "abs_brownian":
            return False
        return self.k > 0

    def is_nonnegative(self) -> bool:
        if self.kind == "abs_brownian":
            return True
        return self.k >= 0

    # -- evaluation ---------------------------------------------------------

    def __call__(self, s):
        """Vectorized evaluation without domain checks (see :func:`evaluate`)."""
        kind = self.kind
        if kind == "constant":
            return self.k + 0.0 * np.asarray(s, dtype=float) if np.ndim(s) else self.k
        if kind == "power":
            return self.k * np.power(s, self.p)
        if kind == "shifted_power":
            return self.k * np.power(np.subtract(s, self.s0), self.p)
        if kind == "exponential":
            return self.k * np.exp(np.multiply(self.c, s))
        return self.path.value_at(s)

    def antiderivative(self, s):
        """A primitive F with F' = f, or None when the kind has no closed form."""
        kind = self.kind
        if kind == "constant":
            return self.k * s
        if kind in ("power", "shifted_power"):
            u = s - self.s0 if kind == "shifted_power" else s
            if self.p == -1.0:
                return self.k * math.log(u) if u > 0 else -math.inf
            q = self.p + 1.0
            if u == 0 and q < 0:
                return -math.inf if self.k > 0 else math.inf
            return self.k * _pow(u, q) / q
        if kind == "exponential":
            if self.c == 0:
                return self.k * s
            return self.k * _exp(self.c * s) / self.c
        return None

    def tail(self, lo):
        """Exact value of the integral from ``lo`` to infinity.

        Returns ``math.inf`` for divergent tails and None when the kind
        carries no decay information.
        """
        kind = self.kind
        if kind == "abs_brownian":
            return None
        if self.k == 0:
            return 0.0
        if kind == "constant":
            return math.inf
        if kind in ("power", "shifted_power"):
            u = lo - self.s0 if kind == "shifted_power" else lo
            if self.p >= -1.0 or u <= 0:
                return math.inf
            return self.k * _pow(u, self.p + 1.0) / (-self.p - 1.0)
        if self.c >= 0:
            return math.inf
        return self.k * _exp(self.c * lo) / (-self.c)

    def reciprocal(self) -> "FunctionSpec":
        """The catalog member s -> 1/f(s); f must be strictly positive."""
        if not self.is_positive():
            raise DomainError(f"cannot take the reciprocal of {self!r}")
        if self.kind == "constant":
            return FunctionSpec.constant(1.0 / self.k)
        if self.kind == "power":
            return FunctionSpec.power(1.0 / self.k, -self.p)
        if self.kind == "shifted_power":
            return FunctionSpec.shifted_power(1.0 / self.k, -self.p, self.s0)
        return FunctionSpec.exponential(1.0 / self.k, -self.c)

    def shifted(self, gamma) -> "FunctionSpec":
        """The catalog member s -> f(s + gamma)."""
        if self.kind == "constant":
            return self
        if self.kind == "power":
            return FunctionSpec.shifted_power(self.k, self.p, -gamma)
        if self.kind == "shifted_power":
            return FunctionSpec.shifted_power(self.k, self.p, self.s0 - gamma)
        if self.kind == "exponential":
            return FunctionSpec.exponential(self.k * math.exp(self.c * gamma), self.c)
        raise DomainError("a sampled path cannot be shifted")

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "constant":
            params = {"k": self.k}
        elif self.kind == "power":
            params = {"k": self.k, "p": self.p}
        elif self.kind == "shifted_power":
            params = {"k": self.k, "p": self.p, "s0": self.s0}
        elif self.kind == "exponential":
            params = {"k": self.k, "c": self.c}
        else:
            params = {"horizon": self.path.horizon, "dt": self.path.dt, "seed": self.path.seed}
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, data, path_factory: Callable | None = None) -> "FunctionSpec":
        """Inverse of :meth:`to_dict`.

        ``abs_brownian`` entries need ``path_factory(horizon, dt, seed)``.
        Unknown kinds or parameter names raise ``ValueError``.
        """
        if not isinstance(data, dict) or set(data) - {"kind", "params"} or "kind" not in data:
            raise ValueError(f"function spec must be {{'kind': ..., 'params': {{...}}}}, got {data!r}")
        kind = data["kind"]
        params = dict(data.get("params", {}))
        allowed = {
            "constant": {"k"},
            "power": {"k", "p"},
            "shifted_power": {"k", "p", "s0"},
            "exponential": {"k", "c"},
            "abs_brownian": {"horizon", "dt", "seed"},
        }
        if kind not in allowed:
            raise ValueError(f"unknown function kind {kind!r}")
        extra = set(params) - allowed[kind]
        missing = allowed[kind] - set(params)
        if extra:
            raise ValueError(f"{kind}: unknown parameter(s) {sorted(extra)}")
        if missing:
            raise ValueError(f"{kind}: missing parameter(s) {sorted(missing)}")
        if kind == "abs_brownian":
            if path_factory is None:
                raise ValueError("abs_brownian spec needs a path factory")
            return cls.abs_brownian(
                path_factory(float(params["horizon"]), float(params["dt"]), int(params["seed"]))
            )
        return cls(kind, **{key: float(val) for key, val in params.items()})


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    converged: bool
    cutoff_used: float | None = None

    @property
    def is_infinite(self) -> bool:
        return self.value == math.inf


def evaluate(f: FunctionSpec, s: float) -> float:
    """f(s) with domain checking."""
    if not math.isfinite(s):
        raise DomainError(f"cannot evaluate at non-finite point {s}")
    if s < f.domain_lo or s > f.domain_hi:
        raise DomainError(f"{f.kind}: s={s} outside [{f.domain_lo}, {f.domain_hi}]")
    value = float(f(s))
    if not math.isfinite(value):
        raise DomainError(f"{f.kind}: non-finite value at s={s}")
    return value


def adaptive_simpson(func, lo, hi, tol=PROPER_TOL, max_depth=50) -> QuadratureResult:
    """Adaptive Simpson rule with Richardson correction.

    Intervals that hit ``max_depth`` are accepted as they are, and the
    result comes back with ``converged=False``.
    """
    if hi == lo:
        return QuadratureResult(0.0, 0.0, True)
    f_lo, f_mid, f_hi = func(lo), func(0.5 * (lo + hi)), func(hi)
    whole = (hi - lo) * (f_lo + 4.0 * f_mid + f_hi) / 6.0
    stack = [(lo, hi, f_lo, f_mid, f_hi, whole, tol, 0)]
    total = 0.0
    err_total = 0.0
    converged = True
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = func(lm), func(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps or depth >= max_depth:
            if depth >= max_depth and abs(delta) > 15.0 * eps:
                converged = False
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
    if not math.isfinite(total):
        converged = False
    return QuadratureResult(total, err_total, converged)


def integrate(f, lo, hi, tol=PROPER_TOL, method="auto") -> QuadratureResult:
    """Integral of ``f`` over [lo, hi].

    ``method='auto'`` uses the closed-form antiderivative (or the exact
    piecewise-linear rule for sampled paths) when the kind has one and
    adaptive Simpson otherwise; ``'numeric'`` forces Simpson.  ``f`` may also
    be a plain callable, which always goes through Simpson.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    if hi < lo:
        raise DomainError(f"integration bounds reversed: [{lo}, {hi}]")
    if isinstance(f, FunctionSpec):
        if lo < f.domain_lo or hi > f.domain_hi:
            raise DomainError(f"{f.kind}: [{lo}, {hi}] leaves [{f.domain_lo}, {f.domain_hi}]")
        if hi == lo:
            return QuadratureResult(0.0, 0.0, True)
        if method == "auto":
            return _integrate_exact(f, lo, hi)
        return adaptive_simpson(lambda s: float(f(s)), lo, hi, tol)
    if hi == lo:
        return QuadratureResult(0.0, 0.0, True)
    return adaptive_simpson(f, lo, hi, tol)


def _integrate_exact(f: FunctionSpec, lo, hi) -> QuadratureResult:
    if f.kind == "abs_brownian":
        value = f.path.integral(lo, hi)
        return QuadratureResult(value, 8 * _EPS * abs(value), True)
    if f.kind == "exponential" and f.c != 0:
        # expm1 keeps short intervals accurate
        x = f.c * (hi - lo)
        if abs(x) < 1e-8:
            # series form, also safe for subnormal c
            value = f.k * _exp(f.c * lo) * (hi - lo) * (1.0 + 0.5 * x)
        else:
            value = f.k * _exp(f.c * lo) * _expm1(x) / f.c
    elif f.kind in ("power", "shifted_power") and f.p != -1.0:
        u_lo, u_hi = (lo - f.s0, hi - f.s0) if f.kind == "shifted_power" else (lo, hi)
        q = f.p + 1.0
        if u_lo == 0 and q <= 0:
            value = math.inf if f.k > 0 else -math.inf
        elif abs(q) < 0.5 and u_lo > 0:
            # near-logarithmic exponent: u^q - 1 cancels, expm1 does not
            value = f.k * (math.expm1(q * math.log(u_hi)) - math.expm1(q * math.log(u_lo))) / q
        else:
            value = f.k * (_pow(u_hi, q) - _pow(u_lo, q)) / q
    elif f.kind in ("power", "shifted_power"):
        u_lo, u_hi = (lo - f.s0, hi - f.s0) if f.kind == "shifted_power" else (lo, hi)
        value = math.inf if u_lo == 0 else f.k * math.log(u_hi / u_lo)
    else:
        value = f.antiderivative(hi) - f.antiderivative(lo)
    if math.isinf(value):
        return QuadratureResult(value, 0.0, True)
    return QuadratureResult(value, 16 * _EPS * max(abs(value), 1.0), True)


def integrate_improper(f, lo, tol=IMPROPER_TOL, method="auto", max_doublings=MAX_DOUBLINGS,
                       tail=None) -> QuadratureResult:
    """Integral of ``f`` over [lo, infinity).

    With ``method='auto'`` a catalog kind that knows its exact tail returns
    it directly.  Otherwise the upper cutoff starts at ``lo + 1`` and doubles;
    convergence needs both the latest increment and the tail bound below
    ``tol``.  Increments that stop contracting give the +inf marker.  If they
    shrink but no tail bound exists, the partial sum comes back with
    ``converged=False``.

    ``tail`` is an optional callable giving the tail bound for plain-callable
    integrands.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    if isinstance(f, FunctionSpec):
        if lo < f.domain_lo:
            raise DomainError(f"{f.kind}: lower limit {lo} below domain {f.domain_lo}")
        if f.kind == "abs_brownian":
            raise DomainError("a sampled path has no improper integral")
        tail = f.tail
        if method == "auto":
            value = f.tail(lo)
            return QuadratureResult(value, 0.0 if math.isinf(value) else 16 * _EPS * max(value, 1.0),
                                    True, math.inf)

        def segment(x, y):
            return _integrate_exact(f, x, y) if method == "doubling" else integrate(f, x, y, tol / 4, "numeric")
    else:
        def segment(x, y):
            return integrate(f, x, y, tol / 4)

    cutoff = lo + 1.0
    first = segment(lo, cutoff)
    if math.isinf(first.value):
        return QuadratureResult(math.inf, 0.0, True, cutoff)
    total = first.value
    err = first.abs_error_estimate
    increments = []
    bound = None
    for _ in range(max_doublings):
        nxt = lo + 2.0 * (cutoff - lo)
        seg = segment(cutoff, nxt)
        cutoff = nxt
        if math.isinf(seg.value):
            return QuadratureResult(math.inf, 0.0, True, cutoff)
        total += seg.value
        err += seg.abs_error_estimate
        increments.append(abs(seg.value))
        bound = tail(cutoff) if tail is not None else None
        if bound == math.inf and _stalled(increments):
            return QuadratureResult(math.inf, 0.0, True, cutoff)
        if abs(seg.value) <= tol and bound is not None and bound <= tol:
            return QuadratureResult(total + bound, err + abs(seg.value), True, cutoff)
    if bound is not None and math.isfinite(bound):
        return QuadratureResult(total + bound, err, True, cutoff)
    if bound == math.inf or _stalled(increments):
        return QuadratureResult(math.inf, 0.0, True, cutoff)
    return QuadratureResult(total, err + (increments[-1] if increments else 0.0), False, cutoff)


def _stalled(increments, run=3):
    """True when the last ``run`` increments failed to contract."""
    if len(increments) < run + 1:
        return False
    recent = increments[-run - 1:]
    return all(b >= a * (1 - 1e-12) for a, b in zip(recent, recent[1:]))


def invert_monotone(f, target, bracket, tol=1e-12, direction="increasing", xtol=1e-14,
                    max_expand=1100, max_iter=400):
    """Solve f(x) = target for monotone f.

    Bisection narrows the bracket, then Illinois-style secant steps refine it.
    The upper end doubles its width while the target lies beyond f(hi).
    The loop stops once the bracket is below ``xtol`` (relative to |x|) with
    both ends within ``tol`` of the target, or once it is a few ulps wide,
    and returns the bracket midpoint.
    """
    if direction not in ("increasing", "decreasing"):
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    sign = 1.0 if direction == "increasing" else -1.0

    def h(x):
        return sign * (f(x) - target)

    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo <= hi:
        raise ValueError(f"bad bracket {bracket}")
    h_lo = h(lo)
    if h_lo == 0:
        return lo
    if h_lo > 0:
        raise OutOfRangeError(f"target {target} below attained range starting at f({lo})={f(lo)}",
                              attained=(f(lo), f(hi)))
    h_hi = h(hi)
    expansions = 0
    while h_hi < 0:
        if expansions >= max_expand or math.isinf(hi):
            raise OutOfRangeError(f"target {target} beyond attained range ending at f({hi})={f(hi)}",
                                  attained=(f(lo), f(hi)))
        step = 2.0 * (hi - lo) if hi > lo else 1.0
        lo, h_lo = hi, h_hi
        hi = hi + step
        h_hi = h(hi)
        if h_hi < h_lo - tol:
            raise NonMonotoneError(f"f not {direction} on [{lo}, {hi}]")
        expansions += 1
    if h_hi == 0:
        return hi
    if math.isnan(h_lo) or math.isnan(h_hi):
        raise NonMonotoneError("f returned NaN inside the bracket")

    width0 = hi - lo
    w_lo, w_hi = h_lo, h_hi  # Illinois-weighted copies
    side = 0
    for _ in range(max_iter):
        width = hi - lo
        scale = max(abs(lo), abs(hi))
        if width <= 4 * _EPS * scale:
            break
        # midpoint error is at most max(|h_lo|, |h_hi|) by monotonicity
        if width <= xtol * max(scale, 1.0) and max(-h_lo, h_hi) <= tol:
            break
        use_secant = width < 1e-3 * width0 and math.isfinite(w_lo) and math.isfinite(w_hi)
        x = (lo * w_hi - hi * w_lo) / (w_hi - w_lo) if use_secant else 0.5 * (lo + hi)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        hx = h(x)
        if math.isnan(hx) or hx < h_lo - tol or hx > h_hi + tol:
            raise NonMonotoneError(f"f not {direction} around x={x}")
        if hx == 0:
            return x
        if hx < 0:
            lo, h_lo, w_lo = x, hx, hx
            if use_secant and side == -1:
                w_hi *= 0.5
            side = -1
        else:
            hi, h_hi, w_hi = x, hx, hx
            if use_secant and side == 1:
                w_lo *= 0.5
            side = 1
    return 0.5 * (lo + hi)


def running_sup(f, t, lo=0.0, grid_points=4097):
    """sup of f over [lo, t].

    Analytic for monotone catalog kinds, prefix maximum for sampled paths,
    grid maximization plus a local golden-section polish otherwise.
    """
    if t < lo:
        raise DomainError("running_sup needs t >= lo")
    if f is None:
        return 0.0
    if isinstance(f, FunctionSpec):
        if f.kind == "abs_brownian":
            return f.path.running_max(t)
        if f.monotone == "nondecreasing":
            return float(f(t))
        if f.monotone == "nonincreasing":
            return float(f(lo))
        func = f
    else:
        func = f
    xs = np.linspace(lo, t, grid_points)
    vals = np.array([float(func(x)) for x in xs])
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    best = vals[i]
    gr = (math.sqrt(5) - 1) / 2
    for _ in range(60):
        c, d = b - gr * (b - a), a + gr * (b - a)
        if func(c) > func(d):
            b = d
        else:
            a = c
    return max(best, float(func(0.5 * (a + b))))
