"""Reflected-Brownian noise: sampled paths, probability bounds on the
explosion time, and a Monte Carlo oracle for them."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from . import _kernels
from .dynamics import SolverControls, _encode_problem, tail_correction
from .errors import DomainError, OutOfRangeError, PreconditionError
from .funcat import FunctionSpec
from .transforms import (
    A_inverse,
    A_of,
    B_infinity,
    B_r_of,
    ProblemSpec,
    beta_inverse,
    beta_of,
    require_finite_T,
    tilde_B,
    tilde_B_inverse_in_r,
    tilde_B_inverse_in_x,
)

Z_95 = 1.959963984540054


# -- paths ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NoisePath:
    """sigma * |W| sampled on a uniform grid, with cached prefix maxima."""

    dt: float
    samples: np.ndarray
    seed: int | None = None
    sigma: float = 1.0

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("a path needs at least two samples")
        if samples[0] != 0 or np.any(samples < 0):
            raise ValueError("path samples must start at 0 and stay nonnegative")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        prefix = np.maximum.accumulate(samples)
        prefix.setflags(write=False)
        object.__setattr__(self, "prefix_max", prefix)
        times = np.arange(samples.size) * self.dt
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        trap = 0.5 * self.dt * (samples[1:] + samples[:-1])
        object.__setattr__(self, "_cum", np.concatenate(([0.0], np.cumsum(trap))))

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def value_at(self, t):
        return np.interp(t, self.times, self.samples)

    def _check(self, t):
        if not (0 <= t <= self.horizon * (1 + 1e-12)):
            raise DomainError(f"t={t} outside path horizon [0, {self.horizon}]")

    def running_max(self, t) -> float:
        self._check(t)
        k = min(int(math.floor(t / self.dt)), self.samples.size - 1)
        return float(max(self.prefix_max[k], self.value_at(t)))

    def hitting_time(self, r):
        """First time the interpolated path reaches level r, or None."""
        if r < 0:
            raise DomainError("level must be nonnegative")
        if r <= self.samples[0]:
            return 0.0
        m = int(np.argmax(self.prefix_max >= r))
        if self.prefix_max[m] < r:
            return None
        lo, hi = self.times[m - 1], self.times[m]
        s_lo, s_hi = self.samples[m - 1], self.samples[m]
        t = lo + (hi - lo) * (r - s_lo) / (s_hi - s_lo)
        if t <= lo:
            t = float(np.nextafter(lo, math.inf))
        return float(min(t, hi))

    def integral(self, lo, hi) -> float:
        """Exact integral of the piecewise-linear path over [lo, hi]."""
        self._check(lo)
        self._check(hi)
        return self._prim(hi) - self._prim(lo)

    def _prim(self, t):
        k = min(int(math.floor(t / self.dt)), self.samples.size - 2)
        tau = t - self.times[k]
        s0 = self.samples[k]
        slope = (self.samples[k + 1] - s0) / self.dt
        return float(self._cum[k] + s0 * tau + 0.5 * slope * tau * tau)


def _normals(n, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    # shift off 0 so the inverse CDF stays finite
    u = rng.random(n) + 2.0**-54
    return special.ndtri(u)


def sample_path(horizon: float, dt: float, seed: int, sigma: float = 1.0) -> NoisePath:
    """sigma*|W| on [0, >= horizon], Gaussian increments by inverse CDF from a seeded PCG64."""
    if not (horizon > 0 and dt > 0):
        raise DomainError("horizon and dt must be positive")
    if dt > horizon:
        raise DomainError(f"dt={dt} exceeds horizon={horizon}")
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    n = int(math.ceil(horizon / dt - 1e-9))
    w = np.empty(n + 1)
    w[0] = 0.0
    np.cumsum(_normals(n, seed) * (sigma * math.sqrt(dt)), out=w[1:])
    return NoisePath(dt, np.abs(w), seed, sigma)


def running_max(path: NoisePath, t: float) -> float:
    return path.running_max(t)


def hitting_time(path: NoisePath, r: float):
    return path.hitting_time(r)


# -- normal distribution conventions ---------------------------------------------

class NormalConvention(str, Enum):
    """How Phi is read.

    ``centered``: Phi(x) = P(0 <= Z <= x), the literal reading, range [0, 1/2).
    ``cdf``:      Phi(x) = P(Z <= x), range [1/2, 1) on x >= 0.
    """

    CENTERED = "centered"
    CDF = "cdf"


def phi(x, conv="centered") -> float:
    conv = NormalConvention(conv)
    if x < 0:
        raise DomainError("Phi is only used on x >= 0")
    if conv is NormalConvention.CENTERED:
        return 0.5 * math.erf(x / math.sqrt(2.0)) if math.isfinite(x) else 0.5
    return float(special.ndtr(x))


def phi_survival(x, conv="centered") -> float:
    """1 - Phi(x), computed without cancellation."""
    conv = NormalConvention(conv)
    if x < 0:
        raise DomainError("Phi is only used on x >= 0")
    tail = 0.5 * math.erfc(x / math.sqrt(2.0)) if math.isfinite(x) else 0.0
    return 0.5 + tail if conv is NormalConvention.CENTERED else tail


def phi_inverse(q, conv="centered") -> float:
    conv = NormalConvention(conv)
    if conv is NormalConvention.CENTERED:
        if not 0 <= q < 0.5:
            raise OutOfRangeError(f"centered Phi^-1 needs q in [0, 0.5), got {q}", attained=(0.0, 0.5))
        return float(math.sqrt(2.0) * special.erfinv(2.0 * q))
    if not 0.5 <= q < 1:
        raise OutOfRangeError(f"cdf Phi^-1 needs q in [0.5, 1) on x >= 0, got {q}", attained=(0.5, 1.0))
    return float(special.ndtri(q))


def _clamp(x):
    return min(1.0, max(0.0, x))


# -- probability bounds -------------------------------------------------------------

def bound_pra1(p: ProblemSpec, t: float, T: float | None = None, conv="centered") -> float:
    """P(T_e <= t) <= 1 - Phi(beta^-1(A(t)) / sqrt(T)), 0 <= t < T."""
    T = require_finite_T(p, "bound_pra1") if T is None else T
    if not 0 <= t < T:
        raise DomainError(f"bound_pra1 needs 0 <= t < T={T}, got {t}")
    if t == 0:
        return _clamp(phi_survival(math.inf, conv))
    r = max(beta_inverse(p, A_of(p, t)), 0.0)
    return _clamp(phi_survival(r / math.sqrt(T), conv))


def maintenance_time(p: ProblemSpec, q: float = 0.95, conv="cdf", T: float | None = None) -> float:
    """The t at which bound_pra1(t) = 1 - q."""
    T = require_finite_T(p, "maintenance_time") if T is None else T
    try:
        r = math.sqrt(T) * phi_inverse(q, conv)
    except OutOfRangeError as exc:
        raise PreconditionError(f"no maintenance time for q={q} under the {NormalConvention(conv).value} "
                                f"convention: {exc}") from exc
    return A_inverse(p, beta_of(p, r))


def pra2_inner_time(p: ProblemSpec, t: float, r: float) -> float:
    """A^-1(B(tilde_B_r^-1(A(t)))); inf when A(t) >= tilde_B_r(inf)."""
    y = A_of(p, t)
    if y >= beta_of(p, r):
        return math.inf
    x = tilde_B_inverse_in_x(p, r, y)
    return A_inverse(p, B_r_of(p, 0.0, x))


def bound_pra2(p: ProblemSpec, t: float, r: float, T: float | None = None, conv="centered") -> float:
    """P(T_e <= t | T_r < T) bound; 1.0 when A(t) >= tilde_B_r(inf) (event certain)."""
    T = require_finite_T(p, "bound_pra2") if T is None else T
    if not 0 <= t <= T:
        raise DomainError(f"bound_pra2 needs 0 <= t <= T={T}, got {t}")
    if r < 0:
        raise DomainError("r must be nonnegative")
    denom = phi_survival(r / math.sqrt(T), conv)
    if denom < 1e-300:
        raise DomainError(f"conditioning event has probability ~0 (r={r}, T={T})")
    if r == 0:
        return 1.0
    s = pra2_inner_time(p, t, r)
    if math.isinf(s):
        return 1.0
    num = phi_survival(r / math.sqrt(s), conv) if s > 0 else phi_survival(math.inf, conv)
    return _clamp(num / denom)


def bound_crack(p: ProblemSpec, t: float, L: float, T: float | None = None, conv="centered") -> float:
    """P(Y reaches L by t) <= 1 - Phi(tilde_B^L inverted at A(t), over sqrt(T))."""
    T = require_finite_T(p, "bound_crack") if T is None else T
    if not L > p.x0:
        raise DomainError(f"bound_crack needs L > x0={p.x0}, got {L}")
    if t < 0:
        raise DomainError("t must be nonnegative")
    y = A_of(p, t)
    if y > tilde_B(p, -p.x0, L):
        return 1.0
    try:
        r = tilde_B_inverse_in_r(p, L, y)
    except OutOfRangeError:
        return 1.0
    if r < 0:
        return 1.0
    return _clamp(phi_survival(r / math.sqrt(T), conv))


# -- Monte Carlo ------------------------------------------------------------------

def wilson_halfwidth(k, n, z=Z_95):
    """Half-width of the Wilson score interval for k successes in n trials."""
    k = np.asarray(k, dtype=float)
    if n <= 0:
        return np.full_like(k, np.nan)
    ph = k / n
    return z / (1.0 + z * z / n) * np.sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n))


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Per-path Monte Carlo outcomes, ordered by seed."""

    seeds: np.ndarray
    t_lo: np.ndarray  # nan where censored
    t_hi: np.ndarray
    censored: np.ndarray
    ghat_T: np.ndarray  # running max of the noise over [0, min(T, horizon)]
    level_time: np.ndarray  # first time Y reached ``level`` (nan if never)
    horizon: float
    dt: float
    T: float
    level: float | None = None

    @property
    def n(self) -> int:
        return int(self.seeds.size)

    @property
    def times(self) -> np.ndarray:
        return 0.5 * (self.t_lo + self.t_hi)

    @property
    def all_censored(self) -> bool:
        return bool(np.all(self.censored))

    def _counts(self, values, ts, mask=None):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        v = values if mask is None else values[mask]
        v = np.sort(v[~np.isnan(v)])
        return np.searchsorted(v, ts, side="right"), (self.n if mask is None else int(np.sum(mask)))

    def cdf(self, ts, mask=None):
        k, n = self._counts(self.times, ts, mask)
        return k / n if n else np.full(k.shape, np.nan)

    def halfwidth(self, ts, mask=None):
        k, n = self._counts(self.times, ts, mask)
        return wilson_halfwidth(k, n)

    def standard_error(self, ts, mask=None):
        f = self.cdf(ts, mask)
        n = self.n if mask is None else int(np.sum(mask))
        return np.sqrt(f * (1 - f) / n)

    def level_cdf(self, ts):
        k, n = self._counts(self.level_time, ts)
        return k / n


def _simulate_seeds(p, seeds, horizon, dt, sigma, controls, T, level, tail_cap):
    ac, ap, bc, bp, gc, gp, _, _ = _encode_problem(p.with_noise(None))
    out = []
    for seed in seeds:
        path = sample_path(horizon, dt, int(seed), sigma)
        res = _kernels.solve_kernel(
            ac, ap, bc, bp, _kernels.PATH, gp, path.samples, path.dt, float(p.x0), horizon,
            controls.h0, controls.tol, controls.atol, controls.h_max, controls.y_cap,
            -1.0 if level is None else float(level), False, controls.max_steps)
        status, t_end, y_end, t_level = res[0], res[1], res[2], res[3]
        if status == _kernels.CAP:
            t_hi = t_end + tail_cap / float(p.a(t_end))
            lo, hi = t_end, t_hi
        elif status == _kernels.RESOLUTION:
            lo, hi = t_end, t_end + tail_correction(p, t_end, y_end)
        else:
            lo = hi = math.nan
        if not hi > lo:
            hi = float(np.nextafter(lo, math.inf)) if math.isfinite(lo) else hi
        ghat = path.running_max(min(T, path.horizon)) if math.isfinite(T) else path.running_max(path.horizon)
        out.append((lo, hi, ghat, t_level if t_level >= 0 else math.nan))
    return out


def mc_explosion(p: ProblemSpec, n_paths: int, horizon: float | None = None, dt: float = 1e-4,
                 base_seed: int = 0, controls: SolverControls | None = None, sigma: float = 1.0,
                 level: float | None = None, workers: int = 1) -> EmpiricalDistribution:
    """Explosion times for noise sigma*|W| over seeds base_seed .. base_seed + n_paths - 1.

    Paths still finite at ``horizon`` (default 1.1 T) are censored.  Any
    noise already on ``p`` is replaced.  Results depend only on the inputs,
    whatever the worker count.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    base = p.with_noise(None)
    T = require_finite_T(base, "mc_explosion") if math.isfinite(B_infinity(base)) else math.inf
    if horizon is None:
        if math.isinf(T):
            raise PreconditionError("mc_explosion needs a horizon when T is infinite")
        horizon = 1.1 * T
    controls = controls or SolverControls(t_max=horizon)
    tail_cap = tail_correction(base, 0.0, controls.y_cap) * float(base.a(0.0))
    seeds = np.arange(base_seed, base_seed + n_paths, dtype=np.int64)
    chunks = np.array_split(seeds, max(1, min(workers, n_paths)))
    args = (base, horizon, dt, sigma, controls, T, level, tail_cap)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda ch: _simulate_seeds(base, ch, *args[1:]), chunks))
    else:
        parts = [_simulate_seeds(base, ch, *args[1:]) for ch in chunks]
    rows = np.array([row for part in parts for row in part], dtype=float).reshape(-1, 4)
    t_lo, t_hi, ghat, lvl = rows.T
    censored = np.isnan(t_lo)
    if np.all(censored):
        warnings.warn("all Monte Carlo paths were censored; the empirical CDF is empty", RuntimeWarning,
                      stacklevel=2)
    arrays = [seeds, t_lo, t_hi, censored, ghat, lvl]
    for arr in arrays:
        arr.setflags(write=False)
    return EmpiricalDistribution(*arrays, horizon=float(horizon), dt=float(dt), T=float(T), level=level)


def arbitrate_pra1(p: ProblemSpec, dist: EmpiricalDistribution, ts, conventions=("centered", "cdf")):
    """Compare empirical P(T_e <= t) with bound_pra1 under each convention.

    A convention is valid at t when empirical <= bound + 3 SE.
    """
    T = dist.T
    ts = np.asarray(ts, dtype=float)
    emp = dist.cdf(ts)
    se = dist.standard_error(ts)
    report = {}
    for conv in conventions:
        bounds = np.array([bound_pra1(p, float(t), T, conv) for t in ts])
        ok = emp <= bounds + 3 * se
        report[NormalConvention(conv).value] = {
            "t": ts.tolist(), "empirical": emp.tolist(), "se": se.tolist(),
            "bound": bounds.tolist(), "ok": ok.tolist(), "valid": bool(np.all(ok)),
        }
    return report
