"""Closed forms for the power-law (Paris) instance a = a0, b(s) = s^(1+alpha).

The intensity and drift constants only enter through their product, so a
problem with a = Constant(ka), b = Power(kb, 1 + alpha) is the same as
a0 = ka * kb with a unit drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .funcat import FunctionSpec
from .stochastic import phi_inverse, phi_survival
from .transforms import ProblemSpec


@dataclass(frozen=True)
class ParisParams:
    alpha: float
    a0: float
    x0: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.a0 > 0 and self.x0 > 0):
            raise PreconditionError(f"Paris parameters must be positive: {self}")

    @classmethod
    def from_problem(cls, p: ProblemSpec) -> "ParisParams":
        if p.a.kind != "constant":
            raise PreconditionError(f"Paris analysis needs a constant intensity, got {p.a.kind}")
        if p.b.kind != "power" or not p.b.p > 1:
            raise PreconditionError("Paris analysis needs a power drift s^(1+alpha) with alpha > 0")
        return cls(p.b.p - 1.0, p.a.k * p.b.k, p.x0)

    def problem(self, g=None) -> ProblemSpec:
        return ProblemSpec(self.x0, FunctionSpec.constant(self.a0),
                           FunctionSpec.power(1.0, 1.0 + self.alpha), g)

    @property
    def T(self) -> float:
        return 1.0 / (self.alpha * self.a0 * self.x0**self.alpha)


def afe_bound(pp: ParisParams, t, conv="centered"):
    """1 - Phi(((alpha a0 t)^(-1/alpha) - x0) / sqrt(T)) for 0 < t < T."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    arg = ((pp.alpha * pp.a0 * t) ** (-1.0 / pp.alpha) - pp.x0) / math.sqrt(pp.T)
    return np.array([phi_survival(max(x, 0.0), conv) for x in arg])


def prop2_curve(pp: ParisParams, t, conv="centered"):
    """1 - Phi((x0/sqrt(t)) ((alpha a0 x0^alpha t)^(-1/(1+alpha)) - 1)) for 0 < t < T."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    inner = (pp.alpha * pp.a0 * pp.x0**pp.alpha * t) ** (-1.0 / (1.0 + pp.alpha)) - 1.0
    arg = pp.x0 / np.sqrt(t) * inner
    return np.array([phi_survival(max(x, 0.0), conv) for x in arg])


def maintenance_time(pp: ParisParams, q=0.95, conv="cdf") -> float:
    """t = (1/(alpha a0)) [x0 + sqrt(T) Phi^-1(q)]^(-alpha)."""
    try:
        z = phi_inverse(q, conv)
    except ValueError as exc:
        raise PreconditionError(f"no maintenance time for q={q} under the {conv} convention") from exc
    return (pp.x0 + math.sqrt(pp.T) * z) ** (-pp.alpha) / (pp.alpha * pp.a0)


def comparison_table(alphas=(0.5, 1.0, 2.0), a0s=(0.5, 1.0, 2.0), x0s=(0.5, 1.0, 2.0),
                     fractions=(0.1, 0.3, 0.5, 0.7, 0.9), conv="cdf"):
    """Rows (alpha, a0, x0, t/T, afe, prop2, smaller) over a parameter grid.

    ``smaller`` names the tighter of the two upper bounds on P(T_e <= t).
    """
    rows = []
    for alpha in alphas:
        for a0 in a0s:
            for x0 in x0s:
                pp = ParisParams(alpha, a0, x0)
                ts = np.asarray(fractions) * pp.T
                afe = afe_bound(pp, ts, conv)
                p2 = prop2_curve(pp, ts, conv)
                for f, u, v in zip(fractions, afe, p2):
                    smaller = "prop2" if v < u else ("afe" if u < v else "equal")
                    rows.append((alpha, a0, x0, float(f), float(u), float(v), smaller))
    return rows
