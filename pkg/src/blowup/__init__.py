"""Finite-time blow-up of Y' = a(t) b(Y + g(t)): Osgood-type tests,
explosion-time bounds, a blow-up aware ODE solver and Monte Carlo checks
for reflected Brownian noise."""

from .errors import (
    BlowupError,
    DomainError,
    InconsistencyError,
    NonConvergenceError,
    NonMonotoneError,
    OutOfRangeError,
    PreconditionError,
)
from .funcat import FunctionSpec, QuadratureResult, integrate, integrate_improper, invert_monotone
from .transforms import ProblemSpec
from .osgood import ExplosionReport, check_comparison, noiseless_solution, osgood_test
from .dynamics import SolverControls, Trajectory, explosion_time_thm2, solve_noisy
from .bounds import BoundReport, bound_report, epa_bounds, prop2_lower, submult_constant
from .stochastic import (
    NoisePath,
    NormalConvention,
    bound_crack,
    bound_pra1,
    bound_pra2,
    mc_explosion,
    sample_path,
)

__version__ = "0.1.0"
