"""Comparison principle on randomized catalog instances.

u solves Y' = a b(Y + g_u) from x0 and v solves Y' = a b(Y + g_v) from
x1 >= x0 with g_v >= g_u >= 0.  Since b is non-decreasing, v' >= a b(v + g_u),
so v must dominate u.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup.dynamics import SolverControls, solve_noisy
from blowup.funcat import FunctionSpec
from blowup.osgood import check_comparison
from blowup.transforms import ProblemSpec

N_INSTANCES = 200
CONTROLS = SolverControls(t_max=2.0, tol=1e-10)

intensities = st.one_of(
    st.builds(FunctionSpec.constant, st.floats(0.1, 2)),
    st.builds(FunctionSpec.exponential, st.floats(0.1, 2), st.floats(-1, 0.5)),
)
nondecreasing_drifts = st.one_of(
    st.builds(FunctionSpec.power, st.floats(0.1, 2), st.floats(0.0, 3)),
    st.builds(FunctionSpec.shifted_power, st.floats(0.1, 2), st.floats(0.5, 3), st.floats(-0.1, 0.0)),
    st.builds(FunctionSpec.exponential, st.floats(0.1, 2), st.floats(0.0, 1.5)),
    st.builds(FunctionSpec.constant, st.floats(0.1, 2)),
)


@st.composite
def noise_pair(draw):
    """(g_u, g_v) with 0 <= g_u <= g_v pointwise, from a shared shape."""
    k_u = draw(st.floats(0.0, 1.0))
    k_v = k_u + draw(st.floats(0.0, 1.0))
    shape = draw(st.sampled_from(["none", "constant", "power", "exponential"]))
    if shape == "none":
        return None, FunctionSpec.constant(k_v - k_u)
    if shape == "constant":
        return FunctionSpec.constant(k_u), FunctionSpec.constant(k_v)
    if shape == "power":
        p = draw(st.floats(0.0, 2.0))
        return FunctionSpec.power(k_u, p), FunctionSpec.power(k_v, p)
    c = draw(st.floats(-1.0, 1.0))
    return FunctionSpec.exponential(k_u, c), FunctionSpec.exponential(k_v, c)


@settings(max_examples=N_INSTANCES)
@given(a=intensities, b=nondecreasing_drifts, noise=noise_pair(), x0=st.floats(0.2, 3),
       dx=st.floats(0.0, 1.0))
def test_comparison_suite(a, b, noise, x0, dx):
    g_u, g_v = noise
    x1 = x0 + dx
    u = solve_noisy(ProblemSpec(x0, a, b, g_u), CONTROLS)
    v = solve_noisy(ProblemSpec(x1, a, b, g_v), CONTROLS)
    rep = check_comparison(u, v, drift=b, x0=x0, x1=x1)
    assert not rep.precondition_failures
    assert not rep.violations, rep.violations[:3]
    assert rep.explosion_order_ok
    assert rep.n_compared >= 2 and np.isfinite(rep.max_shortfall)
