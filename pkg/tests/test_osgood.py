import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup.dynamics import SolverControls, solve_noisy
from blowup.errors import DomainError, NonConvergenceError, PreconditionError
from blowup.funcat import FunctionSpec
from blowup.osgood import (
    ExplosionReport,
    SaturationWarning,
    check_comparison,
    noiseless_solution,
    osgood_test,
)
from blowup.transforms import A_of, B_infinity, B_r_of, ProblemSpec

from conftest import counterexample_problem, quad_problem


class TestOsgood:
    def test_quadratic(self):
        rep = osgood_test(quad_problem())
        assert rep.explodes and rep.T_point == pytest.approx(1.0, abs=1e-12)
        assert rep.method == "osgood_exact"

    @pytest.mark.parametrize("alpha,a0,x0", [(2, 0.5, 2), (1, 1, 1), (0.5, 2, 0.5)])
    def test_paris(self, alpha, a0, x0):
        p = ProblemSpec(x0, FunctionSpec.constant(a0), FunctionSpec.power(1, 1 + alpha))
        assert osgood_test(p).T_point == pytest.approx(1 / (alpha * a0 * x0**alpha), rel=1e-9)

    def test_counterexample_does_not_explode_by_test(self):
        rep = osgood_test(counterexample_problem(), ignore_noise=True)
        assert not rep.explodes and math.isinf(rep.T_point)
        assert rep.details["B_inf"] == pytest.approx(2.0)
        assert rep.details["A_inf"] == pytest.approx(1.0)
        assert rep.warnings

    def test_noise_needs_opt_in(self):
        with pytest.raises(PreconditionError):
            osgood_test(counterexample_problem())

    def test_linear_growth(self):
        p = ProblemSpec(1.0, FunctionSpec.constant(1), FunctionSpec.constant(1))
        assert not osgood_test(p).explodes

    def test_report_invariants(self):
        with pytest.raises(ValueError):
            ExplosionReport(True, math.inf, None, "osgood_exact")
        with pytest.raises(ValueError):
            ExplosionReport(True, 1.0, (1.5, 2.0), "osgood_exact")
        with pytest.raises(ValueError):
            ExplosionReport(True, 1.0, None, "guess")
        assert ExplosionReport(True, 1.0, (0.5, 1.5), "numeric_blowup").to_dict()["T_bracket"] == [0.5, 1.5]


intensities = st.one_of(
    st.builds(FunctionSpec.constant, st.floats(0.1, 5)),
    st.builds(FunctionSpec.exponential, st.floats(0.1, 5), st.floats(-2, 1)),
)
drifts = st.one_of(
    st.builds(FunctionSpec.power, st.floats(0.1, 5), st.floats(0.0, 4)),
    st.builds(FunctionSpec.exponential, st.floats(0.1, 5), st.floats(-1, 3)),
    st.builds(FunctionSpec.constant, st.floats(0.1, 5)),
)


@settings(max_examples=500)
@given(a=intensities, b=drifts, x0=st.floats(0.2, 5))
def test_dichotomy(a, b, x0):
    try:
        rep = osgood_test(ProblemSpec(x0, a, b))
    except NonConvergenceError:
        # only for explosion times past the float range (subnormal rates)
        assert B_infinity(ProblemSpec(x0, a, b)) > 1e300
        return
    b_inf, a_inf = rep.details["B_inf"], rep.details["A_inf"]
    assert rep.explodes == (b_inf < a_inf)
    assert rep.explodes == math.isfinite(rep.T_point)
    if rep.explodes:
        assert A_of(ProblemSpec(x0, a, b), rep.T_point) == pytest.approx(b_inf, rel=1e-9)


class TestNoiselessSolution:
    def test_closed_form(self):
        p = quad_problem()
        assert noiseless_solution(p, 0) == 1.0
        assert noiseless_solution(p, 0.5) == pytest.approx(2.0, rel=1e-10)
        assert noiseless_solution(p, 0.9) == pytest.approx(10.0, rel=1e-9)

    def test_past_blow_up(self):
        with pytest.raises(DomainError):
            noiseless_solution(quad_problem(), 1.0)

    def test_saturation(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            y = noiseless_solution(quad_problem(), 1 - 1e-10)
        assert any(issubclass(w.category, SaturationWarning) for w in caught)
        assert math.isfinite(y) and y > 1e8

    @settings(max_examples=300)
    @given(a=intensities, b=drifts, x0=st.floats(0.2, 5), frac=st.floats(0.01, 0.9))
    def test_ode_residual_and_identity(self, a, b, x0, frac):
        p = ProblemSpec(x0, a, b)
        rep = osgood_test(p)
        t = frac * (rep.T_point if rep.explodes else 2.0)
        y = noiseless_solution(p, t)
        # B(y(t)) = A(t)
        assert B_r_of(p, 0.0, y) == pytest.approx(A_of(p, t), rel=1e-9, abs=1e-12)
        h = 1e-4 * min(t, (rep.T_point - t) if rep.explodes else t)
        deriv = (noiseless_solution(p, t + h) - noiseless_solution(p, t - h)) / (2 * h)
        rhs = float(a(t)) * float(b(y))
        assert abs(deriv - rhs) <= 1e-4 * (1 + abs(rhs))

    def test_increasing(self):
        p = quad_problem()
        ys = [noiseless_solution(p, t) for t in np.linspace(0, 0.95, 20)]
        assert np.all(np.diff(ys) > 0)


class TestComparison:
    def test_reflexive(self):
        u = solve_noisy(quad_problem(), SolverControls(t_max=0.9))
        rep = check_comparison(u, u)
        assert rep.ok and rep.n_compared == len(u.grid)

    def test_noise_dominates(self):
        u = solve_noisy(quad_problem())
        v = solve_noisy(quad_problem(FunctionSpec.constant(0.5)))
        rep = check_comparison(u, v, drift=FunctionSpec.power(1, 2))
        assert rep.ok

    def test_violation_detected(self):
        u = solve_noisy(quad_problem(FunctionSpec.constant(0.5)), SolverControls(t_max=0.5))
        v = solve_noisy(quad_problem(), SolverControls(t_max=0.5))
        rep = check_comparison(u, v)
        assert not rep.ok and rep.violations

    def test_precondition_flagged(self):
        u = solve_noisy(quad_problem(), SolverControls(t_max=0.5))
        rep = check_comparison(u, u, drift=FunctionSpec.power(1, -1))
        assert rep.precondition_failures and not rep.ok
        rep = check_comparison(u, u, x0=1.0, x1=0.5)
        assert rep.precondition_failures
