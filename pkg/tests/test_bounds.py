import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup.bounds import (
    A_tilde_of,
    BoundReport,
    bound_report,
    epa_bounds,
    epa_lower,
    pathwise_bounds,
    prop2_lower,
    submult_constant,
)
from blowup.dynamics import SolverControls, solve_noisy
from blowup.errors import PreconditionError
from blowup.funcat import FunctionSpec
from blowup.stochastic import sample_path
from blowup.transforms import A_of, ProblemSpec

from conftest import counterexample_problem, quad_problem

ONE = FunctionSpec.constant(1.0)


class TestEPA:
    def test_noiseless_collapses(self):
        rep = epa_bounds(quad_problem())
        assert rep.lower_epa == pytest.approx(1.0) and rep.upper == pytest.approx(1.0)

    def test_constant_noise(self):
        # beta(1) = 1/2 for s^-2, so A^-1(1/2) = 1/2
        rep = epa_bounds(quad_problem(ONE))
        assert rep.lower_epa == pytest.approx(0.5, abs=1e-10)
        assert rep.upper == pytest.approx(1.0)
        assert rep.ghat_T == 1.0

    def test_large_noise_gives_zero(self):
        p = ProblemSpec(1.0, FunctionSpec.exponential(1.0, -1.0), FunctionSpec.power(4.0, 2.0))
        # beta(0) = 1/4 < A(inf) = 1, while beta(-0.9) = 2.5 > 1
        assert epa_lower(p, 0.0) > 0
        assert epa_lower(p, -0.9) == 0.0

    def test_needs_finite_T(self):
        with pytest.raises(PreconditionError):
            epa_bounds(counterexample_problem())

    def test_report_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            BoundReport(2.0, 1.0)


class TestSubmult:
    def test_quadratic(self):
        assert submult_constant(FunctionSpec.power(1, 2)) == 1.0

    @pytest.mark.parametrize("k,p", [(0.25, 3), (2.0, 1.5), (5.0, 0.5)])
    def test_power(self, k, p):
        assert submult_constant(FunctionSpec.power(k, p)) == pytest.approx(1 / k)

    def test_constant(self):
        assert submult_constant(FunctionSpec.constant(4.0)) == pytest.approx(0.25)

    def test_exponential_rejected(self):
        with pytest.raises(PreconditionError):
            submult_constant(FunctionSpec.exponential(1.0, 1.0))

    def test_shifted_power(self):
        b = FunctionSpec.shifted_power(1.0, 2.0, -0.5)
        c = submult_constant(b)
        x = np.linspace(0, 50, 101)
        ratio = b(x[:, None] * x[None, :]) / (b(x)[:, None] * b(x)[None, :])
        assert np.max(ratio) <= c * (1 + 1e-12)

    @settings(max_examples=200)
    @given(k=st.floats(0.1, 5), p=st.floats(0.0, 4), x=st.floats(0, 100), y=st.floats(0, 100))
    def test_power_inequality(self, k, p, x, y):
        b = FunctionSpec.power(k, p)
        c = submult_constant(b)
        assert float(b(x * y)) <= c * float(b(x)) * float(b(y)) * (1 + 1e-12) + 1e-300


class TestSubmultLowerBound:
    def test_noiseless(self):
        assert prop2_lower(quad_problem()) == pytest.approx(1.0)

    def test_constant_noise(self):
        # Atilde(t) = c b(2) t = 4t, so Atilde^-1(1) = 1/4
        assert prop2_lower(quad_problem(ONE)) == pytest.approx(0.25, abs=1e-10)
        assert A_tilde_of(quad_problem(ONE), 1.0, 0.5) == pytest.approx(2.0, abs=1e-10)

    def test_report(self):
        rep = bound_report(quad_problem(ONE))
        assert rep.c_used == 1.0
        assert rep.lower_submult == pytest.approx(0.25, abs=1e-10)
        assert rep.which_lower_is_tighter == "epa"

    def test_report_without_submult(self):
        p = ProblemSpec(1.0, ONE, FunctionSpec.exponential(1.0, 1.0), ONE)
        rep = bound_report(p)
        assert rep.lower_submult is None and rep.notes

    def test_path_noise(self):
        path = sample_path(1.1, 1e-3, seed=7)
        p = quad_problem(FunctionSpec.abs_brownian(path))
        epa, sub, T = pathwise_bounds(p, 1.0, c=1.0)
        assert 0 <= epa <= T and 0 <= sub <= T
        # Atilde dominates c b(1) A since g >= 0 and b is non-decreasing
        for t in (0.2, 0.6, 1.0):
            assert A_tilde_of(p, 1.0, t) >= A_of(p, t) * (1 - 1e-12)


@settings(max_examples=25)
@given(seed=st.integers(0, 10**6), alpha=st.sampled_from([0.5, 1.0, 2.0]), a0=st.floats(0.5, 2.0))
def test_sandwich_on_sampled_paths(seed, alpha, a0):
    T = 1.0 / (alpha * a0)
    path = sample_path(1.1 * T, 1e-3, seed=seed)
    p = ProblemSpec(1.0, FunctionSpec.constant(a0), FunctionSpec.power(1.0, 1 + alpha),
                    FunctionSpec.abs_brownian(path))
    tr = solve_noisy(p, SolverControls(t_max=path.horizon))
    assert tr.blow_up is not None
    epa, sub, _ = pathwise_bounds(p, T, c=1.0)
    slack = tr.blow_up.width + 1e-9
    assert epa <= tr.blow_up.t_hi + slack
    assert sub <= tr.blow_up.t_hi + slack
    assert tr.blow_up.t_lo <= T + slack
    assert math.isfinite(tr.blow_up.t_hi)
