"""Descent certificates, their runtime verification, and rate fitting."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igd.core import InfeasibleParametersError, Objective, RunTrace, TraceRecord
from igd.diagnostics import (
    attach_lyapunov,
    check_descent,
    descent_flags,
    fit_rate,
    lyapunov_constants,
    lyapunov_value,
)
from igd.momentum import MomentumSchedule
from igd.problems import gen_least_squares
from igd.solvers import SolverParams, run


class TestConstants:

    def test_frozen_with_momentum(self):
        c = lyapunov_constants(L=1.0, tau=0.1, nu=0.1, beta_bar=0.5, delta_bar=0.5)
        assert math.isclose(c.alpha, 2.9375)
        assert math.isclose(c.c1, 1.3125)
        # sqrt(2) * max(11, 6.5) + 4 * 2.9375.
        assert math.isclose(c.c2, 11.0 * math.sqrt(2.0) + 11.75)

    def test_frozen_without_momentum(self):
        c = lyapunov_constants(L=1.0, tau=0.1, nu=0.1, beta_bar=0.0, delta_bar=0.0)
        assert math.isclose(c.alpha, 2.25)
        assert math.isclose(c.c1, 2.25)
        assert math.isclose(c.c2, 11.0 * math.sqrt(2.0) + 9.0)

    def test_step_term_infeasibility_raises_despite_positive_c1(self):
        # Here c1 = 0.9 / 3.8 > 0, yet L tau = 0.95 >= 1 - nu; a check on
        # c1 alone would wrongly accept these parameters.
        with pytest.raises(InfeasibleParametersError):
            lyapunov_constants(L=1.0, tau=0.95, nu=0.1, beta_bar=0.0, delta_bar=0.0)

    def test_momentum_term_infeasibility_raises(self):
        with pytest.raises(InfeasibleParametersError):
            lyapunov_constants(L=1.0, tau=0.1, nu=0.1, beta_bar=0.95, delta_bar=0.0)

    @settings(max_examples=100, deadline=None)
    @given(
        L=st.floats(0.1, 10.0), tau_frac=st.floats(0.01, 0.99),
        nu=st.floats(0.0, 0.8), beta_bar=st.floats(0.0, 0.6),
        delta_bar=st.floats(0.0, 0.6),
    )
    def test_feasible_parameters_give_positive_constants(self, L, tau_frac, nu,
                                                         beta_bar, delta_bar):
        tau = tau_frac * (1.0 - nu) / L
        try:
            c = lyapunov_constants(L, tau, nu, beta_bar, delta_bar)
        except InfeasibleParametersError:
            return
        assert c.alpha > 0
        assert c.c1 > 0
        assert c.c2 > 0
        # The weight always dominates the decrease constant.
        assert c.alpha >= c.c1 - 1e-12


class TestLyapunovValues:

    def test_value(self):
        f = Objective(dim=1, value_oracle=lambda x: 0.5 * float(x @ x))
        h = lyapunov_value(f, alpha=2.0, x=np.array([1.0]), x_prev=np.array([0.5]))
        assert math.isclose(h, 0.5 + 2.0 * 0.25)

    def test_attach_uses_step_chain(self):
        records = [
            TraceRecord(k=1, f_val=1.0, g_norm=1.0, step_norm=0.5, value_evals=1, grad_evals=0),
            TraceRecord(k=2, f_val=0.5, g_norm=0.5, step_norm=0.25, value_evals=2, grad_evals=0),
            TraceRecord(k=3, f_val=0.3, g_norm=0.2, step_norm=0.0, value_evals=3, grad_evals=0),
        ]
        trace = RunTrace(records=records, reason="max_iters")
        attach_lyapunov(trace, alpha=2.0)
        # H_1 = f_1 (both starts equal), then f + alpha * previous step^2.
        assert trace.records[0].lyapunov_H == 1.0
        assert math.isclose(trace.records[1].lyapunov_H, 0.5 + 2.0 * 0.25)
        assert math.isclose(trace.records[2].lyapunov_H, 0.3 + 2.0 * 0.0625)


def certified_run(max_iters=300):
    inst = gen_least_squares(5, seed=3)
    L = inst.objective.lipschitz_L
    trace = run(inst, np.zeros(5),
                SolverParams(tau=0.2 / L, nu=0.1, max_iters=max_iters, grad_tol=0.0),
                schedule=MomentumSchedule.nesterov_convex(beta_cap=0.3))
    return inst, trace


class TestCheckDescent:

    def test_certified_run_has_no_violations(self):
        inst, trace = certified_run()
        lyap = trace.meta["lyapunov"]
        consts = lyapunov_constants(trace.meta["L"], trace.meta["tau"], trace.meta["nu"],
                                    trace.meta["beta_bar_run"], trace.meta["delta_bar_run"])
        assert math.isclose(consts.c1, lyap["c1"])
        assert check_descent(trace, consts, objective=inst.objective) == []

    def test_decrease_violations_appear_with_inflated_c1(self):
        inst, trace = certified_run()
        consts = lyapunov_constants(trace.meta["L"], trace.meta["tau"], trace.meta["nu"],
                                    trace.meta["beta_bar_run"], trace.meta["delta_bar_run"])
        inflated = dataclasses.replace(consts, c1=consts.c1 * 1e6)
        bad = check_descent(trace, inflated, objective=inst.objective)
        assert bad
        assert all(v.inequality == "decrease" for v in bad)
        assert all(v.excess > 0 for v in bad)

    def test_gradient_violations_appear_with_deflated_c2(self):
        inst, trace = certified_run()
        consts = lyapunov_constants(trace.meta["L"], trace.meta["tau"], trace.meta["nu"],
                                    trace.meta["beta_bar_run"], trace.meta["delta_bar_run"])
        deflated = dataclasses.replace(consts, c2=consts.c2 * 1e-6)
        bad = check_descent(trace, deflated, objective=inst.objective)
        assert bad
        assert all(v.inequality == "gradient" for v in bad)

    def test_gradient_side_skipped_without_oracle(self):
        inst, trace = certified_run()
        consts = lyapunov_constants(trace.meta["L"], trace.meta["tau"], trace.meta["nu"],
                                    trace.meta["beta_bar_run"], trace.meta["delta_bar_run"])
        deflated = dataclasses.replace(consts, c2=consts.c2 * 1e-6)
        # No objective passed: only the decrease inequality is evaluated.
        assert check_descent(trace, deflated) == []

    def test_needs_stored_iterates(self):
        inst = gen_least_squares(4, seed=1)
        trace = run(inst, np.zeros(4),
                    SolverParams(tau=0.001, nu=0.1, max_iters=10, grad_tol=0.0,
                                 store_iterates=False))
        consts = lyapunov_constants(1.0, 0.1, 0.1, 0.0, 0.0)
        with pytest.raises(ValueError):
            check_descent(trace, consts)


class TestDescentFlags:

    def test_certified_run_flags(self):
        _, trace = certified_run()
        flags = descent_flags(trace)
        assert len(flags) == len(trace)
        assert flags[-1] is None
        assert all(f is True for f in flags[:-1])

    def test_uncertified_run_is_all_none(self):
        inst = gen_least_squares(5, seed=3)
        L = inst.objective.lipschitz_L
        trace = run(inst, np.zeros(5),
                    SolverParams(tau=0.2 / L, nu=0.1, max_iters=50, grad_tol=0.0),
                    schedule=MomentumSchedule.nesterov_convex())
        assert descent_flags(trace) == [None] * len(trace)


class TestFitRate:

    def test_exact_geometric_sequence(self):
        errors = 2.0 * 0.9 ** np.arange(1, 101)
        fit = fit_rate(errors)
        assert fit.model == "geometric"
        assert math.isclose(fit.rate_or_slope, 0.9, rel_tol=1e-9)
        assert fit.r2 > 1.0 - 1e-12
        assert fit.window == (51, 100)

    def test_exact_power_sequence(self):
        ks = np.arange(1, 201, dtype=float)
        fit = fit_rate(ks ** -0.5)
        assert fit.model == "power"
        assert math.isclose(fit.rate_or_slope, -0.5, rel_tol=1e-9)
        assert fit.r2 > 1.0 - 1e-12

    def test_constant_sequence_prefers_geometric(self):
        fit = fit_rate(np.ones(20))
        assert fit.model == "geometric"
        assert math.isclose(fit.rate_or_slope, 1.0)

    def test_explicit_ks(self):
        ks = np.arange(10, 50, dtype=float)
        fit = fit_rate(np.exp(-0.05 * ks), ks=ks)
        assert fit.model == "geometric"
        assert math.isclose(fit.rate_or_slope, math.exp(-0.05), rel_tol=1e-9)

    @given(scale=st.floats(1e-6, 1e6))
    def test_scale_invariance(self, scale):
        errors = np.arange(1, 41, dtype=float) ** -1.3
        base = fit_rate(errors)
        scaled = fit_rate(scale * errors)
        assert scaled.model == base.model
        assert math.isclose(scaled.rate_or_slope, base.rate_or_slope,
                            rel_tol=1e-9, abs_tol=1e-12)
        assert math.isclose(scaled.r2, base.r2, rel_tol=1e-6)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            fit_rate(np.ones(9))
        with pytest.raises(ValueError):
            fit_rate(np.concatenate([np.ones(10), [-1.0]]))
        with pytest.raises(ValueError):
            fit_rate(np.ones(12), ks=np.arange(5, dtype=float))
