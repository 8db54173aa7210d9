"""Finite differences, adaptive width selection, and noisy wrappers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igd.core import BacktrackExhaustedError, Objective
from igd.oracles import (
    AdaptiveDeltaPolicy,
    FiniteDiffScheme,
    NoiseModel,
    central_difference,
    fd_error_bound,
    forward_difference,
    inexact_gradient,
    noisy_wrap,
)


def norm_squared(dim=2):
    return Objective(dim=dim, value_oracle=lambda x: float(x @ x),
                     exact_gradient=lambda x: 2.0 * x, lipschitz_L=2.0)


class TestSchemes:

    def test_forward_on_norm_squared(self):
        # f(1.5, 0) = 2.25, f(1, 0.5) = 1.25, centre 1.
        g = forward_difference(norm_squared(), [1.0, 0.0], 0.5)
        assert np.allclose(g, [2.5, 0.5], atol=1e-12)

    def test_central_on_cubic(self):
        f = Objective(dim=1, value_oracle=lambda x: float(x[0] ** 3))
        g = central_difference(f, [1.0], 0.1)
        # (1.331 - 0.729) / 0.2
        assert math.isclose(g[0], 3.01, rel_tol=1e-12)

    def test_forward_exact_on_affine(self):
        f = Objective(dim=3, value_oracle=lambda x: float(x @ [1.0, -2.0, 3.0]) + 7.0)
        g = forward_difference(f, [0.3, 0.1, -0.4], 0.25)
        assert np.allclose(g, [1.0, -2.0, 3.0], atol=1e-12)

    def test_central_exact_on_quadratics(self):
        # Third derivatives vanish, so the symmetric rule has no truncation
        # error at all.
        Q = np.array([[2.0, 0.5], [0.5, 1.0]])
        b = np.array([1.0, -1.0])
        f = Objective(dim=2, value_oracle=lambda x: float(x @ Q @ x + b @ x))
        x = np.array([0.3, -0.7])
        g = central_difference(f, x, 0.37)
        assert np.allclose(g, 2.0 * Q @ x + b, atol=1e-10)

    def test_cost_model(self):
        f = norm_squared(dim=5)
        forward_difference(f, np.ones(5), 0.1, f_x=25.0)
        assert f.counters.snapshot() == (5, 0)
        central_difference(f, np.ones(5), 0.1)
        assert f.counters.snapshot() == (15, 0)
        assert FiniteDiffScheme("forward", 0.1).evals_per_gradient(5) == 5
        assert FiniteDiffScheme("forward", 0.1).evals_per_gradient(5, centre_cached=False) == 6
        assert FiniteDiffScheme("central", 0.1).evals_per_gradient(5) == 10

    def test_invalid_scheme_rejected(self):
        with pytest.raises(ValueError):
            FiniteDiffScheme("backward", 0.1)
        with pytest.raises(ValueError):
            FiniteDiffScheme("forward", 0.0)


class TestErrorBound:

    def test_value(self):
        assert math.isclose(fd_error_bound(2.0, 2, 0.01), 0.01 * math.sqrt(2.0))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bound_dominates_forward_error(self, seed):
        # f = ||A x||^2 has forward error exactly delta * sqrt(sum ||A e_i||^4),
        # which the Lipschitz bound must dominate for any A.
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        A = rng.normal(size=(n, n))
        x = rng.normal(size=n)
        delta = float(10.0 ** rng.uniform(-6, 0))
        f = Objective(dim=n, value_oracle=lambda v: float((A @ v) @ (A @ v)),
                      lipschitz_L=2.0 * float(np.linalg.norm(A.T @ A, 2)))
        g = forward_difference(f, x, delta)
        grad = 2.0 * A.T @ (A @ x)
        err = float(np.linalg.norm(g - grad))
        assert err <= fd_error_bound(f.lipschitz_L, n, delta) * (1.0 + 1e-7) + 1e-9

    def test_closed_form_forward_error(self):
        A = np.array([[1.0, 2.0], [0.0, 1.0]])
        delta = 1e-3
        f = Objective(dim=2, value_oracle=lambda v: float((A @ v) @ (A @ v)))
        g = forward_difference(f, [0.4, -0.2], delta)
        grad = 2.0 * A.T @ (A @ np.array([0.4, -0.2]))
        expected = delta * math.sqrt(sum(np.linalg.norm(A[:, i]) ** 4 for i in range(2)))
        assert math.isclose(float(np.linalg.norm(g - grad)), expected, rel_tol=1e-6)


class TestAdaptiveWidth:

    def test_width_sequence(self):
        policy = AdaptiveDeltaPolicy(theta=0.5, epsilon0=1.0)
        assert [policy.width(i) for i in range(4)] == [1.0, 0.5, 0.25, 0.125]

    def test_frozen_backtracking_example(self):
        # f = x^2 at x = 1: forward surrogate is 2 + delta, error is delta.
        # With nu = 0.1 the first passing width is 0.125 after three halvings.
        f = Objective(dim=1, value_oracle=lambda x: float(x[0] ** 2),
                      exact_gradient=lambda x: 2.0 * x)
        res = inexact_gradient(f, [1.0], "forward",
                               AdaptiveDeltaPolicy(theta=0.5, epsilon0=1.0),
                               nu=0.1, checker="oracle")
        assert res.i_k == 3
        assert res.delta == 0.125
        assert math.isclose(res.g[0], 2.125, rel_tol=1e-12)
        assert not res.noise_limited

    def test_selected_round_is_minimal(self):
        f = norm_squared()
        policy = AdaptiveDeltaPolicy(theta=0.5, epsilon0=1.0)
        nu = 0.05
        res = inexact_gradient(f, [0.2, -0.1], "forward", policy, nu, checker="oracle")
        g_true = 2.0 * np.array([0.2, -0.1])
        for i in range(res.i_k):
            g_i = forward_difference(f, [0.2, -0.1], policy.width(i))
            err = float(np.linalg.norm(g_i - g_true))
            assert err > nu * float(np.linalg.norm(g_i))

    def test_bound_checker_matches_hand_computation(self):
        # At x = (1, 0) the check is sqrt(2) delta <= nu ||g(delta)||.  With
        # nu = 0.2: width 1 gives g = (3, 1), 1.414 > 0.632; width 0.5 gives
        # g = (2.5, 0.5), 0.707 > 0.510; width 0.25 gives g = (2.25, 0.25),
        # 0.354 <= 0.453.
        f = norm_squared()
        res = inexact_gradient(f, [1.0, 0.0], "forward",
                               AdaptiveDeltaPolicy(theta=0.5, epsilon0=1.0),
                               nu=0.2, checker="bound")
        assert res.checker == "bound"
        assert res.i_k == 2
        assert res.delta == 0.25
        assert np.allclose(res.g, [2.25, 0.25], atol=1e-12)
        bound = fd_error_bound(2.0, 2, res.delta)
        assert bound <= 0.2 * float(np.linalg.norm(res.g))

    def test_backtrack_exhaustion_at_stationary_point(self):
        f = norm_squared()
        policy = AdaptiveDeltaPolicy(theta=0.5, epsilon0=1.0, max_backtracks=10)
        with pytest.raises(BacktrackExhaustedError) as err:
            inexact_gradient(f, [0.0, 0.0], "forward", policy, nu=0.5, checker="oracle")
        assert err.value.best_g is not None
        assert err.value.best_delta == policy.width(10)

    def test_invalid_nu_rejected(self):
        f = norm_squared()
        for nu in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                inexact_gradient(f, [1.0, 0.0], "forward", AdaptiveDeltaPolicy(), nu)

    def test_bound_checker_requires_lipschitz(self):
        f = Objective(dim=1, value_oracle=lambda x: float(x[0] ** 2))
        with pytest.raises(ValueError):
            inexact_gradient(f, [1.0], "forward", AdaptiveDeltaPolicy(), 0.5, checker="bound")

    def test_noise_floor_clamps_width(self):
        # amplitude 0.02 floors the width at 0.2, above epsilon0 = 0.1; the
        # clean oracle still passes the loose check, so the round counts as
        # an ordinary success at the floor width.
        f = Objective(dim=1, value_oracle=lambda x: float(x[0] ** 2),
                      exact_gradient=lambda x: 2.0 * x, noise_amplitude=0.02)
        res = inexact_gradient(f, [1.0], "forward",
                               AdaptiveDeltaPolicy(theta=0.5, epsilon0=0.1),
                               nu=0.5, checker="oracle")
        assert res.delta == math.sqrt(0.04)
        assert res.i_k == 0
        assert not res.noise_limited

    def test_noise_limited_flag_when_floor_check_fails(self):
        f = Objective(dim=1, value_oracle=lambda x: float(x[0] ** 2),
                      exact_gradient=lambda x: 2.0 * x, noise_amplitude=0.02)
        res = inexact_gradient(f, [1.0], "forward",
                               AdaptiveDeltaPolicy(theta=0.5, epsilon0=0.1),
                               nu=1e-6, checker="oracle")
        assert res.noise_limited
        assert res.delta == math.sqrt(0.04)

    def test_forward_centre_cached_across_rounds(self):
        f = norm_squared()
        policy = AdaptiveDeltaPolicy(theta=0.5, epsilon0=1.0)
        res = inexact_gradient(f, [1.0, 0.0], "forward", policy, nu=0.05, checker="bound")
        # One centre evaluation plus dim probes per round.
        assert f.counters.snapshot()[0] == 1 + 2 * (res.i_k + 1)


class TestNoisyWrap:

    def clean(self):
        return Objective(dim=2, value_oracle=lambda x: float(x @ x),
                         exact_gradient=lambda x: 2.0 * x, lipschitz_L=2.0,
                         strong_convexity_mu=2.0)

    def test_metadata(self):
        g = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-3, rng_seed=5))
        assert g.exact_gradient is None
        assert g.lipschitz_L == 2.0
        assert g.strong_convexity_mu == 2.0
        assert g.noise_amplitude == 1e-3
        assert g.counters.snapshot() == (0, 0)

    def test_noise_is_bounded(self):
        g = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-3, rng_seed=5))
        x = np.array([0.5, -0.25])
        clean_val = float(x @ x)
        for _ in range(100):
            assert abs(g.value(x) - clean_val) <= 1e-3

    def test_noise_is_fresh_per_call(self):
        g = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-3, rng_seed=5))
        x = np.array([0.5, -0.25])
        assert g.value(x) != g.value(x)

    def test_same_seed_reproduces_stream(self):
        x = np.array([0.5, -0.25])
        a = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-3, rng_seed=9))
        b = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-3, rng_seed=9))
        assert [a.value(x) for _ in range(5)] == [b.value(x) for _ in range(5)]

    def test_batch_draws_match_single_calls(self):
        cols = np.array([[0.1, 0.2, 0.3], [0.0, -0.1, 0.4]])
        a = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-2, rng_seed=3))
        b = noisy_wrap(self.clean(), NoiseModel(amplitude=1e-2, rng_seed=3))
        batch = a.value_batch(cols)
        singles = [b.value(cols[:, j]) for j in range(3)]
        assert np.allclose(batch, singles, rtol=0, atol=0)
