"""Proximal operators, envelopes, and certified inexact solves."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igd.core import InnerSolveError
from igd.prox import (
    MoreauEnvelope,
    ProxFunction,
    catalog,
    envelope_objective,
    inexact_prox,
    moreau_gradient,
    moreau_value,
    prox_eval,
)


def grid_argmin(h: ProxFunction, x: float, lam: float, lo=-5.0, hi=5.0, m=20_001):
    """Brute-force inner minimizer on a fine grid, the test oracle for prox."""
    ys = np.linspace(lo, hi, m)
    vals = np.array([h.value(np.array([y])) + (y - x) ** 2 / (2 * lam) for y in ys])
    return ys[int(np.argmin(vals))]


xs_small = st.floats(-4.0, 4.0)


class TestCatalogL1:

    def test_prox_is_soft_threshold(self):
        h = catalog("l1")
        assert prox_eval(h, [3.0], 1.0)[0] == 2.0
        assert prox_eval(h, [-3.0], 1.0)[0] == -2.0
        assert prox_eval(h, [0.5], 1.0)[0] == 0.0

    def test_moreau_values(self):
        h = catalog("l1")
        # p = 2: |2| + (2 - 3)^2 / 2.
        assert math.isclose(moreau_value(h, [3.0], 1.0), 2.5)
        # p = 0: quadratic piece only.
        assert math.isclose(moreau_value(h, [0.5], 1.0), 0.125)

    def test_moreau_gradient(self):
        h = catalog("l1")
        assert math.isclose(moreau_gradient(h, [3.0], 1.0)[0], 1.0)
        assert math.isclose(moreau_gradient(h, [0.5], 1.0)[0], 0.5)

    @settings(max_examples=15, deadline=None)
    @given(x=xs_small)
    def test_prox_matches_grid_search(self, x):
        h = catalog("l1")
        p = prox_eval(h, [x], 0.7)[0]
        assert abs(p - grid_argmin(h, x, 0.7)) < 1e-3

    @given(x=xs_small, y=xs_small)
    def test_prox_nonexpansive(self, x, y):
        h = catalog("l1")
        px, py = prox_eval(h, [x], 0.7)[0], prox_eval(h, [y], 0.7)[0]
        assert abs(px - py) <= abs(x - y) + 1e-12


class TestCatalogQuad:

    def test_prox_and_moreau(self):
        h = catalog("quad")
        assert math.isclose(prox_eval(h, [4.0], 1.0)[0], 2.0)
        # 0.5 * 2^2 + (2 - 4)^2 / 2.
        assert math.isclose(moreau_value(h, [4.0], 1.0), 4.0)
        assert math.isclose(moreau_gradient(h, [4.0], 1.0)[0], 2.0)

    def test_scale_parameter(self):
        h = catalog("quad", scale=3.0)
        assert math.isclose(prox_eval(h, [4.0], 1.0)[0], 1.0)


class TestCatalogWeaklyConvex:

    def test_prox_frozen_value(self):
        h = catalog("weakly-convex-1d")
        # soft(1.8, 1) / (1 - 0.5) = 1.6, inside the box.
        assert math.isclose(prox_eval(h, [1.8], 1.0)[0], 1.6)

    def test_moreau_frozen_value(self):
        h = catalog("weakly-convex-1d")
        # h(1.6) = 1.6 - 0.25 * 2.56 = 0.96, plus (0.2)^2 / 2.
        assert math.isclose(moreau_value(h, [1.8], 1.0), 0.98)
        assert math.isclose(moreau_gradient(h, [1.8], 1.0)[0], 0.2)

    def test_weak_convexity_compensation_is_convex(self):
        # h + (rho/2) x^2 must be |x| on the box.
        h = catalog("weakly-convex-1d")
        for x in (-1.5, -0.3, 0.0, 0.7, 2.0):
            assert math.isclose(h.value(np.array([x])) + 0.25 * x * x, abs(x))

    def test_domain_boundary(self):
        h = catalog("weakly-convex-1d")
        assert h.value(np.array([2.5])) == math.inf
        # Prox of a far point clips to the box edge.
        assert prox_eval(h, [4.0], 1.0)[0] == 2.0

    @settings(max_examples=15, deadline=None)
    @given(x=st.floats(-1.9, 1.9))
    def test_prox_matches_grid_search(self, x):
        h = catalog("weakly-convex-1d")
        p = prox_eval(h, [x], 1.0)[0]
        assert abs(p - grid_argmin(h, x, 1.0, lo=-2.0, hi=2.0)) < 5e-4

    def test_lambda_validation(self):
        h = catalog("weakly-convex-1d")  # rho = 0.5
        with pytest.raises(ValueError):
            prox_eval(h, [1.0], 2.0)
        with pytest.raises(ValueError):
            prox_eval(h, [1.0], -1.0)


class TestInnerSolver:

    def no_closed_form(self, name, **kw):
        return dataclasses.replace(catalog(name, **kw), closed_form_prox=None)

    def test_matches_closed_form_off_kink(self):
        h = self.no_closed_form("l1")
        assert math.isclose(prox_eval(h, [3.0], 1.0)[0], 2.0, abs_tol=1e-10)

    def test_certifies_on_kink(self):
        # The prox of 0.5 is exactly 0; only the minimal-norm subgradient can
        # produce a zero residual there.
        h = self.no_closed_form("l1")
        assert abs(prox_eval(h, [0.5], 1.0)[0]) < 1e-10

    def test_weakly_convex_inexact_trace(self):
        # From x = 1.8 with nu = 0.5 the certificate fires three steps in, at
        # p = 1.6593 with certificate 0.0593 against the true prox 1.6, so the
        # returned point is genuinely inexact.
        h = self.no_closed_form("weakly-convex-1d")
        res = inexact_prox(h, [1.8], 1.0, nu=0.5, use_closed_form=False)
        assert not res.exact
        assert res.iterations == 3
        assert math.isclose(res.p[0], 1.65925925925926, rel_tol=1e-10)
        assert res.p[0] != 1.6
        assert abs(res.p[0] - 1.6) <= res.certificate + 1e-12

    def test_certificate_dominates_true_error(self):
        h_exact = catalog("weakly-convex-1d")
        h = self.no_closed_form("weakly-convex-1d")
        for x in (-1.7, -0.9, 0.3, 1.1, 1.9):
            for nu in (0.1, 0.5, 0.9):
                res = inexact_prox(h, [x], 1.0, nu=nu, use_closed_form=False)
                p_true = prox_eval(h_exact, [x], 1.0)[0]
                assert abs(res.p[0] - p_true) <= res.certificate + 1e-10
                assert res.certificate <= nu * abs(res.p[0] - x) + 1e-12

    def test_fixed_point_returns_immediately(self):
        h = self.no_closed_form("l1")
        res = inexact_prox(h, [0.0], 1.0, nu=0.5, use_closed_form=False)
        assert res.p[0] == 0.0
        assert res.certificate == 0.0
        assert res.iterations == 0

    def test_non_fixed_point_never_returned_as_is(self):
        h = self.no_closed_form("l1")
        res = inexact_prox(h, [3.0], 1.0, nu=0.9, use_closed_form=False)
        assert res.p[0] != 3.0

    def test_budget_exhaustion(self):
        # The weakly convex entry only contracts by 2/3 per inner step, so a
        # tight nu cannot certify within ten iterations.  (The l1 entry would
        # not do: its inner step lands on the minimizer exactly.)
        h = self.no_closed_form("weakly-convex-1d")
        with pytest.raises(InnerSolveError) as err:
            inexact_prox(h, [1.8], 1.0, nu=1e-9, inner_budget=10, use_closed_form=False)
        assert err.value.best_certificate is not None
        assert err.value.best_p is not None


class TestInexactProx:

    def test_closed_form_is_exact(self):
        res = inexact_prox(catalog("l1"), [3.0], 1.0, nu=0.5)
        assert res.exact
        assert res.certificate == 0.0
        assert res.p[0] == 2.0

    def test_nu_validation(self):
        for nu in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                inexact_prox(catalog("l1"), [1.0], 1.0, nu=nu)


class TestEnvelope:

    def test_gradient_modulus_values(self):
        assert MoreauEnvelope(catalog("l1"), 0.5).gradient_modulus == 2.0
        env = MoreauEnvelope(catalog("weakly-convex-1d"), 1.0)
        # max(1, 0.5 / 0.5) = 1.
        assert env.gradient_modulus == 1.0
        env2 = MoreauEnvelope(catalog("weakly-convex-1d"), 1.8)
        assert math.isclose(env2.gradient_modulus, 0.5 / (1.0 - 0.9))

    def test_gradient_matches_numeric_derivative(self):
        for name, lam in (("l1", 0.7), ("weakly-convex-1d", 1.0), ("quad", 0.5)):
            h = catalog(name)
            for x in (-1.4, -0.2, 0.1, 0.9, 1.7):
                num = (moreau_value(h, [x + 1e-6], lam) - moreau_value(h, [x - 1e-6], lam)) / 2e-6
                assert math.isclose(moreau_gradient(h, [x], lam)[0], num, abs_tol=1e-5)

    @settings(max_examples=30, deadline=None)
    @given(x=st.floats(-1.9, 1.9), y=st.floats(-1.9, 1.9))
    def test_gradient_lipschitz_sampled(self, x, y):
        h = catalog("weakly-convex-1d")
        env = MoreauEnvelope(h, 1.0)
        gx, gy = moreau_gradient(h, [x], 1.0)[0], moreau_gradient(h, [y], 1.0)[0]
        assert abs(gx - gy) <= env.gradient_modulus * abs(x - y) + 1e-10

    def test_envelope_objective_wiring(self):
        f = envelope_objective(catalog("l1"), 1.0, dim=1)
        assert f.lipschitz_L == 1.0
        assert math.isclose(f.value([3.0]), 2.5)
        assert math.isclose(f.gradient([3.0])[0], 1.0)
        assert f.counters.snapshot() == (1, 1)

    def test_envelope_minimum_matches_base(self):
        # Envelope and base share infimum and minimizer.
        h = catalog("weakly-convex-1d")
        assert math.isclose(moreau_value(h, [0.0], 1.0), 0.0, abs_tol=1e-12)
        assert math.isclose(moreau_gradient(h, [0.0], 1.0)[0], 0.0, abs_tol=1e-12)


def test_catalog_unknown_name():
    with pytest.raises(ValueError):
        catalog("huber")
