"""Momentum descent under relatively inexact gradients, plus its disguises.

The base iteration keeps two momentum terms, one for inertia and one for the
point the gradient is taken at:

    x_in  = x_k + beta_k  * (x_k - x_{k-1})
    x_ex  = x_k + gamma_k * (x_k - x_{k-1})
    x_{k+1} = x_in - tau * g_k,

where the surrogate ``g_k`` only has to satisfy the relative error condition
``||g_k - grad f(x_ex)|| <= nu * ||g_k||``.  Three familiar methods are this
iteration with a particular surrogate:

* extragradient: ``g = grad f(x_ex - tau2 * grad f(x_ex))``,
* sharpness-aware ascent step: ``g = grad f(x_ex + tau2 * grad f(x_ex))``,
  both satisfying the condition whenever ``tau2 <= nu / (L (nu + 1))``;
* inexact proximal point on a weakly convex ``h``:
  ``g = (x_ex - p) / lam`` with ``p`` a certified inexact prox, which is a
  ``nu``-inexact gradient of the Moreau envelope.

Runs start from a single point (the iteration needs two, they are set
equal).  Budgets meter value-oracle calls only; see :mod:`igd.core` for the
cost model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    BacktrackExhaustedError,
    BudgetExhaustedError,
    InfeasibleParametersError,
    InnerSolveError,
    NonFiniteValueError,
    Objective,
    RunTrace,
    TraceRecord,
    as_point,
    euclidean_norm,
)
from .momentum import MomentumSchedule, beta_gamma, feasibility_check, schedule_bounds
from .oracles import AdaptiveDeltaPolicy, inexact_gradient
from .prox import ProxFunction, ProxResult, inexact_prox, moreau_value

__all__ = [
    "SolverParams",
    "StepResult",
    "igdm_step",
    "egm_g",
    "samm_g",
    "ippm_g",
    "exact_gradient_supplier",
    "finite_difference_supplier",
    "extragradient_supplier",
    "sharpness_supplier",
    "proximal_supplier",
    "run",
]

logger = logging.getLogger(__name__)

_DIVERGENCE_LIMIT = 1e100


@dataclass
class SolverParams:
    """Step sizes, accuracy, and stopping control for one run.

    ``grad_tol=None`` resolves to the relative default
    ``1e-8 * ||g|| at the first iteration``; pass an explicit number for an
    absolute threshold, or ``0.0`` to disable (then only an exactly zero
    surrogate stops the run as stationary).  ``ftarget`` stops the run once
    the recorded value falls to that level.  ``theory_mode`` turns the
    feasibility advisory into a hard error and validates the extra step size
    of the gradient-like schemes.  ``store_iterates`` keeps a copy of every
    iterate on the trace; descent verification needs them, long
    budget-driven benchmark runs turn them off.
    """

    tau: float
    nu: float
    tau2: float | None = None
    lam: float | None = None
    budget_evals: int | None = None
    grad_tol: float | None = None
    max_iters: int = 1_000_000
    ftarget: float | None = None
    theory_mode: bool = False
    store_iterates: bool = True

    def __post_init__(self) -> None:
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError("tau must be positive and finite")
        if not 0 <= self.nu < 1:
            raise ValueError("nu must lie in [0, 1)")
        if self.tau2 is not None and self.tau2 <= 0:
            raise ValueError("tau2 must be positive when given")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive when given")
        if self.budget_evals is not None and self.budget_evals < 1:
            raise ValueError("budget_evals must be at least 1 when given")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class StepResult:
    """One iteration's intermediate points and surrogate."""

    x_next: np.ndarray
    x_in: np.ndarray
    x_ex: np.ndarray
    g: np.ndarray
    aux: dict = field(default_factory=dict)


# A gradient supplier maps (x_ex, cached value at x_ex or None) to (g, aux).
GradientSupplier = Callable[[np.ndarray, float | None], tuple[np.ndarray, dict]]


def exact_gradient_supplier(f: Objective) -> GradientSupplier:
    """Use the true gradient; the error condition holds with zero slack."""

    def supply(x_ex: np.ndarray, f_center: float | None) -> tuple[np.ndarray, dict]:
        return f.gradient(x_ex), {}

    return supply


def finite_difference_supplier(
    f: Objective,
    kind: str,
    policy: AdaptiveDeltaPolicy,
    nu: float,
    checker: str | None = None,
) -> GradientSupplier:
    """Adaptive-width finite differences; see :func:`igd.oracles.inexact_gradient`."""
    if checker is None:
        checker = "bound" if f.lipschitz_L is not None else "oracle"

    def supply(x_ex: np.ndarray, f_center: float | None) -> tuple[np.ndarray, dict]:
        res = inexact_gradient(f, x_ex, kind, policy, nu, checker, f_center=f_center)
        return res.g, {
            "i_k": res.i_k,
            "delta": res.delta,
            "noise_limited": res.noise_limited,
        }

    return supply


def egm_g(f: Objective, x_ex, tau2: float) -> np.ndarray:
    """Extragradient surrogate: gradient after a trial descent step."""
    x_ex = as_point(x_ex)
    return f.gradient(x_ex - tau2 * f.gradient(x_ex))


def samm_g(f: Objective, x_ex, tau2: float) -> np.ndarray:
    """Sharpness-seeking surrogate: gradient after a trial ascent step."""
    x_ex = as_point(x_ex)
    return f.gradient(x_ex + tau2 * f.gradient(x_ex))


def ippm_g(
    h: ProxFunction,
    x_ex,
    lam: float,
    nu: float,
    inner_budget: int = 500,
    use_closed_form: bool = True,
) -> tuple[np.ndarray, ProxResult]:
    """Proximal surrogate ``(x_ex - p) / lam`` with a certified inexact ``p``."""
    x_ex = as_point(x_ex)
    res = inexact_prox(h, x_ex, lam, nu, inner_budget=inner_budget,
                       use_closed_form=use_closed_form)
    return (x_ex - res.p) / lam, res


def _fd_once(f: Objective, x: np.ndarray, kind: str, delta: float) -> np.ndarray:
    from .oracles import central_difference, forward_difference

    if kind == "forward":
        return forward_difference(f, x, delta)
    return central_difference(f, x, delta)


def _two_level_supplier(f: Objective, tau2: float, sign: float,
                        fd_kind: str | None, policy: AdaptiveDeltaPolicy | None,
                        nu: float | None) -> GradientSupplier:
    """Shared body of the extragradient and sharpness suppliers.

    With ``fd_kind`` set, both the trial and the final gradients are replaced
    by finite-difference surrogates at the same probe width, and the width is
    backtracked against the Lipschitz bound on the final surrogate.  This
    derivative-free variant is experimental: the reduction argument behind
    the ``tau2`` threshold assumes exact inner gradients.
    """

    if fd_kind is None:
        def supply(x_ex: np.ndarray, f_center: float | None) -> tuple[np.ndarray, dict]:
            g_trial = f.gradient(x_ex)
            g = f.gradient(x_ex + sign * tau2 * g_trial)
            return g, {}

        return supply

    if policy is None or nu is None:
        raise ValueError("derivative-free variant needs a width policy and nu")
    if f.lipschitz_L is None:
        raise ValueError("derivative-free variant needs lipschitz_L for its width check")

    from .oracles import fd_error_bound

    def supply_df(x_ex: np.ndarray, f_center: float | None) -> tuple[np.ndarray, dict]:
        for i in range(policy.max_backtracks + 1):
            delta = policy.width(i)
            g_trial = _fd_once(f, x_ex, fd_kind, delta)
            g = _fd_once(f, x_ex + sign * tau2 * g_trial, fd_kind, delta)
            if fd_error_bound(f.lipschitz_L, f.dim, delta) <= nu * euclidean_norm(g):
                return g, {"i_k": i, "delta": delta}
        raise BacktrackExhaustedError(
            f"no probe width within {policy.max_backtracks} backtracks passed "
            "the bound check in the two-level surrogate"
        )

    return supply_df


def extragradient_supplier(f: Objective, tau2: float, fd_kind: str | None = None,
                           policy: AdaptiveDeltaPolicy | None = None,
                           nu: float | None = None) -> GradientSupplier:
    return _two_level_supplier(f, tau2, -1.0, fd_kind, policy, nu)


def sharpness_supplier(f: Objective, tau2: float, fd_kind: str | None = None,
                       policy: AdaptiveDeltaPolicy | None = None,
                       nu: float | None = None) -> GradientSupplier:
    return _two_level_supplier(f, tau2, +1.0, fd_kind, policy, nu)


def proximal_supplier(h: ProxFunction, lam: float, nu: float,
                      inner_budget: int = 500,
                      use_closed_form: bool = True) -> GradientSupplier:
    def supply(x_ex: np.ndarray, f_center: float | None) -> tuple[np.ndarray, dict]:
        g, res = ippm_g(h, x_ex, lam, nu, inner_budget=inner_budget,
                        use_closed_form=use_closed_form)
        return g, {
            "p": res.p,
            "certificate": res.certificate,
            "inner_iterations": res.iterations,
        }

    return supply


def igdm_step(
    x: np.ndarray,
    x_prev: np.ndarray,
    k: int,
    schedule: MomentumSchedule,
    tau: float,
    g_supplier: GradientSupplier,
    f_value_at_x: float | None = None,
) -> StepResult:
    """One iteration of the base method.

    ``f_value_at_x`` is forwarded to the supplier as a cached centre whenever
    the gradient point coincides with the iterate (no movement yet, or a zero
    extrapolation coefficient).
    """
    x = as_point(x)
    x_prev = as_point(x_prev)
    beta, gamma = beta_gamma(schedule, k)
    moved = x - x_prev
    x_in = x + beta * moved
    x_ex = x + gamma * moved
    centre = f_value_at_x if (gamma == 0.0 or not np.any(moved)) else None
    g, aux = g_supplier(x_ex, centre)
    g = np.asarray(g, dtype=np.float64)
    if g.shape != x.shape:
        raise ValueError("gradient supplier returned a wrong-shaped vector")
    x_next = x_in - tau * g
    aux = dict(aux)
    aux["beta"] = beta
    aux["gamma"] = gamma
    return StepResult(x_next=x_next, x_in=x_in, x_ex=x_ex, g=g, aux=aux)


def _build_supplier(
    problem,
    scheme: str,
    params: SolverParams,
    gradient: str,
    checker: str | None,
    policy: AdaptiveDeltaPolicy | None,
    inner_budget: int,
    use_closed_form: bool,
) -> tuple[GradientSupplier, Objective | None, Callable[[np.ndarray], float], float | None]:
    """Resolve (supplier, metered objective or None, value recorder, L)."""
    if scheme == "ippm":
        if not isinstance(problem, ProxFunction):
            raise TypeError("the proximal scheme needs a ProxFunction")
        if params.lam is None:
            raise ValueError("the proximal scheme needs params.lam")
        h = problem
        h.check_lambda(params.lam)
        if params.nu == 0:
            raise ValueError("the proximal scheme needs nu in (0, 1)")
        supplier = proximal_supplier(h, params.lam, params.nu,
                                     inner_budget=inner_budget,
                                     use_closed_form=use_closed_form)
        rho = h.weak_convexity_rho
        L = 1.0 / params.lam if rho == 0 else max(1.0 / params.lam, rho / (1.0 - params.lam * rho))
        if h.closed_form_prox is not None:
            recorder = lambda x: moreau_value(h, x, params.lam)
        else:
            recorder = lambda x: float(h.value(x))
        return supplier, None, recorder, L

    f = problem.objective if hasattr(problem, "objective") else problem
    if not isinstance(f, Objective):
        raise TypeError("expected an Objective or ProblemInstance")

    if scheme == "igdm":
        if gradient == "exact":
            supplier = exact_gradient_supplier(f)
        elif gradient in ("forward", "central"):
            pol = policy if policy is not None else AdaptiveDeltaPolicy()
            supplier = finite_difference_supplier(f, gradient, pol, params.nu, checker)
        else:
            raise ValueError(f"unknown gradient mode {gradient!r}")
    elif scheme in ("egm", "samm"):
        if params.tau2 is None:
            raise ValueError(f"the {scheme} scheme needs params.tau2")
        factory = extragradient_supplier if scheme == "egm" else sharpness_supplier
        if gradient == "exact":
            supplier = factory(f, params.tau2)
        else:
            pol = policy if policy is not None else AdaptiveDeltaPolicy()
            supplier = factory(f, params.tau2, fd_kind=gradient, policy=pol, nu=params.nu)
        if params.theory_mode:
            if f.lipschitz_L is None:
                raise InfeasibleParametersError("theory mode needs lipschitz_L")
            bound = params.nu / (f.lipschitz_L * (params.nu + 1.0))
            if params.tau2 > bound:
                raise InfeasibleParametersError(
                    f"tau2 = {params.tau2:.6g} exceeds the reduction threshold "
                    f"nu / (L (nu + 1)) = {bound:.6g}")
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    return supplier, f, f.value, f.lipschitz_L


def run(
    problem,
    x0,
    params: SolverParams,
    *,
    scheme: str = "igdm",
    schedule: MomentumSchedule | None = None,
    gradient: str = "exact",
    checker: str | None = None,
    policy: AdaptiveDeltaPolicy | None = None,
    inner_budget: int = 500,
    use_closed_form: bool = True,
) -> RunTrace:
    """Run one scheme from ``x0`` and return its trace.

    ``problem`` is an :class:`Objective` or :class:`ProblemInstance` for the
    gradient schemes, a :class:`ProxFunction` for the proximal one.  The two
    starting points of the iteration are both set to ``x0``.

    When the gradient Lipschitz modulus is known, the strict feasibility
    condition is evaluated against the schedule's limiting bounds: a failure
    raises in theory mode and logs a warning otherwise.  After the run the
    condition is re-evaluated with the coefficient bounds actually realized
    over the finite run; if those are feasible, the trace records carry the
    descent certificate value ``f(x_k) + alpha ||x_k - x_{k-1}||^2``.
    """
    x = as_point(x0).copy()
    if schedule is None:
        schedule = MomentumSchedule.none()
    supplier, f, recorder, L = _build_supplier(
        problem, scheme, params, gradient, checker, inner_budget=inner_budget,
        policy=policy, use_closed_form=use_closed_form)

    if L is not None:
        limit_bounds = schedule_bounds(schedule)
        advisory = feasibility_check(L, params.tau, params.nu,
                                     limit_bounds.beta_bar, limit_bounds.delta_bar)
        if not advisory.feasible or not limit_bounds.strict:
            detail = advisory.reason or "momentum bound is a limit never attained"
            if params.theory_mode:
                raise InfeasibleParametersError(detail)
            logger.warning("running outside the feasibility condition: %s", detail)

    old_limit = f.counters.value_limit if f is not None else None
    if f is not None and params.budget_evals is not None:
        f.counters.value_limit = params.budget_evals

    records: list[TraceRecord] = []
    meta: dict = {
        "scheme": scheme,
        "gradient": gradient if scheme != "ippm" else "prox",
        "tau": params.tau,
        "nu": params.nu,
        "L": L,
        "noise_limited_rounds": 0,
        "backtracks_total": 0,
        "inner_iterations_total": 0,
    }
    reason = "max_iters"
    x_prev = x.copy()
    k = 1
    tol = params.grad_tol
    beta_bar_run = 0.0
    delta_bar_run = 0.0

    try:
        while True:
            if k > params.max_iters:
                reason = "max_iters"
                break
            try:
                f_k = recorder(x)
            except BudgetExhaustedError:
                reason = "budget"
                break
            if not math.isfinite(f_k):
                raise NonFiniteValueError(
                    f"objective value became non-finite at iteration {k}")

            try:
                step = igdm_step(x, x_prev, k, schedule, params.tau, supplier,
                                 f_value_at_x=f_k)
            except BudgetExhaustedError:
                reason = "budget"
                meta["final_f"] = f_k
                break
            except BacktrackExhaustedError as err:
                reason = "backtrack_exhausted"
                meta["final_f"] = f_k
                if err.best_g is not None:
                    meta["backtrack_best_g_norm"] = euclidean_norm(err.best_g)
                break
            except InnerSolveError as err:
                reason = "inner_solve_failed"
                meta["final_f"] = f_k
                meta["inner_best_certificate"] = err.best_certificate
                break

            g_norm = euclidean_norm(step.g)
            if tol is None:
                tol = 1e-8 * g_norm
            meta["backtracks_total"] += step.aux.get("i_k", 0)
            meta["noise_limited_rounds"] += int(step.aux.get("noise_limited", False))
            meta["inner_iterations_total"] += step.aux.get("inner_iterations", 0)

            ve, ge = f.counters.snapshot() if f is not None else (0, 0)

            if g_norm <= tol:
                records.append(TraceRecord(
                    k=k, f_val=f_k, g_norm=g_norm, step_norm=0.0,
                    value_evals=ve, grad_evals=ge,
                    x=x.copy() if params.store_iterates else None))
                reason = "grad_tol" if tol > 0 else "stationary"
                break

            if abs(f_k) > _DIVERGENCE_LIMIT:
                records.append(TraceRecord(
                    k=k, f_val=f_k, g_norm=g_norm, step_norm=0.0,
                    value_evals=ve, grad_evals=ge,
                    x=x.copy() if params.store_iterates else None))
                reason = "diverged"
                break

            if not np.all(np.isfinite(step.x_next)):
                raise NonFiniteValueError(
                    f"iteration {k} produced a non-finite iterate; "
                    "the step size is likely too large for this objective")

            beta_bar_run = max(beta_bar_run, step.aux["beta"])
            delta_bar_run = max(delta_bar_run, abs(step.aux["beta"] - step.aux["gamma"]))
            step_norm = euclidean_norm(step.x_next - x)
            records.append(TraceRecord(
                k=k, f_val=f_k, g_norm=g_norm, step_norm=step_norm,
                value_evals=ve, grad_evals=ge,
                x=x.copy() if params.store_iterates else None))

            if params.ftarget is not None and f_k <= params.ftarget:
                reason = "ftarget"
                break

            x_prev, x = x, step.x_next
            k += 1
    finally:
        if f is not None:
            f.counters.value_limit = old_limit

    if f is not None:
        ve, ge = f.counters.snapshot()
        meta["value_evals_total"] = ve
        meta["grad_evals_total"] = ge
    else:
        meta["value_evals_total"] = 0
        meta["grad_evals_total"] = 0
    meta["iterations"] = len(records)
    meta["beta_bar_run"] = beta_bar_run
    meta["delta_bar_run"] = delta_bar_run

    trace = RunTrace(records=records, reason=reason, meta=meta)
    if L is not None and records:
        realized = feasibility_check(L, params.tau, params.nu, beta_bar_run, delta_bar_run)
        meta["feasible_realized"] = realized.feasible
        if realized.feasible:
            from .diagnostics import attach_lyapunov, lyapunov_constants

            consts = lyapunov_constants(L, params.tau, params.nu,
                                        beta_bar_run, delta_bar_run)
            meta["lyapunov"] = {"alpha": consts.alpha, "c1": consts.c1, "c2": consts.c2}
            attach_lyapunov(trace, consts.alpha)
    return trace
