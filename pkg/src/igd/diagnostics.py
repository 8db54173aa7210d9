"""Runtime certificates and empirical rate fitting.

With feasible parameters the method admits a computable descent certificate
built on the merit function ``H(x, y) = f(x) + alpha ||x - y||^2`` evaluated
on consecutive iterate pairs ``z_k = (x_k, x_{k-1})``:

    c1 * ||z_{k+1} - z_k||^2  <=  H(z_k) - H(z_{k+1})
    ||grad H(z_k)||           <=  c2 * ||z_{k+1} - z_k||

with constants determined by ``(L, tau, nu, beta_bar, delta_bar)`` alone.
Checking both on a finished trace is a cheap end-to-end test of an
implementation: a violation beyond rounding means a wrong constant, a wrong
step, or an accuracy condition that silently failed.

``fit_rate`` classifies a positive error sequence as geometric
(``log e_k`` linear in ``k``) or power-law (``log e_k`` linear in
``log k``) by comparing least-squares fits over the trailing half.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import InfeasibleParametersError, Objective, RunTrace, as_point, euclidean_norm
from .momentum import feasibility_check

__all__ = [
    "LyapunovConstants",
    "DescentViolation",
    "RateFit",
    "lyapunov_constants",
    "lyapunov_value",
    "attach_lyapunov",
    "check_descent",
    "descent_flags",
    "fit_rate",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LyapunovConstants:
    """Merit-function weight and the two descent constants."""

    alpha: float
    c1: float
    c2: float


def lyapunov_constants(
    L: float, tau: float, nu: float, beta_bar: float, delta_bar: float
) -> LyapunovConstants:
    """Constants of the descent certificate; requires strict feasibility.

    Both branches of the feasibility condition are enforced: a positive
    ``c1`` alone does not rule out ``L*tau >= 1 - nu``.
    """
    feas = feasibility_check(L, tau, nu, beta_bar, delta_bar)
    if not feas.feasible:
        raise InfeasibleParametersError(feas.reason)
    lt = L * tau
    alpha = ((lt + 1.0) * beta_bar**2 + 1.0 - nu) / (4.0 * tau)
    c1 = (1.0 - nu - (lt + 1.0) * beta_bar**2 - 2.0 * lt * delta_bar) / (4.0 * tau)
    c2 = math.sqrt(2.0) * max(
        (nu + 1.0) / tau,
        (beta_bar * (lt + nu + 1.0) + lt * delta_bar) / tau,
    ) + 4.0 * alpha
    return LyapunovConstants(alpha=alpha, c1=c1, c2=c2)


def lyapunov_value(f: Objective, alpha: float, x, x_prev) -> float:
    """``f(x) + alpha ||x - x_prev||^2`` through the metered value oracle."""
    x = as_point(x)
    x_prev = as_point(x_prev)
    d = euclidean_norm(x - x_prev)
    return f.value(x) + alpha * d * d


def attach_lyapunov(trace: RunTrace, alpha: float) -> None:
    """Fill each record's certificate value from recorded data.

    Uses the recorded objective values and the step-norm chain, so it works
    on traces that did not store full iterates.
    """
    prev_step = 0.0
    for rec in trace.records:
        rec.lyapunov_H = rec.f_val + alpha * prev_step * prev_step
        prev_step = rec.step_norm


@dataclass(frozen=True)
class DescentViolation:
    """One failed inequality: which one, at which iteration, by how much."""

    k: int
    inequality: str  # "decrease" | "gradient"
    lhs: float
    rhs: float

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs


def check_descent(
    trace: RunTrace,
    consts: LyapunovConstants,
    objective: Objective | None = None,
    tol_rel: float = 1e-9,
) -> list[DescentViolation]:
    """Verify both descent inequalities on every consecutive record pair.

    Needs iterates stored on the trace.  The gradient-side inequality is only
    checked when ``objective`` with an exact gradient is passed; otherwise it
    is skipped with a log notice.  Tolerance per comparison is
    ``tol_rel * (1 + |H(z_k)|)``.  Returns the empty list iff every checked
    inequality holds.
    """
    xs = trace.iterates()
    f_vals = trace.f_values()
    n_rec = len(xs)
    check_gradient = objective is not None and objective.has_gradient
    if not check_gradient:
        logger.info("gradient-side descent check skipped: no exact gradient available")

    violations: list[DescentViolation] = []
    alpha, c1, c2 = consts.alpha, consts.c1, consts.c2

    d_prev = 0.0
    for i in range(n_rec - 1):
        d_next = euclidean_norm(xs[i + 1] - xs[i])
        H_i = f_vals[i] + alpha * d_prev * d_prev
        H_next = f_vals[i + 1] + alpha * d_next * d_next
        dz_sq = d_next * d_next + d_prev * d_prev
        tol = tol_rel * (1.0 + abs(H_i))
        k = trace.records[i].k

        lhs = c1 * dz_sq
        rhs = H_i - H_next
        if lhs > rhs + tol:
            violations.append(DescentViolation(k=k, inequality="decrease", lhs=lhs, rhs=rhs))

        if check_gradient:
            pull = 2.0 * alpha * (xs[i] - (xs[i - 1] if i > 0 else xs[i]))
            gx = objective.gradient(xs[i])
            grad_H = math.sqrt(
                float(np.dot(gx + pull, gx + pull)) + float(np.dot(pull, pull))
            )
            rhs_g = c2 * math.sqrt(dz_sq)
            if grad_H > rhs_g + tol:
                violations.append(
                    DescentViolation(k=k, inequality="gradient", lhs=grad_H, rhs=rhs_g))

        d_prev = d_next

    return violations


def descent_flags(trace: RunTrace) -> list[bool | None]:
    """Per-record truth of the decrease inequality, from recorded data only.

    Entry ``i`` refers to the transition leaving record ``i``; the last entry
    is ``None``, as is everything when the run carries no certificate.
    """
    lyap = trace.meta.get("lyapunov")
    if lyap is None:
        return [None] * len(trace.records)
    c1 = lyap["c1"]
    flags: list[bool | None] = []
    recs = trace.records
    d_prev = 0.0
    for i, rec in enumerate(recs):
        if i == len(recs) - 1:
            flags.append(None)
            break
        d_next = rec.step_norm
        H_i = rec.lyapunov_H
        H_next = recs[i + 1].lyapunov_H
        if H_i is None or H_next is None:
            flags.append(None)
        else:
            dz_sq = d_next * d_next + d_prev * d_prev
            tol = 1e-9 * (1.0 + abs(H_i))
            flags.append(c1 * dz_sq <= H_i - H_next + tol)
        d_prev = d_next
    return flags


@dataclass(frozen=True)
class RateFit:
    """Outcome of the geometric-versus-power classification.

    ``rate_or_slope`` is the contraction factor per iteration for the
    geometric model and the exponent of ``k`` for the power model.
    """

    model: str  # "geometric" | "power"
    rate_or_slope: float
    r2: float
    window: tuple[int, int]
    r2_geometric: float
    r2_power: float


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and coefficient of determination."""
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    centred = y - y.mean()
    ss_tot = float(np.dot(centred, centred))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r2


def fit_rate(errors, ks=None) -> RateFit:
    """Classify the tail decay of a positive error sequence.

    Fits ``log e`` against ``k`` (geometric) and against ``log k`` (power)
    over the trailing half of the samples and reports the model with the
    better coefficient of determination.  Both fits are invariant under
    rescaling the errors by a positive constant, which only shifts the
    intercepts.  Requires at least ten strictly positive samples.
    """
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim != 1 or e.size < 10:
        raise ValueError("need at least ten error samples")
    if not np.all(np.isfinite(e)) or np.any(e <= 0):
        raise ValueError("errors must be strictly positive and finite")
    if ks is None:
        ks = np.arange(1, e.size + 1, dtype=np.float64)
    else:
        ks = np.asarray(ks, dtype=np.float64)
        if ks.shape != e.shape or np.any(ks <= 0):
            raise ValueError("ks must be positive and match the errors in length")

    start = e.size // 2
    kw = ks[start:]
    yw = np.log(e[start:])

    slope_geo, r2_geo = _linear_fit(kw, yw)
    slope_pow, r2_pow = _linear_fit(np.log(kw), yw)
    window = (int(kw[0]), int(kw[-1]))

    if r2_geo >= r2_pow:
        return RateFit(model="geometric", rate_or_slope=math.exp(slope_geo),
                       r2=r2_geo, window=window,
                       r2_geometric=r2_geo, r2_power=r2_pow)
    return RateFit(model="power", rate_or_slope=slope_pow,
                   r2=r2_pow, window=window,
                   r2_geometric=r2_geo, r2_power=r2_pow)
