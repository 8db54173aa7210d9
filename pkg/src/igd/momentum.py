"""Momentum coefficient schedules and the step-size feasibility condition.

A schedule supplies per-iteration coefficients ``(beta_k, gamma_k)``:
``beta_k`` weighs the inertial update, ``gamma_k`` the extrapolation the
gradient is taken at.  The descent analysis consumes only two summary
numbers, ``beta_bar = sup beta_k`` and ``delta_bar = sup |beta_k - gamma_k|``,
together with the strict condition

    max(L*tau, 2*L*tau*delta_bar + (L*tau + 1)*beta_bar**2) < 1 - nu.

Growing schedules (``k / (k + 3)`` and the accumulating variant) have
supremum one and can never satisfy it globally; they are still the variants
used in the benchmark experiments.  Two usage modes follow: raw mode runs
them as is and reports bounds over a finite horizon, while theory mode caps
the coefficients at ``beta_cap`` so the supremum is attained and checkable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

__all__ = [
    "MomentumSchedule",
    "ScheduleBounds",
    "FeasibilityResult",
    "beta_gamma",
    "schedule_bounds",
    "feasibility_check",
]

_KINDS = ("none", "heavy_ball", "nesterov_sc", "nesterov_convex", "fista", "custom")


@dataclass
class MomentumSchedule:
    """One momentum rule; build through the class-method constructors.

    ``beta_cap``, when set, clamps both coefficients at that value
    (theory-compliant mode).  The accumulating variant keeps its scalar
    sequence in a lazily extended list, so coefficient queries are valid for
    any iteration index in any order.
    """

    kind: str
    mu: float | None = None
    L: float | None = None
    constant_beta: float | None = None
    beta_cap: float | None = None
    custom_fn: Callable[[int], tuple[float, float]] | None = None
    custom_bounds: tuple[float, float] | None = None
    _thetas: list[float] = field(default_factory=lambda: [1.0, 1.0], repr=False)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.beta_cap is not None and not 0 <= self.beta_cap < 1:
            raise ValueError("beta_cap must lie in [0, 1)")

    # -- constructors ----------------------------------------------------

    @classmethod
    def none(cls) -> "MomentumSchedule":
        """No momentum: beta_k = gamma_k = 0."""
        return cls(kind="none")

    @classmethod
    def polyak(cls, beta_cap: float | None = None) -> "MomentumSchedule":
        """Inertia only: beta_k = k / (k + 3), gamma_k = 0."""
        return cls(kind="heavy_ball", beta_cap=beta_cap)

    @classmethod
    def heavy_ball_constant(cls, mu: float, L: float) -> "MomentumSchedule":
        """Constant inertia 4 / (sqrt(L) + sqrt(mu))**2, gamma_k = 0."""
        _require_moduli(mu, L)
        beta = 4.0 / (math.sqrt(L) + math.sqrt(mu)) ** 2
        return cls(kind="heavy_ball", mu=mu, L=L, constant_beta=beta)

    @classmethod
    def nesterov_sc(cls, mu: float, L: float) -> "MomentumSchedule":
        """Constant beta_k = gamma_k = (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))."""
        _require_moduli(mu, L)
        return cls(kind="nesterov_sc", mu=mu, L=L)

    @classmethod
    def nesterov_convex(cls, beta_cap: float | None = None) -> "MomentumSchedule":
        """beta_k = gamma_k = k / (k + 3)."""
        return cls(kind="nesterov_convex", beta_cap=beta_cap)

    @classmethod
    def fista(cls, beta_cap: float | None = None) -> "MomentumSchedule":
        """beta_k = gamma_k = (theta_{k-1} - 1) / theta_k with the accumulating thetas."""
        return cls(kind="fista", beta_cap=beta_cap)

    @classmethod
    def custom(
        cls,
        fn: Callable[[int], tuple[float, float]],
        beta_bar: float,
        delta_bar: float,
        beta_cap: float | None = None,
    ) -> "MomentumSchedule":
        """User-supplied rule with declared supremum bounds."""
        return cls(kind="custom", custom_fn=fn, custom_bounds=(beta_bar, delta_bar), beta_cap=beta_cap)

    @classmethod
    def from_name(cls, name: str, mu: float | None = None, L: float | None = None,
                  beta_cap: float | None = None) -> "MomentumSchedule":
        """Resolve a config-file schedule name."""
        if name == "none":
            return cls.none()
        if name == "polyak":
            return cls.polyak(beta_cap)
        if name == "nesterov":
            return cls.nesterov_convex(beta_cap)
        if name == "nesterov-sc":
            if mu is None or L is None:
                raise ValueError("nesterov-sc needs mu and L")
            return cls.nesterov_sc(mu, L)
        if name == "fista":
            return cls.fista(beta_cap)
        raise ValueError(f"unknown schedule name {name!r}")

    # -- evaluation ------------------------------------------------------

    def _theta(self, j: int) -> float:
        while len(self._thetas) <= j:
            t = self._thetas[-1]
            self._thetas.append(0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t)))
        return self._thetas[j]

    def raw_beta_gamma(self, k: int) -> tuple[float, float]:
        """Coefficients before any cap is applied."""
        if k < 1:
            raise ValueError("iteration index starts at 1")
        if self.kind == "none":
            return 0.0, 0.0
        if self.kind == "heavy_ball":
            if self.constant_beta is not None:
                return self.constant_beta, 0.0
            return k / (k + 3.0), 0.0
        if self.kind == "nesterov_sc":
            b = (math.sqrt(self.L) - math.sqrt(self.mu)) / (math.sqrt(self.L) + math.sqrt(self.mu))
            return b, b
        if self.kind == "nesterov_convex":
            b = k / (k + 3.0)
            return b, b
        if self.kind == "fista":
            b = (self._theta(k - 1) - 1.0) / self._theta(k)
            return b, b
        beta, gamma = self.custom_fn(k)
        if beta < 0 or gamma < 0:
            raise ValueError(f"custom schedule returned negative coefficients at k={k}")
        return float(beta), float(gamma)


def _require_moduli(mu: float, L: float) -> None:
    if not (0 < mu <= L):
        raise ValueError("need 0 < mu <= L")


def beta_gamma(schedule: MomentumSchedule, k: int) -> tuple[float, float]:
    """Coefficients at iteration ``k`` (1-based), cap applied if configured."""
    beta, gamma = schedule.raw_beta_gamma(k)
    if schedule.beta_cap is not None:
        beta = min(beta, schedule.beta_cap)
        gamma = min(gamma, schedule.beta_cap)
    return beta, gamma


@dataclass(frozen=True)
class ScheduleBounds:
    """Supremum summary of a schedule.

    ``strict`` is False when ``beta_bar`` is only a limiting value that no
    finite iteration attains (the growing schedules without a cap); such a
    bound can never pass the strict feasibility condition.
    """

    beta_bar: float
    delta_bar: float
    strict: bool = True


def schedule_bounds(schedule: MomentumSchedule, horizon: int | None = None) -> ScheduleBounds:
    """Supremum bounds, either global or over iterations ``1..horizon``.

    The built-in rules are nondecreasing in ``k``, so finite-horizon bounds
    are their value at ``horizon`` (capped when a cap is set).
    """
    kind = schedule.kind
    cap = schedule.beta_cap

    if kind == "custom":
        beta_bar, delta_bar = schedule.custom_bounds
        if cap is not None:
            beta_bar = min(beta_bar, cap)
        return ScheduleBounds(beta_bar, delta_bar, strict=True)

    if horizon is not None:
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        beta, gamma = beta_gamma(schedule, horizon)
        if kind == "fista":
            # beta is nondecreasing; max |beta - gamma| is 0 for this rule.
            return ScheduleBounds(beta, 0.0, strict=True)
        delta = abs(beta - gamma)
        return ScheduleBounds(beta, delta, strict=True)

    if kind == "none":
        return ScheduleBounds(0.0, 0.0)
    if kind == "heavy_ball":
        if schedule.constant_beta is not None:
            b = schedule.constant_beta if cap is None else min(schedule.constant_beta, cap)
            return ScheduleBounds(b, b)
        b, strict = (1.0, False) if cap is None else (cap, True)
        return ScheduleBounds(b, b, strict=strict)
    if kind == "nesterov_sc":
        b, _ = beta_gamma(schedule, 1)
        return ScheduleBounds(b, 0.0)
    # nesterov_convex and fista grow toward 1 with gamma == beta throughout.
    b, strict = (1.0, False) if cap is None else (cap, True)
    return ScheduleBounds(b, 0.0, strict=strict)


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the strict step-size condition, with the offending term."""

    feasible: bool
    margin: float
    step_term: float
    momentum_term: float
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.feasible


def feasibility_check(
    L: float, tau: float, nu: float, beta_bar: float, delta_bar: float
) -> FeasibilityResult:
    """Check ``max(L*tau, 2*L*tau*delta_bar + (L*tau + 1)*beta_bar**2) < 1 - nu``.

    The inequality is strict; equality is rejected because every descent
    constant degenerates to zero there.
    """
    if L <= 0 or tau <= 0:
        raise ValueError("L and tau must be positive")
    if not 0 <= nu < 1:
        raise ValueError("nu must lie in [0, 1)")
    if beta_bar < 0 or delta_bar < 0:
        raise ValueError("schedule bounds must be nonnegative")
    lt = L * tau
    step_term = lt
    momentum_term = 2.0 * lt * delta_bar + (lt + 1.0) * beta_bar**2
    worst = max(step_term, momentum_term)
    margin = (1.0 - nu) - worst
    if margin > 0:
        return FeasibilityResult(True, margin, step_term, momentum_term)
    which = "L*tau" if step_term >= momentum_term else "momentum bound"
    return FeasibilityResult(
        False, margin, step_term, momentum_term,
        reason=f"{which} = {worst:.6g} >= 1 - nu = {1.0 - nu:.6g}",
    )
