"""Derivative-free gradient surrogates and their accuracy control.

Coordinate finite differences with probe width ``delta``:

* forward:  ``g_i = (f(x + delta e_i) - f(x)) / delta``
* central:  ``g_i = (f(x + delta e_i) - f(x - delta e_i)) / (2 delta)``

For an objective with L-Lipschitz gradient the surrogate error obeys
``||g - grad f(x)|| <= L sqrt(n) delta / 2`` (forward and central alike),
which is what makes the width machine-checkable: shrink ``delta``
geometrically until the error bound, or a direct comparison against the true
gradient, falls below ``nu`` times the surrogate's own norm.  The relative
form matters because the threshold then tightens automatically as the method
approaches stationarity.

Under additive evaluation noise the bound fails for small widths, so widths
are floored at ``sqrt(2 * amplitude)``; a round returned at the floor without
passing its check is flagged ``noise_limited`` instead of erroring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BacktrackExhaustedError,
    NonFiniteValueError,
    Objective,
    as_point,
    euclidean_norm,
)
from .rng import SplitMix64

__all__ = [
    "FiniteDiffScheme",
    "AdaptiveDeltaPolicy",
    "NoiseModel",
    "InexactGradientResult",
    "forward_difference",
    "central_difference",
    "fd_error_bound",
    "inexact_gradient",
    "noisy_wrap",
]


@dataclass(frozen=True)
class FiniteDiffScheme:
    """A differencing rule at a fixed probe width."""

    kind: str  # "forward" | "central"
    delta: float

    def __post_init__(self) -> None:
        if self.kind not in ("forward", "central"):
            raise ValueError(f"unknown finite-difference kind {self.kind!r}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError("probe width must be positive and finite")

    def evals_per_gradient(self, dim: int, centre_cached: bool = True) -> int:
        """Value evaluations one gradient costs under the package's accounting."""
        if self.kind == "forward":
            return dim if centre_cached else dim + 1
        return 2 * dim


@dataclass(frozen=True)
class AdaptiveDeltaPolicy:
    """Geometric width backtracking: round ``i`` probes at ``theta**i * epsilon0``.

    ``epsilon0`` restarts every iteration (widths are not carried across
    iterations).  ``max_backtracks`` caps the rounds; exceeding it raises
    :class:`~igd.core.BacktrackExhaustedError` with the best surrogate found.
    """

    theta: float = 0.5
    epsilon0: float = 0.1
    max_backtracks: int = 60

    def __post_init__(self) -> None:
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")

    def width(self, i: int) -> float:
        return self.theta**i * self.epsilon0


@dataclass(frozen=True)
class NoiseModel:
    """Additive uniform evaluation noise, fresh per call, seeded."""

    amplitude: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.amplitude <= 0:
            raise ValueError("noise amplitude must be positive")


@dataclass
class InexactGradientResult:
    """Surrogate gradient plus the width-selection audit trail."""

    g: np.ndarray
    i_k: int
    delta: float
    checker: str
    noise_limited: bool = False


def _probe_columns(x: np.ndarray, delta: float, sign: float) -> np.ndarray:
    # x broadcast over columns, +/- delta on the diagonal.
    return x[:, None] + sign * delta * np.eye(x.size)


def forward_difference(f: Objective, x, delta: float, f_x: float | None = None) -> np.ndarray:
    """Forward-difference gradient surrogate at ``x`` with width ``delta``.

    Pass ``f_x`` when the centre value is already known (the solver's iterate
    record); the call then costs exactly ``dim`` evaluations.
    """
    x = as_point(x)
    scheme = FiniteDiffScheme("forward", delta)
    if f_x is None:
        f_x = f.value(x)
    vals = f.value_batch(_probe_columns(x, scheme.delta, +1.0))
    return (vals - f_x) / scheme.delta


def central_difference(f: Objective, x, delta: float) -> np.ndarray:
    """Central-difference gradient surrogate at ``x`` with width ``delta``."""
    x = as_point(x)
    scheme = FiniteDiffScheme("central", delta)
    plus = f.value_batch(_probe_columns(x, scheme.delta, +1.0))
    minus = f.value_batch(_probe_columns(x, scheme.delta, -1.0))
    return (plus - minus) / (2.0 * scheme.delta)


def fd_error_bound(L: float, dim: int, delta: float) -> float:
    """Worst-case surrogate error ``L sqrt(dim) delta / 2``."""
    if L < 0 or delta < 0:
        raise ValueError("L and delta must be nonnegative")
    if dim < 1:
        raise ValueError("dim must be at least 1")
    return 0.5 * L * math.sqrt(dim) * delta


def inexact_gradient(
    f: Objective,
    x_ex,
    kind: str,
    policy: AdaptiveDeltaPolicy,
    nu: float,
    checker: str = "bound",
    f_center: float | None = None,
) -> InexactGradientResult:
    """Smallest-backtrack surrogate satisfying the relative accuracy check.

    ``checker="oracle"`` compares against the exact gradient (test harnesses
    and instrumented runs); ``checker="bound"`` uses the Lipschitz error bound
    and needs ``f.lipschitz_L``.  The returned ``i_k`` is minimal: round
    ``i_k - 1``, when it exists, failed its check.

    With a noisy objective the width never shrinks below
    ``sqrt(2 * amplitude)``; a round clamped to that floor is returned as
    passed and flagged ``noise_limited`` when the check itself did not hold.
    """
    x_ex = as_point(x_ex)
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    if kind not in ("forward", "central"):
        raise ValueError(f"unknown finite-difference kind {kind!r}")
    if checker == "oracle":
        g_true = f.gradient(x_ex)
    elif checker == "bound":
        if f.lipschitz_L is None:
            raise ValueError("bound checker needs lipschitz_L on the objective")
    else:
        raise ValueError(f"unknown checker {checker!r}")

    floor = math.sqrt(2.0 * f.noise_amplitude) if f.noise_amplitude > 0 else 0.0
    centre = f_center
    best_g = None
    best_delta = None
    best_excess = math.inf

    for i in range(policy.max_backtracks + 1):
        delta = policy.width(i)
        clamped = floor > 0 and delta < floor
        if clamped:
            delta = floor
        if kind == "forward":
            if centre is None:
                centre = f.value(x_ex)
            g = forward_difference(f, x_ex, delta, f_x=centre)
        else:
            g = central_difference(f, x_ex, delta)
        g_norm = euclidean_norm(g)
        if checker == "oracle":
            err = euclidean_norm(g - g_true)
        else:
            err = fd_error_bound(f.lipschitz_L, f.dim, delta)
        ok = err <= nu * g_norm
        if ok or clamped:
            return InexactGradientResult(
                g=g, i_k=i, delta=delta, checker=checker,
                noise_limited=clamped and not ok,
            )
        excess = err - nu * g_norm
        if excess < best_excess:
            best_excess, best_g, best_delta = excess, g, delta

    raise BacktrackExhaustedError(
        f"no probe width within {policy.max_backtracks} backtracks passed the "
        f"{checker} check; iterate may be nearly stationary",
        best_g=best_g,
        best_delta=best_delta,
    )


def noisy_wrap(f: Objective, noise: NoiseModel) -> Objective:
    """Objective observed through additive uniform noise.

    Every evaluation returns ``f(x) + xi`` with ``xi`` drawn fresh and
    uniformly from ``[-amplitude, amplitude]`` off a :class:`SplitMix64`
    stream seeded with ``rng_seed`` (one draw per evaluation, batch entries
    drawn left to right).  The exact gradient is dropped, because no exact
    first-order information survives the corruption; the Lipschitz metadata
    of the underlying objective is kept.  The wrapper has its own meter.
    """
    stream = SplitMix64(noise.rng_seed)

    def noisy_value(x: np.ndarray) -> float:
        return float(f.value_oracle(x)) + stream.uniform_symmetric(noise.amplitude)

    def noisy_batch(columns: np.ndarray) -> np.ndarray:
        if f.value_batch_oracle is not None:
            clean = np.asarray(f.value_batch_oracle(columns), dtype=np.float64)
        else:
            clean = np.array([float(f.value_oracle(columns[:, j])) for j in range(columns.shape[1])])
        xi = np.array([stream.uniform_symmetric(noise.amplitude) for _ in range(clean.size)])
        return clean + xi

    return Objective(
        dim=f.dim,
        value_oracle=noisy_value,
        exact_gradient=None,
        lipschitz_L=f.lipschitz_L,
        strong_convexity_mu=f.strong_convexity_mu,
        plk_exponent_q=f.plk_exponent_q,
        value_batch_oracle=noisy_batch,
        noise_amplitude=noise.amplitude,
    )
