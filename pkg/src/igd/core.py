"""Vectors, metered objectives, and run traces.

Conventions shared by the whole package:

* A point is a one-dimensional ``numpy.float64`` array.  :func:`as_point` is
  the single entry for validating outside data; every public routine that
  accepts a vector goes through it.
* An :class:`Objective` wraps a scalar value oracle together with an optional
  exact gradient and smoothness metadata.  Every oracle call is metered, and
  evaluation budgets are enforced by the meter itself: a charge that would
  exceed the limit raises before the oracle runs, so the recorded count can
  never pass the budget.
* Evaluation cost model: recording the value at the current iterate costs one
  evaluation per iteration and doubles as the forward-difference centre when
  the probe point coincides with the iterate; a forward-difference gradient
  then costs ``n`` further evaluations per probe round, a central-difference
  gradient ``2 n``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "NonFiniteValueError",
    "BudgetExhaustedError",
    "BacktrackExhaustedError",
    "InfeasibleParametersError",
    "InnerSolveError",
    "as_point",
    "vec_axpy",
    "euclidean_norm",
    "EvalCounters",
    "Objective",
    "TraceRecord",
    "RunTrace",
]


class DimensionMismatchError(ValueError):
    """Two vectors that must share a dimension do not."""


class NonFiniteValueError(ValueError):
    """An oracle produced, or was handed, a NaN or infinity."""


class BudgetExhaustedError(RuntimeError):
    """A charge against the evaluation meter would exceed its limit."""


class BacktrackExhaustedError(RuntimeError):
    """No probe width within the backtracking allowance passed its check.

    Usually means the iterate is nearly stationary or the evaluation budget
    cannot support a probe fine enough for the requested accuracy.  The best
    surrogate found is attached so callers can report it.
    """

    def __init__(self, message: str, best_g=None, best_delta: float | None = None):
        super().__init__(message)
        self.best_g = best_g
        self.best_delta = best_delta


class InfeasibleParametersError(ValueError):
    """Step size, momentum bounds and accuracy violate the strict feasibility condition."""


class InnerSolveError(RuntimeError):
    """The inner proximal solver ran out of iterations before certifying its answer."""

    def __init__(self, message: str, best_p=None, best_certificate: float | None = None):
        super().__init__(message)
        self.best_p = best_p
        self.best_certificate = best_certificate


def as_point(values) -> np.ndarray:
    """Return ``values`` as a finite 1-D float64 array.

    Scalars become length-one arrays.  Non-finite entries are rejected rather
    than propagated, since a single NaN silently poisons every later iterate.
    """
    x = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if x.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {x.shape}")
    if x.size == 0:
        raise DimensionMismatchError("empty vector")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValueError("vector contains NaN or infinite entries")
    return x


def _check_same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionMismatchError(f"dimension mismatch: {x.shape} vs {y.shape}")


def vec_axpy(a: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``a * x + y`` for vectors of equal dimension."""
    x = as_point(x)
    y = as_point(y)
    _check_same_dim(x, y)
    if not np.isfinite(a):
        raise NonFiniteValueError("scalar coefficient is not finite")
    return a * x + y

def euclidean_norm(x) -> float:
    """Euclidean norm of a vector."""
    return float(np.linalg.norm(as_point(x)))


class EvalCounters:
    """Thread-safe oracle call meter with an optional hard limit on value calls.

    ``charge_value`` / ``charge_grad`` must be called before the corresponding
    oracle work happens; a rejected charge leaves the counts untouched, which
    is what makes budget accounting exact.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.value = 0
        self.grad = 0
        self.value_limit: int | None = None

    def charge_value(self, count: int = 1) -> None:
        with self._lock:
            if self.value_limit is not None and self.value + count > self.value_limit:
                raise BudgetExhaustedError(
                    f"charging {count} value evaluations would exceed the "
                    f"budget of {self.value_limit} (already used {self.value})"
                )
            self.value += count

    def charge_grad(self, count: int = 1) -> None:
        with self._lock:
            self.grad += count

    def snapshot(self) -> tuple[int, int]:
        with self._lock:
            return self.value, self.grad


@dataclass
class Objective:
    """A smooth objective with metered oracles.

    Parameters
    ----------
    dim:
        Ambient dimension; every oracle argument is validated against it.
    value_oracle:
        Maps a point to a finite scalar.
    exact_gradient:
        Optional true gradient oracle.  Absent for noisy wrappers, where only
        surrogate gradients make sense.
    lipschitz_L:
        Gradient Lipschitz modulus when known; consumed by step-size defaults,
        feasibility checks and the width-selection bound.
    strong_convexity_mu:
        Strong convexity modulus when known.
    plk_exponent_q:
        Lojasiewicz-type exponent when known; only the rate diagnostics read it.
    value_batch_oracle:
        Optional vectorized evaluator taking an ``(dim, m)`` column matrix and
        returning ``m`` values.  Semantically identical to ``m`` single calls
        and charged as such; exists so coordinate probes cost one BLAS call.
    noise_amplitude:
        Half-width of the additive evaluation noise, zero for clean oracles.
        The adaptive width floor is derived from it.

    All fields are fixed after construction; only the meter mutates.
    """

    dim: int
    value_oracle: Callable[[np.ndarray], float]
    exact_gradient: Callable[[np.ndarray], np.ndarray] | None = None
    lipschitz_L: float | None = None
    strong_convexity_mu: float | None = None
    plk_exponent_q: float | None = None
    value_batch_oracle: Callable[[np.ndarray], np.ndarray] | None = None
    noise_amplitude: float = 0.0
    counters: EvalCounters = field(default_factory=EvalCounters)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.lipschitz_L is not None and self.lipschitz_L <= 0:
            raise ValueError("lipschitz_L must be positive when given")

    def _check_arg(self, x: np.ndarray) -> np.ndarray:
        x = as_point(x)
        if x.size != self.dim:
            raise DimensionMismatchError(f"expected dimension {self.dim}, got {x.size}")
        return x

    def value(self, x) -> float:
        """Evaluate the objective at ``x``, charging one value call."""
        x = self._check_arg(x)
        self.counters.charge_value(1)
        v = float(self.value_oracle(x))
        if not np.isfinite(v):
            raise NonFiniteValueError(f"value oracle returned {v!r}")
        return v

    def value_batch(self, columns: np.ndarray) -> np.ndarray:
        """Evaluate at each column of a ``(dim, m)`` matrix, charging ``m`` calls."""
        columns = np.asarray(columns, dtype=np.float64)
        if columns.ndim != 2 or columns.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"expected a ({self.dim}, m) column matrix, got shape {columns.shape}"
            )
        m = columns.shape[1]
        self.counters.charge_value(m)
        if self.value_batch_oracle is not None:
            vals = np.asarray(self.value_batch_oracle(columns), dtype=np.float64)
        else:
            vals = np.array([float(self.value_oracle(columns[:, j])) for j in range(m)])
        if vals.shape != (m,):
            raise DimensionMismatchError("batch oracle returned a wrong-shaped result")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValueError("value oracle returned NaN or infinity in a batch")
        return vals

    def gradient(self, x) -> np.ndarray:
        """Evaluate the exact gradient at ``x``, charging one gradient call."""
        if self.exact_gradient is None:
            raise ValueError("objective has no exact gradient oracle")
        x = self._check_arg(x)
        self.counters.charge_grad(1)
        g = np.asarray(self.exact_gradient(x), dtype=np.float64)
        if g.shape != (self.dim,):
            raise DimensionMismatchError("gradient oracle returned a wrong-shaped result")
        if not np.all(np.isfinite(g)):
            raise NonFiniteValueError("gradient oracle returned NaN or infinite entries")
        return g

    @property
    def has_gradient(self) -> bool:
        return self.exact_gradient is not None


@dataclass
class TraceRecord:
    """State of one iteration: the iterate, its value, and meter snapshots.

    ``step_norm`` is the distance to the next iterate; it is zero on the
    final record when the run stopped before computing a further step (small
    gradient, stationarity, divergence).  ``lyapunov_H`` is filled after the
    run when the parameters admit a descent certificate, and stays ``None``
    otherwise.
    """

    k: int
    f_val: float
    g_norm: float
    step_norm: float
    value_evals: int
    grad_evals: int
    lyapunov_H: float | None = None
    x: np.ndarray | None = None


@dataclass
class RunTrace:
    """Complete record of a solver run."""

    records: list[TraceRecord]
    reason: str
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> TraceRecord:
        if not self.records:
            raise ValueError("empty trace")
        return self.records[-1]

    def f_values(self) -> np.ndarray:
        return np.array([r.f_val for r in self.records])

    def g_norms(self) -> np.ndarray:
        return np.array([r.g_norm for r in self.records])

    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records])

    def iterates(self) -> list[np.ndarray]:
        xs = [r.x for r in self.records]
        if any(x is None for x in xs):
            raise ValueError("iterates were not stored for this run")
        return xs  # type: ignore[return-value]

    def lyapunov_values(self) -> list[float | None]:
        return [r.lyapunov_H for r in self.records]

    def validate(self) -> None:
        """Check monotone iteration index and nondecreasing meter snapshots."""
        ks = [r.k for r in self.records]
        if ks != sorted(ks) or len(set(ks)) != len(ks):
            raise ValueError("iteration indices are not strictly increasing")
        ve = [r.value_evals for r in self.records]
        ge = [r.grad_evals for r in self.records]
        if any(b < a for a, b in zip(ve, ve[1:])) or any(b < a for a, b in zip(ge, ge[1:])):
            raise ValueError("meter snapshots decreased along the trace")
