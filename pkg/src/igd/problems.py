"""Seeded benchmark problems.

Random data comes off the package's own :class:`~igd.rng.SplitMix64` stream
so that a written seed pins the instance exactly.  Draw order for the matrix
problems: all ``n*n`` entries of ``A`` row by row, then the ``n`` entries of
``b``, every entry a standard normal.

Lipschitz moduli are computed, not assumed: the least-squares Hessian is
``2 A^T A`` with spectral norm obtained by power iteration (all-ones start,
at most 200 iterations, stop when the Rayleigh estimate moves by less than
1e-12 relatively), and the logistic-flavoured restoration objective uses
``2 ||A^T A||_inf`` which dominates its Hessian everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Objective
from .rng import SplitMix64

__all__ = [
    "ProblemInstance",
    "least_squares_instance",
    "image_restoration_instance",
    "gen_least_squares",
    "gen_image_restoration",
    "gen_plk_test",
]

_RESIDUAL_TOL = 1e-8


@dataclass
class ProblemInstance:
    """An objective bundled with whatever ground truth is known about it."""

    objective: Objective
    known_fstar: float | None = None
    known_xstar: np.ndarray | None = None
    kind: str = ""
    seed: int | None = None
    data: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.objective.dim


def _spectral_norm_power(M: np.ndarray, iters: int = 200, rtol: float = 1e-12) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    n = M.shape[0]
    v = np.ones(n) / math.sqrt(n)
    est = 0.0
    for _ in range(iters):
        w = M @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        new_est = float(v @ (M @ v))
        if est > 0 and abs(new_est - est) <= rtol * est:
            return new_est
        est = new_est
    return est


def _solve_if_consistent(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(x)):
        return None
    residual = np.linalg.norm(A @ x - b)
    if residual > _RESIDUAL_TOL * (1.0 + np.linalg.norm(b)):
        return None
    return x


def _sample_matrix_and_rhs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    stream = SplitMix64(seed)
    A = np.array(stream.normals(n * n)).reshape(n, n)
    b = np.array(stream.normals(n))
    return A, b


def least_squares_instance(A: np.ndarray, b: np.ndarray, kind: str = "L",
                           seed: int | None = None) -> ProblemInstance:
    """``f(x) = ||A x - b||^2`` with exact gradient ``2 A^T (A x - b)``."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = b.size
    if A.shape != (n, n):
        raise ValueError(f"A must be square of size {n}, got {A.shape}")
    At = A.T.copy()

    def value(x: np.ndarray) -> float:
        r = A @ x - b
        return float(r @ r)

    def gradient(x: np.ndarray) -> np.ndarray:
        return 2.0 * (At @ (A @ x - b))

    def value_batch(cols: np.ndarray) -> np.ndarray:
        R = A @ cols - b[:, None]
        return np.einsum("ij,ij->j", R, R)

    L = 2.0 * _spectral_norm_power(At @ A)
    xstar = _solve_if_consistent(A, b)
    objective = Objective(
        dim=n, value_oracle=value, exact_gradient=gradient,
        lipschitz_L=L, value_batch_oracle=value_batch,
        plk_exponent_q=0.5 if xstar is not None else None,
    )
    return ProblemInstance(
        objective=objective,
        known_fstar=0.0 if xstar is not None else None,
        known_xstar=xstar,
        kind=kind, seed=seed, data={"A": A, "b": b},
    )


def image_restoration_instance(A: np.ndarray, b: np.ndarray, kind: str = "N",
                               seed: int | None = None) -> ProblemInstance:
    """``f(x) = sum_i log(1 + (A x - b)_i^2)``, a smooth nonconvex misfit."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = b.size
    if A.shape != (n, n):
        raise ValueError(f"A must be square of size {n}, got {A.shape}")
    At = A.T.copy()

    def value(x: np.ndarray) -> float:
        r = A @ x - b
        return float(np.sum(np.log1p(r * r)))

    def gradient(x: np.ndarray) -> np.ndarray:
        r = A @ x - b
        return 2.0 * (At @ (r / (1.0 + r * r)))

    def value_batch(cols: np.ndarray) -> np.ndarray:
        R = A @ cols - b[:, None]
        return np.sum(np.log1p(R * R), axis=0)

    M = At @ A
    L = 2.0 * float(np.max(np.sum(np.abs(M), axis=1)))
    xstar = _solve_if_consistent(A, b)
    objective = Objective(
        dim=n, value_oracle=value, exact_gradient=gradient,
        lipschitz_L=L, value_batch_oracle=value_batch,
    )
    return ProblemInstance(
        objective=objective,
        known_fstar=0.0 if xstar is not None else None,
        known_xstar=xstar,
        kind=kind, seed=seed, data={"A": A, "b": b},
    )


def gen_least_squares(n: int, seed: int) -> ProblemInstance:
    """Random dense least squares: Gaussian ``A`` (n x n) and ``b``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    A, b = _sample_matrix_and_rhs(n, seed)
    return least_squares_instance(A, b, kind="L", seed=seed)


def gen_image_restoration(n: int, seed: int) -> ProblemInstance:
    """Random dense restoration misfit with the same sampling as least squares."""
    if n < 1:
        raise ValueError("n must be at least 1")
    A, b = _sample_matrix_and_rhs(n, seed)
    return image_restoration_instance(A, b, kind="N", seed=seed)


def gen_plk_test(p: float) -> ProblemInstance:
    """One-dimensional ``f(x) = |x|^(2p)`` with ``p > 1``.

    The minimizer is 0 and the Lojasiewicz-type exponent is
    ``q = 1 - 1/(2p)``, placing the problem in the sublinear-rate regime with
    predicted distance decay ``k**(-(1-q)/(2q-1))``.  The gradient modulus
    ``2p(2p-1)`` stored on the objective is valid on ``|x| <= 1``; start runs
    inside that interval.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")

    def value(x: np.ndarray) -> float:
        return float(np.abs(x[0]) ** (2.0 * p))

    def gradient(x: np.ndarray) -> np.ndarray:
        t = x[0]
        return np.array([2.0 * p * math.copysign(abs(t) ** (2.0 * p - 1.0), t)])

    q = 1.0 - 1.0 / (2.0 * p)
    objective = Objective(
        dim=1, value_oracle=value, exact_gradient=gradient,
        lipschitz_L=2.0 * p * (2.0 * p - 1.0), plk_exponent_q=q,
    )
    return ProblemInstance(
        objective=objective, known_fstar=0.0, known_xstar=np.zeros(1),
        kind="plk", data={"p": p},
    )
