"""
Choosing a finite-difference width, by hand and adaptively
==========================================================

"""

import numpy as np

from igd.oracles import (
    AdaptiveDeltaPolicy,
    central_difference,
    fd_error_bound,
    forward_difference,
    inexact_gradient,
    noisy_wrap,
    NoiseModel,
)
from igd.problems import gen_least_squares

# A seeded least-squares instance: f(x) = ||Ax - b||^2, L known exactly.
problem = gen_least_squares(20, seed=7)
f = problem.objective
x = np.full(20, 0.3)
g_exact = f.gradient(x)

# Sweep the width. Forward error grows linearly with delta, exactly as the
# a-priori bound L sqrt(n) delta / 2 says; central stays at roundoff level
# on a quadratic until cancellation takes over at the small end.
print("delta      forward err  central err  forward bound")
for delta in (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8):
    ef = np.linalg.norm(forward_difference(f, x, delta) - g_exact)
    ec = np.linalg.norm(central_difference(f, x, delta) - g_exact)
    print(f"{delta:8.0e}   {ef:.3e}    {ec:.3e}    "
          f"{fd_error_bound(f.lipschitz_L, f.dim, delta):.3e}")

# The adaptive policy starts from epsilon0 and halves until the bound
# clears the relative-accuracy threshold nu * ||g||; i_k below is how many
# halvings iteration needed.
policy = AdaptiveDeltaPolicy(theta=0.5, epsilon0=0.1)
result = inexact_gradient(f, x, kind="forward", policy=policy, nu=0.2,
                          checker="bound")
print(f"\nadaptive: accepted delta={result.delta:.3e} after {result.i_k} "
      f"halvings, error={np.linalg.norm(result.g - g_exact):.3e}, "
      f"allowance={0.2 * np.linalg.norm(result.g):.3e}")

# Under bounded evaluation noise the width cannot shrink forever: below
# sqrt(2 * amplitude) the difference quotient amplifies noise faster than
# it removes truncation error, so the policy clamps there and says so.
# Near the minimizer the true gradient is tiny and the clamp must engage.
noisy = noisy_wrap(f, NoiseModel(amplitude=1e-4, rng_seed=0))
near_opt = problem.known_xstar + 1e-6
result = inexact_gradient(noisy, near_opt, kind="forward", policy=policy,
                          nu=0.2, checker="bound")
print(f"\nnoisy, tiny gradient: delta clamped at {result.delta:.3e} "
      f"(floor {np.sqrt(2e-4):.3e}), noise_limited={result.noise_limited}")
