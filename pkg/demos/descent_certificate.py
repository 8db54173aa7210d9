"""
A computable descent certificate for momentum runs
==================================================

"""

import numpy as np

from igd.diagnostics import check_descent, lyapunov_constants
from igd.momentum import MomentumSchedule, schedule_bounds
from igd.problems import gen_least_squares
from igd.solvers import SolverParams, run

# Plain f(x^k) is not monotone under momentum. The merit function
# H(x, y) = f(x) + alpha ||x - y||^2 over consecutive iterate pairs is,
# provided the parameters satisfy the feasibility condition, and by a
# quantified margin: c1 times the squared movement.
problem = gen_least_squares(30, seed=11)
f = problem.objective
nu, cap = 0.1, 0.3
tau = 0.45 * (1.0 - nu) / f.lipschitz_L
schedule = MomentumSchedule.polyak(beta_cap=cap)

params = SolverParams(tau=tau, nu=nu, grad_tol=1e-10, max_iters=400)
trace = run(problem, np.zeros(30), params, schedule=schedule,
            gradient="exact")

# The constants depend on the schedule only through two numbers: the largest
# inertial coefficient and the largest gap between the two coefficients.
bounds = schedule_bounds(schedule)
consts = lyapunov_constants(f.lipschitz_L, tau, nu, bounds.beta_bar,
                            bounds.delta_bar)
print(f"beta_bar={bounds.beta_bar}  delta_bar={bounds.delta_bar}")
print(f"alpha={consts.alpha:.4f}  c1={consts.c1:.4f}  c2={consts.c2:.4f}")

# f dips below H early on, and both decrease; H never ticks up.
H = trace.lyapunov_values()
fv = trace.f_values()
for k in (0, 1, 2, 10, 50, len(H) - 1):
    print(f"k={k + 1:<4d} f={fv[k]:.6e}  H={H[k]:.6e}")
increases = sum(1 for a, b in zip(H, H[1:]) if b > a)
print(f"H increases: {increases} over {len(H) - 1} transitions")

# check_descent replays both certificate inequalities over the whole trace
# at a relative tolerance of 1e-9. An empty list is the pass verdict.
violations = check_descent(trace, consts, objective=f)
print(f"certificate violations: {len(violations)}")

# Push c1 above its true value and the same trace must fail: the margin in
# the inequality is tight enough to notice a wrong constant.
from igd.diagnostics import LyapunovConstants

wrong = LyapunovConstants(alpha=consts.alpha, c1=consts.c1 * 50, c2=consts.c2)
violations = check_descent(trace, wrong, objective=f)
print(f"with an inflated c1: {len(violations)} violations, first at "
      f"k={violations[0].k} excess={violations[0].excess:.3e}")
