"""
Proximal steps are gradient steps on the Moreau envelope
========================================================

"""

import numpy as np

from igd.prox import catalog, inexact_prox, moreau_gradient, moreau_value
from igd.solvers import SolverParams, run
from igd.prox import envelope_objective
from igd.momentum import MomentumSchedule

# The catalog carries small nonsmooth pieces with closed-form proxes.
h = catalog("l1")
lam = 1.0
for x in (3.0, 0.4, -2.0):
    g = moreau_gradient(h, np.array([x]), lam)[0]
    e = moreau_value(h, np.array([x]), lam)
    print(f"x={x:+.1f}: envelope value {e:.3f}, gradient {g:+.3f}")

# The identity (x - prox(x)) / lam = grad e_lam(x) means the proximal point
# scheme is exactly gradient descent on the smoothed envelope. Running the
# smooth solver on the packaged envelope objective reproduces the proximal
# iteration record for record.
env = envelope_objective(h, lam)
params = SolverParams(tau=lam, nu=0.5, grad_tol=1e-9, max_iters=50)
trace = run(env, np.array([2.5]), params, schedule=MomentumSchedule.none(),
            gradient="exact")
print("\nenvelope descent from 2.5:",
      [f"{v:.4f}" for v in trace.f_values()])

# Without a closed form the inner solver certifies its answer: it stops as
# soon as the minimal-norm residual proves p is within nu of the step it
# represents. The certificate is a posteriori, no exact prox needed.
wc = catalog("weakly-convex-1d")
res = inexact_prox(wc, np.array([1.8]), lam, nu=0.5, use_closed_form=False)
print(f"\nweakly convex prox at 1.8: p={res.p[0]:.6f} "
      f"certificate={res.certificate:.3e} after {res.iterations} inner steps "
      f"(exact answer {wc.closed_form_prox(np.array([1.8]), lam)[0]:.6f})")
