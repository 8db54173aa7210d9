"""
The momentum menu and the feasibility condition
===============================================

"""

from igd.momentum import (
    MomentumSchedule,
    beta_gamma,
    feasibility_check,
    schedule_bounds,
)

# Each named rule produces a pair (beta_k, gamma_k): beta shifts the point
# the step leaves from, gamma shifts the point the gradient is read at.
rules = [
    ("none", MomentumSchedule.none()),
    ("polyak", MomentumSchedule.polyak()),
    ("nesterov-sc", MomentumSchedule.nesterov_sc(L=100.0, mu=1.0)),
    ("nesterov", MomentumSchedule.nesterov_convex()),
    ("fista", MomentumSchedule.fista()),
]

print("k      " + "".join(f"{name:>16s}" for name, _ in rules))
for k in (1, 2, 3, 10, 100):
    cells = []
    for _, rule in rules:
        beta, gamma = beta_gamma(rule, k)
        cells.append(f"({beta:.3f},{gamma:.3f})")
    print(f"k={k:<4d} " + "".join(f"{c:>16s}" for c in cells))

# The analysis reads a schedule through two numbers: beta_bar, the largest
# inertial coefficient, and delta_bar, the largest gap |beta_k - gamma_k|
# (zero for rules that move both points together). Growing rules approach
# coefficient 1, which no step size survives in the worst case: their
# global bound is not strict. A cap restores it.
for rule, label in ((MomentumSchedule.nesterov_convex(), "uncapped"),
                    (MomentumSchedule.nesterov_convex(beta_cap=0.3), "cap 0.3")):
    bounds = schedule_bounds(rule)
    print(f"\nnesterov {label}: beta_bar={bounds.beta_bar}, "
          f"delta_bar={bounds.delta_bar}, strict={bounds.strict}")

# The run-time guarantee needs max(L tau, 2 L tau delta_bar
# + (L tau + 1) beta_bar^2) < 1 - nu. Margins for a safe and an unsafe pick:
for tau in (0.004, 0.009):
    feas = feasibility_check(L=100.0, tau=tau, nu=0.1, beta_bar=0.3,
                             delta_bar=0.3)
    print(f"tau={tau}: feasible={feas.feasible} margin={feas.margin:+.3f} "
          f"({feas.reason or 'ok'})")
