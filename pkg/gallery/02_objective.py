"""Relative-entropy objective and its gradient.

Evaluates f at a feasible state and compares the analytic directional
derivative with central differences along a few feasible directions.
"""

import numpy as np

from cvqkd_psk import ObjectiveContext, ProtocolConfig, build_constraints
from cvqkd_psk.engine import feasible_direction, initial_state

cfg = ProtocolConfig(distance_km=50, xi=0.01, n_cutoff=6)
cons = build_constraints(cfg)
ctx = ObjectiveContext.from_config(cfg)
rho = initial_state(cfg, cons)
f, g = ctx.value_and_gradient(rho)
print(f"f(rho0) = {f:.6f} bits, constraint violation {cons.max_violation(rho):.1e}")

rng = np.random.default_rng(0)
t = 1e-5
for _ in range(3):
    d = feasible_direction(rho, cons, rng, radius=100.0)
    fd = (ctx.value(rho + t * d) - ctx.value(rho - t * d)) / (2 * t)
    print(f"analytic {np.real(np.vdot(g, d)):+.8f}   finite difference {fd:+.8f}")
