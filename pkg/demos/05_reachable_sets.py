"""
Sampling reachable sets and steering with Newton's method.

The grid strategy always lists the zero control first, so e is among the
points; Monte Carlo sampling is seeded and identical for any worker count.
"""

import numpy as np

from lielinear.descriptor import fixture
from lielinear.reach import newton_reach, sample_reachable, to_csv
from lielinear.system import solve

sys = fixture("sl2_unipotent")

## Grid: one step, three values per axis -> e, b(-0.5), b(0.5)
print(to_csv(sample_reachable(sys, 1, "grid", 3)))

## Monte Carlo at horizon 3
s1 = sample_reachable(sys, 3, "mc", 2000, seed=7, workers=1)
s4 = sample_reachable(sys, 3, "mc", 2000, seed=7, workers=4)
print("1 vs 4 workers identical:", to_csv(s1) == to_csv(s4))
print("spread of g11 over R_3:", s1.points[:, 0, 0].min(), s1.points[:, 0, 0].max())

## Steering to a nearby target
target = solve(sys, 3, np.eye(2), [[0.05], [-0.02], [0.04]])
u, residual, ok = newton_reach(sys, target, np.zeros((3, 1)))
print("\nNewton controls:", u.ravel(), " residual:", residual, " converged:", ok)
