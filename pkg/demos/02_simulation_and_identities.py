"""
Simulating a linear system on SL(2) and checking the solution identities.

f_u(g) = b(u) h g h^-1.  Solutions satisfy a translation formula, a cocycle
property and, with concatenated controls, the semigroup identity for
reachable sets.  The reversed system runs time backwards.
"""

import numpy as np

from lielinear.descriptor import fixture
from lielinear.reach import cocycle_check, duality_check, semigroup_check, translation_check
from lielinear.system import reversed_system, solve, step, step_inverse, trajectory

np.set_printoptions(precision=5, suppress=True)
sys = fixture("sl2_unipotent")
e = np.eye(2)

## One step and its inverse
g1 = step(sys, e, [0.2])
print("f_0.2(e) =\n", g1)
print("back again:\n", step_inverse(sys, g1, [0.2]))

## A three-step trajectory; row j of the control array is the control at time j
u = np.array([[0.1], [-0.3], [0.25]])
for k, g in enumerate(trajectory(sys, e, u)):
    print(f"x_{k} =", g.ravel(), " det =", round(np.linalg.det(g), 14))

## Negative times undo positive ones
x3 = solve(sys, 3, e, u)
print("\nsolve(-3, solve(3, e, u), u) =\n", solve(sys, -3, x3, u))

## Identity checks on random samples (residuals are scale-normalised)
for report in (
    translation_check(sys, 5, samples=200, seed=1),
    cocycle_check(sys, 3, 2, samples=200, seed=1),
    semigroup_check(sys, 2, 3, samples=200, seed=1),
    duality_check(sys, 4, samples=200, seed=1),
):
    print(f"{report.name:12s} max residual {report.max_residual:.2e}  passed={report.passed}")

## The reversed system: drift h^-1, control map h^-1 b(u)^-1 h
rev = reversed_system(sys)
print("\nreversed b(0.2) =\n", rev.control_matrix([0.2]))
