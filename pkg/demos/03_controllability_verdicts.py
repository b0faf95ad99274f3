"""
Controllability verdicts for the four bundled systems.

A system is reported Controllable when e is certified interior to the
reachable set (a full-rank control Jacobian at u = 0) and every eigenvalue
of Ad(h) lies on the unit circle.  The criterion is only sufficient, so a
failed search is reported as inconclusive, never as "uncontrollable".
"""

from lielinear.descriptor import FIXTURES, fixture
from lielinear.reach import interior_certificate
from lielinear.verdict import analyze

## Certificate for the unipotent system: k = 3 steps with zero controls
cert = interior_certificate(fixture("sl2_unipotent"))
print("k =", cert.k, " rank =", cert.rank, " status =", cert.status)
print("Jacobian (algebra coordinates, columns = time steps):")
for row in cert.jacobian:
    print("   ", [round(x, 6) for x in row])
print("Newton covering:", cert.newton)

## Verdicts
for name in FIXTURES:
    v = analyze(fixture(name))
    print(f"\n{name}: {v.status}")
    for note in v.notes:
        print("   -", note)

## Tolerance plumbing: a huge unimodular tolerance forces the hyperbolic case through
v = analyze(fixture("sl2_hyperbolic"), tol_unimodular=10)
print("\nsl2_hyperbolic with tol 10:", v.status)
print("   -", v.notes[-2])
