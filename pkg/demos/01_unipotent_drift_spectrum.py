"""
Spectrum of the drift for the unipotent conjugator h = [[1, 1], [0, 1]].

Shows the differential of g -> h g h^-1 on all of gl(2) and on sl(2), its
characteristic polynomial, the eigenvalues and the inner factor W with
Ad(h) = exp(ad W).
"""

import numpy as np

from lielinear.descriptor import fixture
from lielinear.linalg import characteristic_polynomial
from lielinear.spectral import lambda_formulas, murakami_factor, spectral_report

np.set_printoptions(precision=4, suppress=True)

sys = fixture("sl2_unipotent")
print("h =\n", sys.h)
print("b(u) entries:", sys.b_sources)

## The differential on gl(2), row-major coordinates (g11, g12, g21, g22)
amb = spectral_report(sys, "ambient")
print("\nambient df0 =\n", amb.dfo_matrix)
print("char. polynomial (ascending):", characteristic_polynomial(amb.dfo_matrix).coef)
print("eigenvalues:", amb.eigenvalues)

## The same map on sl(2), basis (H, E, F)
alg = spectral_report(sys)
print("\nAd(h) =\n", alg.dfo_matrix)
print("tags:", alg.tags, " margin max||lam|-1| =", alg.unimodular_margin)

## Closed-form non-trivial eigenvalues for a 2x2 conjugator
print("\nlambda_1, lambda_2 =", lambda_formulas(sys.h))

## Ad(h) is unipotent, so it is exp(ad W) with W nilpotent
m = murakami_factor(sys)
print("\nW =\n", m.W.matrix)
print("residual ||Ad(h) exp(ad W)^-1 - I|| =", m.residual_norm)
