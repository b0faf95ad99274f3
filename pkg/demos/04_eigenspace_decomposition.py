"""
Expanding / unimodular / contracting parts for h = diag(2, 1/2).

Ad(h) scales E by 4, fixes H and scales F by 1/4.  The contracting part
shrinks under Ad(h), the expanding part shrinks under Ad(h)^-1; the
corresponding subgroups are sampled by exponentiating the subspaces.
"""

import numpy as np

from lielinear.descriptor import fixture
from lielinear.spectral import murakami_factor, spectral_report, subgroup_samples

np.set_printoptions(precision=4, suppress=True)
sys = fixture("sl2_hyperbolic")
report = spectral_report(sys)

## Eigenvalues and tags
for (lam, mult), tag in zip(report.eigenvalues, report.tags):
    print(f"lambda = {lam.real:7.4f}  (x{mult})  {tag}")

## Bases as matrices
for part in ("plus", "zero", "minus"):
    print(f"\n{part}:", [x.matrix.tolist() for x in report.basis(part)])

## Norms along the orbit
a = report.dfo_matrix
x_minus = report.bases["minus"][:, 0]
x_plus = report.bases["plus"][:, 0]
print("\n k   |Ad^k X_minus|   |Ad^-k X_plus|")
for k in range(0, 21, 4):
    print(f"{k:2d}   {np.linalg.norm(np.linalg.matrix_power(a, k) @ x_minus):.3e}"
          f"       {np.linalg.norm(np.linalg.matrix_power(np.linalg.inv(a), k) @ x_plus):.3e}")

## Subgroup samples: exp of the contracting part is lower unipotent
for g in subgroup_samples(report, "minus", 3, seed=0):
    print("\n", g)

## Inner factor W = ln(2) H
print("\nW =\n", murakami_factor(sys).W.matrix, "\nln 2 =", np.log(2))
