"""Spectrum of the drift differential and the expanding / unimodular /
contracting decomposition of the Lie algebra.

The differential of ``f_0 = C_h`` is represented either on the whole of
gl(n) (``"ambient"``, row-major coordinates) or on the group's own algebra
(``"algebra"``, coordinates in :func:`lie.basis_matrices`).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial

from .lie import AlgebraElement, GroupSpec, ad_matrix, adjoint_matrix, ambient_differential, basis_matrices
from .linalg import characteristic_polynomial, matrix_exponential, matrix_inverse, polynomial_roots
from .system import LinearSystem

UNIMODULAR_TOL = 1e-6
INVARIANCE_TOL = 1e-7
ROOT_RESIDUAL_TOL = 1e-8
PARTS = ("plus", "zero", "minus")


class SpectralError(ArithmeticError):
    pass


class NoRealLogarithmError(ValueError):
    pass


def classify(lam: complex, tol: float = UNIMODULAR_TOL) -> str:
    """``"expanding"``, ``"unimodular"`` or ``"contracting"`` by ``|lam|``."""
    r = abs(lam)
    if abs(r - 1.0) <= tol:
        return "unimodular"
    return "expanding" if r > 1.0 else "contracting"


_TAG_PART = {"expanding": "plus", "unimodular": "zero", "contracting": "minus"}


@dataclass(frozen=True, eq=False)
class SpectralReport:
    representation: str
    dfo_matrix: np.ndarray
    eigenvalues: list[tuple[complex, int]]
    tags: list[str]
    bases: dict[str, np.ndarray]  # part -> coordinates, shape (dim, k)
    blocks: dict[str, np.ndarray]
    group: GroupSpec = field(repr=False)
    tol_unimodular: float = UNIMODULAR_TOL

    @property
    def all_eigenvalues(self) -> np.ndarray:
        return np.array([lam for lam, mult in self.eigenvalues for _ in range(mult)])

    @property
    def unimodular_margin(self) -> float:
        """Largest ``||lam| - 1|`` over the spectrum; the spectrum is unimodular
        exactly when this is at most the tolerance."""
        return max(abs(abs(lam) - 1.0) for lam, _ in self.eigenvalues)

    @property
    def all_unimodular(self) -> bool:
        return all(t == "unimodular" for t in self.tags)

    def offending(self) -> list[complex]:
        return [lam for (lam, _), t in zip(self.eigenvalues, self.tags) if t != "unimodular"]

    def basis(self, part: str) -> list[AlgebraElement]:
        coords = self.bases[part]
        return [AlgebraElement.from_coords(coords[:, i], self.group) for i in range(coords.shape[1])]

    @property
    def basis_plus(self) -> list[AlgebraElement]:
        return self.basis("plus")

    @property
    def basis_zero(self) -> list[AlgebraElement]:
        return self.basis("zero")

    @property
    def basis_minus(self) -> list[AlgebraElement]:
        return self.basis("minus")

    def invariance_residual(self, part: str) -> float:
        b = self.bases[part]
        if b.shape[1] == 0:
            return 0.0
        return float(np.linalg.norm(self.dfo_matrix @ b - b @ self.blocks[part]))


def dfo_matrix(sys: LinearSystem, representation: str = "algebra") -> np.ndarray:
    if representation == "algebra":
        return adjoint_matrix(sys.h, sys.group)
    if representation == "ambient":
        return ambient_differential(sys.h, sys.group.n)
    raise ValueError(f"unknown representation {representation!r}")


def _group_roots(roots: np.ndarray) -> list[tuple[complex, int]]:
    groups: list[list] = []
    for z in roots:
        for g in groups:
            if abs(g[0] - z) <= 1e-12 * (1.0 + abs(z)):
                g[1] += 1
                break
        else:
            groups.append([complex(z), 1])
    return [(z, m) for z, m in groups]


def _part_factor(a: np.ndarray, roots: list[complex]) -> np.ndarray:
    """Real matrix ``prod (A - lam I)`` over ``roots`` (closed under conjugation)."""
    n = a.shape[0]
    eye = np.eye(n)
    q = eye.copy()
    pending = list(roots)
    while pending:
        lam = pending.pop(0)
        if abs(lam.imag) == 0.0:
            q = q @ (a - lam.real * eye)
        else:
            j = int(np.argmin([abs(z - np.conj(lam)) for z in pending]))
            pending.pop(j)
            # real quadratic factor A^2 - 2 Re(lam) A + |lam|^2
            q = q @ (a @ a - 2.0 * lam.real * a + abs(lam) ** 2 * eye)
    return q


def _invariant_subspace(a: np.ndarray, roots: list[complex]) -> np.ndarray:
    """Orthonormal basis of the sum of generalised eigenspaces for ``roots``."""
    k = len(roots)
    n = a.shape[0]
    if k == 0:
        return np.zeros((n, 0))
    if k == n:
        return np.eye(n)
    q = _part_factor(a, roots)
    _, _, vt = np.linalg.svd(q)
    return vt[n - k:].T


def spectral_report(sys: LinearSystem, representation: str = "algebra",
                    tol_unimodular: float = UNIMODULAR_TOL) -> SpectralReport:
    """Eigenvalues of ``df_0``, their classification and the invariant subspaces.

    Raises :class:`SpectralError` when the root finder's residual or a
    subspace's invariance residual exceeds its tolerance.
    """
    if tol_unimodular <= 0:
        raise ValueError("tol_unimodular must be positive")
    a = dfo_matrix(sys, representation)
    group = sys.group if representation == "algebra" else GroupSpec("GLplus", sys.group.n)
    p = characteristic_polynomial(a)
    roots = polynomial_roots(p)
    scale = sum(abs(c) * np.abs(roots) ** k for k, c in enumerate(p.coef))
    residuals = np.abs(p(roots)) / scale
    if np.any(residuals > ROOT_RESIDUAL_TOL):
        raise SpectralError(f"eigenvalue residuals too large: {residuals.tolist()}")

    eigen = _group_roots(roots)
    tags = [classify(lam, tol_unimodular) for lam, _ in eigen]
    bases, blocks = {}, {}
    for part in PARTS:
        members = [lam for (lam, mult), t in zip(eigen, tags) if _TAG_PART[t] == part for _ in range(mult)]
        b = _invariant_subspace(a, members)
        bases[part] = b
        blocks[part] = b.T @ a @ b
    report = SpectralReport(representation, a, eigen, tags, bases, blocks, group, tol_unimodular)
    for part in PARTS:
        r = report.invariance_residual(part)
        if r > INVARIANCE_TOL:
            raise SpectralError(f"{part} subspace not invariant (residual {r:.3e})")
    return report


def lambda_formulas(h) -> tuple[complex, complex]:
    """Closed-form non-trivial eigenvalues of ``X -> h X h^-1`` for 2x2 ``h``.

    With ``t = h11 + h22``, ``d = det h`` and discriminant
    ``D = h11^2 - 2 h11 h22 + 4 h12 h21 + h22^2`` the two values are
    ``(h11^2 + 2 h12 h21 + h22^2 -/+ t sqrt(D)) / (2 d)``.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != (2, 2):
        raise ValueError(f"lambda_formulas needs a 2x2 matrix, got shape {h.shape}")
    h11, h12, h21, h22 = h[0, 0], h[0, 1], h[1, 0], h[1, 1]
    det = h11 * h22 - h12 * h21
    if det == 0.0:
        raise ValueError("h is singular")
    root = cmath.sqrt(h11**2 - 2 * h11 * h22 + 4 * h12 * h21 + h22**2)
    s = h11**2 + 2 * h12 * h21 + h22**2
    lam1 = (-(h11 + h22) * root + s) / (2 * det)
    lam2 = ((h11 + h22) * root + s) / (2 * det)
    return complex(lam1), complex(lam2)


def closed_form_charpoly(h) -> Polynomial:
    """The characteristic polynomial of the ambient ``df_0`` for 2x2 ``h``, expanded:
    ``(lam - 1)^2 ((lam h22 - h11)(h22 - lam h11) + (lam + 1)^2 h12 h21) / (h12 h21 - h11 h22)``."""
    h = np.asarray(h, dtype=float)
    h11, h12, h21, h22 = h[0, 0], h[0, 1], h[1, 0], h[1, 1]
    lam = Polynomial([0.0, 1.0])
    inner = (lam * h22 - h11) * (h22 - lam * h11) + (lam + 1) ** 2 * (h12 * h21)
    return (lam - 1) ** 2 * inner / (h12 * h21 - h11 * h22)


@dataclass(frozen=True, eq=False)
class MurakamiFactor:
    """``df_0 = e^{ad W} phi`` with ``phi = residual_outer``."""

    W: AlgebraElement
    inner_matrix: np.ndarray
    residual_outer: np.ndarray
    residual_norm: float
    lstsq_residual: float
    degraded: bool


def murakami_factor(sys: LinearSystem, degraded_tol: float = 1e-6) -> MurakamiFactor:
    """Split the algebra action of ``f_0`` into an inner factor ``e^{ad W}`` and a remainder.

    ``W`` is fitted so that ``ad W`` matches the principal logarithm of
    ``Ad(h)`` in the least-squares sense; ``residual_norm`` is
    ``||residual_outer - I||_F`` and is reported rather than hidden.
    """
    group = sys.group
    a = adjoint_matrix(sys.h, group)
    for lam in polynomial_roots(characteristic_polynomial(a)):
        if abs(lam.imag) <= 1e-12 * (1.0 + abs(lam)) and lam.real <= 0.0:
            raise NoRealLogarithmError(f"Ad(h) has eigenvalue {lam.real:.6g} on the closed negative real axis")
    log = scipy.linalg.logm(a)
    log = np.real_if_close(log, tol=1e6)
    if np.iscomplexobj(log):
        raise NoRealLogarithmError("principal logarithm of Ad(h) is not real")
    basis = basis_matrices(group)
    design = np.stack([ad_matrix(b, group).ravel() for b in basis], axis=1)
    w, *_ = np.linalg.lstsq(design, log.ravel(), rcond=None)
    lstsq_residual = float(np.linalg.norm(design @ w - log.ravel()))
    W = AlgebraElement.from_coords(w, group)
    inner = matrix_exponential(ad_matrix(W, group))
    outer = a @ matrix_inverse(inner)
    residual = float(np.linalg.norm(outer - np.eye(len(a))))
    return MurakamiFactor(W, inner, outer, residual, lstsq_residual, lstsq_residual > degraded_tol)


def subgroup_samples(report: SpectralReport, part: str, count: int, seed: int = 0,
                     scale: float = 1.0) -> list[np.ndarray]:
    """Seeded elements ``exp(X)`` with ``X`` random in the ``part`` subspace."""
    if part not in PARTS:
        raise ValueError(f"part must be one of {PARTS}")
    b = report.bases[part]
    if b.shape[1] == 0:
        raise ValueError(f"the {part} subspace is empty")
    rng = np.random.default_rng(seed)
    coeffs = scale * rng.standard_normal((count, b.shape[1]))
    out = []
    for c in coeffs:
        x = AlgebraElement.from_coords(b @ c, report.group).matrix
        out.append(matrix_exponential(x))
    return out
