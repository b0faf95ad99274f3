"""Dense matrix kernel: exponential, inverse, characteristic polynomial,
polynomial roots and numerical rank.

Eigenvalues are obtained as roots of the characteristic polynomial. The
matrices handled by this package are tiny (at most 12x12), so the
Faddeev-LeVerrier recursion followed by Aberth-Ehrlich iteration is both
accurate and cheap, and it treats exact integer inputs exactly.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial

MAX_CHARPOLY_SIZE = 12


class DimensionError(ValueError):
    pass


class SingularMatrixError(ValueError):
    def __init__(self, det: float, message: str | None = None):
        self.det = abs(det)
        super().__init__(message or f"matrix is singular (|det| = {self.det:.3e})")


class UnsupportedSizeError(ValueError):
    pass


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def matrix_exponential(a) -> np.ndarray:
    """Return ``e^A`` (scaling and squaring with a Pade kernel)."""
    return scipy.linalg.expm(_square(a))


def matrix_inverse(a, rtol: float = 1e-12) -> np.ndarray:
    """Inverse of a square matrix.

    Singularity is judged relative to the Hadamard bound (product of row
    norms), so the test is invariant under rescaling of ``a``.
    """
    a = _square(a)
    det = float(np.linalg.det(a))
    scale = float(np.prod(np.linalg.norm(a, axis=1)))
    if scale == 0.0 or abs(det) <= rtol * scale:
        raise SingularMatrixError(det)
    return np.linalg.inv(a)


def characteristic_polynomial(a) -> Polynomial:
    """Monic characteristic polynomial ``det(lambda I - A)``, ascending coefficients.

    Faddeev-LeVerrier recursion: integer matrices produce exact coefficients.
    """
    a = _square(a)
    n = a.shape[0]
    if n > MAX_CHARPOLY_SIZE:
        raise UnsupportedSizeError(f"characteristic polynomial limited to n <= {MAX_CHARPOLY_SIZE}, got {n}")
    # descending: c[0] = 1, c[k] multiplies lambda^(n-k)
    c = np.zeros(n + 1)
    c[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + c[k - 1] * eye
        c[k] = -np.trace(a @ m) / k
    return Polynomial(c[::-1])


def _aberth(coef: np.ndarray, seed: int, maxiter: int = 800) -> np.ndarray:
    # coef ascending, monic
    n = len(coef) - 1
    p = Polynomial(coef)
    dp = p.deriv()
    # Fujiwara-style bound for the starting radius
    radius = 2.0 * max(abs(coef[n - k]) ** (1.0 / k) for k in range(1, n + 1))
    radius = max(radius, 1e-3) / 2.0
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + phase + 0.4))
    for _ in range(maxiter):
        pz = p(z)
        dpz = dp(z)
        done = pz == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(done, 0.0, pz / dpz)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            w = np.where(done, 0.0, ratio / (1.0 - ratio * s))
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 4 * np.finfo(float).eps * (1.0 + np.abs(z))):
            break
    return z


def _polish_clusters(p: Polynomial, z: np.ndarray, tol: float) -> np.ndarray:
    """Merge numerically multiple roots.

    A cluster of m roots around a multiple root has an accurate mean; it is
    refined by Newton on the (m-1)-th derivative, and accepted only when the
    lower derivatives vanish there too.
    """
    n = len(z)
    norm = float(np.sum(np.abs(p.coef)))
    out = z.copy()
    used = np.zeros(n, dtype=bool)
    order = np.argsort(z.real + 1e-3 * z.imag)
    for i in order:
        if used[i]:
            continue
        members = [j for j in range(n) if not used[j] and abs(z[j] - z[i]) <= 1e-3 * (1.0 + abs(z[i]))]
        m = len(members)
        if m == 1:
            used[i] = True
            continue
        c = np.mean(z[members])
        q = p.deriv(m - 1)
        dq = q.deriv()
        for _ in range(20):
            d = dq(c)
            if d == 0:
                break
            step = q(c) / d
            c = c - step
            if abs(step) <= 1e-16 * (1.0 + abs(c)):
                break
        ok = all(
            abs(p.deriv(j)(c)) / math.factorial(j) <= tol * norm for j in range(m - 1)
        )
        if ok:
            out[members] = c
            used[members] = True
        else:
            used[i] = True
    return out


def _pair_conjugates(z: np.ndarray, scale: float) -> np.ndarray:
    z = z.astype(complex)
    real_tol = 1e-10 * scale
    real = [complex(v.real, 0.0) for v in z if abs(v.imag) <= real_tol]
    upper = sorted((v for v in z if v.imag > real_tol), key=lambda v: (v.real, v.imag))
    lower = [v for v in z if v.imag < -real_tol]
    pairs: list[complex] = []
    for v in upper:
        # nearest conjugate partner
        j = int(np.argmin([abs(w - np.conj(v)) for w in lower]))
        w = lower.pop(j)
        mean = 0.5 * (v + np.conj(w))
        pairs += [mean, np.conj(mean)]
    if lower:
        raise ArithmeticError("unpaired complex roots for a real polynomial")
    real.sort(key=lambda v: v.real)
    return np.array(real + pairs, dtype=complex)


def polynomial_roots(p, seed: int = 0) -> np.ndarray:
    """All complex roots of a real polynomial, with multiplicity.

    Real roots come first in increasing order, followed by conjugate pairs
    ``(z, conj(z))`` ordered by real part.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(np.asarray(p, dtype=float))
    coef = np.trim_zeros(np.asarray(p.coef, dtype=float), "b")
    if coef.size == 0:
        raise ValueError("the zero polynomial has no well-defined roots")
    if coef.size == 1:
        raise ValueError("a constant polynomial has no roots")
    coef = coef / coef[-1]
    # exact zero roots factor out
    nzero = 0
    while coef[0] == 0.0:
        coef = coef[1:]
        nzero += 1
    roots = np.zeros(nzero, dtype=complex)
    if coef.size > 1:
        monic = Polynomial(coef)
        if coef.size == 2:
            z = np.array([-coef[0]], dtype=complex)
        else:
            z = _aberth(coef, seed)
            z = _polish_clusters(monic, z, tol=1e-9)
        roots = np.concatenate([roots, z])
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    return _pair_conjugates(roots, scale)


def numerical_rank(a, tol: float = 1e-8) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def eigenvalues(a, seed: int = 0) -> np.ndarray:
    """Eigenvalues of a small dense matrix through its characteristic polynomial."""
    return polynomial_roots(characteristic_polynomial(a), seed=seed)
