"""Matrix Lie groups SL(n) and GL+(n): algebra bases, bracket, adjoint maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import matrix_inverse

SUPPORTED_KINDS = ("SL", "GLplus")
MEMBERSHIP_TOL = 1e-9
TRACE_TOL = 1e-10


class UnsupportedGroupError(ValueError):
    pass


class GroupMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise UnsupportedGroupError(f"unsupported group kind {self.kind!r}")
        if self.n < 2:
            raise UnsupportedGroupError(f"ambient size must be at least 2, got {self.n}")

    @property
    def dim(self) -> int:
        return self.n * self.n - 1 if self.kind == "SL" else self.n * self.n

    def identity(self) -> np.ndarray:
        return np.eye(self.n)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    matrix: np.ndarray
    coords: np.ndarray
    group: GroupSpec = field(repr=False)

    @classmethod
    def from_matrix(cls, x, group: GroupSpec) -> "AlgebraElement":
        x = np.asarray(x, dtype=float)
        if x.shape != (group.n, group.n):
            raise ValueError(f"expected a {group.n}x{group.n} matrix, got {x.shape}")
        if group.kind == "SL" and abs(np.trace(x)) > TRACE_TOL * max(1.0, float(np.max(np.abs(x)))):
            raise ValueError(f"trace {np.trace(x):.3e} is not zero: not in sl({group.n})")
        return cls(x, to_coords(x, group), group)

    @classmethod
    def from_coords(cls, c, group: GroupSpec) -> "AlgebraElement":
        c = np.asarray(c, dtype=float)
        return cls(from_coords(c, group), c, group)


@lru_cache(maxsize=None)
def _basis(kind: str, n: int) -> np.ndarray:
    mats = []
    if kind == "GLplus":
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n))
                e[i, j] = 1.0
                mats.append(e)
    else:
        # H_i = E_ii - E_{i+1,i+1}, then upper E_ij, then lower E_ij (row-major)
        for i in range(n - 1):
            e = np.zeros((n, n))
            e[i, i], e[i + 1, i + 1] = 1.0, -1.0
            mats.append(e)
        for i in range(n):
            for j in range(i + 1, n):
                e = np.zeros((n, n))
                e[i, j] = 1.0
                mats.append(e)
        for i in range(n):
            for j in range(i):
                e = np.zeros((n, n))
                e[i, j] = 1.0
                mats.append(e)
    out = np.array(mats)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _offdiag_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
    lower = [(i, j) for i in range(n) for j in range(i)]
    rows, cols = zip(*(upper + lower))
    return np.array(rows), np.array(cols)


def basis_matrices(group: GroupSpec) -> np.ndarray:
    """Basis of the Lie algebra as an array of shape ``(dim, n, n)``.

    SL(2) uses the ordered basis H, E, F.
    """
    return _basis(group.kind, group.n)


def algebra_basis(group: GroupSpec) -> list[AlgebraElement]:
    mats = basis_matrices(group)
    eye = np.eye(len(mats))
    return [AlgebraElement(m.copy(), eye[i], group) for i, m in enumerate(mats)]


def to_coords(x, group: GroupSpec) -> np.ndarray:
    """Coordinates of ``x`` (or a stack of matrices) in the algebra basis.

    Read off the entries directly: for SL the ``H_i`` coefficient is the
    partial sum of the first ``i`` diagonal entries, the rest are the
    off-diagonal entries.  Exact for matrices of the algebra; for SL the
    trace part of a general matrix is discarded.
    """
    x = np.asarray(x, dtype=float)
    n = group.n
    if group.kind == "GLplus":
        return x.reshape(x.shape[:-2] + (n * n,))
    diag = np.diagonal(x, axis1=-2, axis2=-1)
    diag = diag - np.mean(diag, axis=-1, keepdims=True) if n > 2 else diag
    if n == 2:
        h = (0.5 * (x[..., 0, 0] - x[..., 1, 1]))[..., None]
    else:
        h = np.cumsum(diag, axis=-1)[..., :-1]
    rows, cols = _offdiag_index(n)
    return np.concatenate([h, x[..., rows, cols]], axis=-1)


def from_coords(c, group: GroupSpec) -> np.ndarray:
    return np.tensordot(np.asarray(c, dtype=float), basis_matrices(group), axes=(-1, 0))


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    if x.group != y.group:
        raise GroupMismatchError(f"cannot bracket elements of {x.group} and {y.group}")
    return AlgebraElement.from_matrix(x.matrix @ y.matrix - y.matrix @ x.matrix, x.group)


def ad_matrix(x, group: GroupSpec) -> np.ndarray:
    """Matrix of ``Y -> [X, Y]`` in basis coordinates."""
    x = x.matrix if isinstance(x, AlgebraElement) else np.asarray(x, dtype=float)
    b = basis_matrices(group)
    return to_coords(x @ b - b @ x, group).T


def adjoint_matrix(h, group: GroupSpec) -> np.ndarray:
    """Matrix of ``X -> h X h^-1`` in basis coordinates (columns are images of the basis)."""
    h = np.asarray(h, dtype=float)
    if h.shape != (group.n, group.n):
        raise ValueError(f"expected a {group.n}x{group.n} matrix, got {h.shape}")
    h_inv = matrix_inverse(h)
    b = basis_matrices(group)
    return to_coords(h @ b @ h_inv, group).T


def ambient_differential(h, n: int | None = None) -> np.ndarray:
    """The ``n^2 x n^2`` matrix of ``X -> h X h^-1`` on gl(n), row-major coordinates.

    For row-major vectorisation ``vec(A X B) = (A kron B^T) vec(X)``.
    """
    h = np.asarray(h, dtype=float)
    if n is not None and h.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {h.shape}")
    return np.kron(h, matrix_inverse(h).T)


def membership_residual(g, group: GroupSpec) -> float:
    """``|det g - 1|`` for SL; for GL+ zero when ``det g > 0`` and ``inf`` otherwise."""
    g = np.asarray(g, dtype=float)
    if g.shape != (group.n, group.n):
        raise ValueError(f"expected a {group.n}x{group.n} matrix, got {g.shape}")
    if not np.all(np.isfinite(g)):
        return float("inf")
    det = float(np.linalg.det(g))
    if group.kind == "SL":
        return abs(det - 1.0)
    return 0.0 if det > 0.0 else float("inf")


def group_membership(g, group: GroupSpec, tol: float = MEMBERSHIP_TOL) -> bool:
    return membership_residual(g, group) <= tol
