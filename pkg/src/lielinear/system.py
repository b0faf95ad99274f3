"""Discrete-time linear control systems ``x_{k+1} = b(u_k) h x_k h^-1``.

A system is given by its group, the conjugator ``h`` of the drift
automorphism ``f_0 = C_h`` and the control map ``b(u) = f_u(e)``.
Control sequences are arrays of shape ``(k, m)``; row 0 is applied first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .expr import Expr, EvaluationError, compile_grid, evaluate_dual, parse_expression, to_source
from .lie import GroupSpec, group_membership, membership_residual
from .linalg import SingularMatrixError, matrix_inverse

IDENTITY_TOL = 1e-9
STEP_MEMBERSHIP_TOL = 1e-6


class ControlBoxError(ValueError):
    pass


class MembershipError(ArithmeticError):
    pass


class SequenceTooShortError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ControlBox:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be vectors of equal length")
        if not (np.all(lo < 0.0) and np.all(hi > 0.0)):
            raise ValueError("control box must contain 0 in its interior (lo < 0 < hi)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.lo) and np.all(u <= self.hi))

    def strictly_contains(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u > self.lo) and np.all(u < self.hi))

    def sample(self, rng: np.random.Generator, shape=()) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=tuple(shape) + (self.dim,))


def as_controls(u, m: int) -> np.ndarray:
    """Normalise a control sequence to shape ``(k, m)``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1 and m == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[1] != m:
        raise ValueError(f"control sequence must have shape (k, {m}), got {u.shape}")
    return u


class LinearSystem:
    """Common interface: ``group``, ``h``, ``box`` and the control map."""

    group: GroupSpec
    box: ControlBox

    @property
    def h(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def h_inv(self) -> np.ndarray:
        return matrix_inverse(self.h)

    @property
    def control_dim(self) -> int:
        return self.box.dim

    def control_matrix(self, u) -> np.ndarray:
        raise NotImplementedError

    def control_matrix_dual(self, u) -> tuple[np.ndarray, np.ndarray]:
        """``b(u)`` and its derivatives, shape ``(m, n, n)``."""
        raise NotImplementedError

    def drift(self, g) -> np.ndarray:
        return self.h @ g @ self.h_inv

    def drift_power(self, k: int) -> np.ndarray:
        base = self.h if k >= 0 else self.h_inv
        return np.linalg.matrix_power(base, abs(k))


@dataclass(frozen=True, eq=False)
class SystemSpec(LinearSystem):
    group: GroupSpec
    conjugator: np.ndarray
    b_entries: tuple[tuple[Expr, ...], ...]
    box: ControlBox
    name: str = field(default="", compare=False)

    def __post_init__(self):
        h = np.asarray(self.conjugator, dtype=float)
        n = self.group.n
        if h.shape != (n, n):
            raise ValueError(f"conjugator must be {n}x{n}, got {h.shape}")
        if len(self.b_entries) != n or any(len(row) != n for row in self.b_entries):
            raise ValueError(f"b_entries must be an {n}x{n} grid")
        object.__setattr__(self, "conjugator", h)
        object.__setattr__(self, "b_entries", tuple(tuple(row) for row in self.b_entries))

    @classmethod
    def from_strings(cls, group: GroupSpec, h, entries, lo, hi, name: str = "") -> "SystemSpec":
        box = ControlBox(lo, hi)
        parsed = tuple(tuple(parse_expression(s, box.dim) for s in row) for row in entries)
        return cls(group, h, parsed, box, name=name)

    @property
    def h(self) -> np.ndarray:
        return self.conjugator

    @property
    def b_sources(self) -> list[list[str]]:
        return [[to_source(e) for e in row] for row in self.b_entries]

    def with_conjugator(self, h) -> "SystemSpec":
        return SystemSpec(self.group, h, self.b_entries, self.box, name=self.name)

    @cached_property
    def _compiled(self):
        return compile_grid(self.b_entries)

    def control_matrix(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.shape != (self.control_dim,):
            raise ValueError(f"control must have length {self.control_dim}, got shape {u.shape}")
        return np.array(self._compiled(u.tolist()))

    def control_matrix_dual(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        n, m = self.group.n, self.control_dim
        value = np.empty((n, n))
        deriv = np.empty((m, n, n))
        for i, row in enumerate(self.b_entries):
            for j, e in enumerate(row):
                d = evaluate_dual(e, u)
                value[i, j] = d.value
                deriv[:, i, j] = d.derivative
        return value, deriv


@dataclass(frozen=True, eq=False)
class ReversedSystem(LinearSystem):
    """The system ``g -> f_u^{-1}(e) f_0^{-1}(g)``, i.e. drift ``C_{h^-1}`` and
    control map ``h^-1 b(u)^-1 h``."""

    original: LinearSystem

    @property
    def group(self) -> GroupSpec:
        return self.original.group

    @property
    def box(self) -> ControlBox:
        return self.original.box

    @property
    def h(self) -> np.ndarray:
        return self.original.h_inv

    @cached_property
    def h_inv(self) -> np.ndarray:
        return self.original.h

    def control_matrix(self, u) -> np.ndarray:
        b = self.original.control_matrix(u)
        return self.h @ matrix_inverse(b) @ self.h_inv

    def control_matrix_dual(self, u):
        b, db = self.original.control_matrix_dual(u)
        b_inv = matrix_inverse(b)
        # d(b^-1) = -b^-1 db b^-1
        value = self.h @ b_inv @ self.h_inv
        deriv = -self.h @ b_inv @ db @ b_inv @ self.h_inv
        return value, deriv


def reversed_system(sys: LinearSystem) -> ReversedSystem:
    return ReversedSystem(sys)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "detail": self.detail}


@dataclass
class ValidationReport:
    checks: list[CheckResult]
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
        }


def validate(sys: LinearSystem, samples: int = 100, seed: int = 0,
             tol: float = IDENTITY_TOL) -> ValidationReport:
    """Check ``b(0) = e``, membership of ``b(u)`` on seeded samples and invertibility of ``h``."""
    checks = []
    n = sys.group.n
    try:
        b0 = sys.control_matrix(np.zeros(sys.control_dim))
        dev = float(np.max(np.abs(b0 - np.eye(n))))
        detail = "" if dev <= tol else f"b(0) != e: b(0) = {b0.tolist()}, max deviation {dev:.17g}"
        checks.append(CheckResult("identity_at_zero", dev <= tol, dev, detail))
    except EvaluationError as exc:
        checks.append(CheckResult("identity_at_zero", False, float("inf"), f"b(0) not evaluable: {exc}"))

    rng = np.random.default_rng(seed)
    us = sys.box.sample(rng, (samples,))
    worst, worst_u, detail = 0.0, None, ""
    for u in us:
        try:
            r = membership_residual(sys.control_matrix(u), sys.group)
        except (EvaluationError, SingularMatrixError) as exc:
            r, detail = float("inf"), f"b(u) not evaluable at u = {u.tolist()}: {exc}"
        if r > worst or worst_u is None:
            worst, worst_u = r, u
    ok = worst <= tol
    if not ok and not detail:
        detail = f"b(u) leaves {sys.group.kind}({n}) at u = {worst_u.tolist()}, residual {worst:.17g}"
    checks.append(CheckResult("membership", ok, worst, detail))

    # reciprocal condition number: scale-free, so h and c*h report alike
    sv = np.linalg.svd(sys.h, compute_uv=False)
    rcond = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    try:
        matrix_inverse(sys.h)
        checks.append(CheckResult("conjugator_invertible", True, rcond))
    except SingularMatrixError as exc:
        checks.append(CheckResult("conjugator_invertible", False, rcond, str(exc)))
    return ValidationReport(checks, samples, seed)


def _check_control(sys: LinearSystem, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (sys.control_dim,):
        raise ValueError(f"control must have length {sys.control_dim}, got shape {u.shape}")
    if not sys.box.contains(u):
        raise ControlBoxError(f"control {u.tolist()} outside the box [{sys.box.lo.tolist()}, {sys.box.hi.tolist()}]")
    return u


def _check_membership(sys: LinearSystem, g: np.ndarray) -> np.ndarray:
    r = membership_residual(g, sys.group)
    if r > STEP_MEMBERSHIP_TOL:
        raise MembershipError(f"state left the group (residual {r:.3e}); the system is ill-posed")
    return g


def step(sys: LinearSystem, g, u) -> np.ndarray:
    """``f_u(g) = b(u) h g h^-1``."""
    u = _check_control(sys, u)
    g = np.asarray(g, dtype=float)
    return _check_membership(sys, sys.control_matrix(u) @ sys.drift(g))


def step_inverse(sys: LinearSystem, g, u) -> np.ndarray:
    """``f_u^{-1}(g) = h^-1 b(u)^-1 g h``."""
    u = _check_control(sys, u)
    g = np.asarray(g, dtype=float)
    b_inv = matrix_inverse(sys.control_matrix(u))
    return _check_membership(sys, sys.h_inv @ b_inv @ g @ sys.h)


def solve(sys: LinearSystem, k: int, g, u) -> np.ndarray:
    """Solution ``phi(k, g, u)`` for any integer ``k``.

    For ``k > 0`` the rows ``u[0], ..., u[k-1]`` are applied in order.
    For ``k < 0`` row ``j`` of ``u`` stands for the control at time ``k + j``,
    i.e. ``u`` lists ``u_k, ..., u_{-1}``; the inverse maps are applied from
    ``u_{-1}`` down to ``u_k``.  With this convention
    ``solve(-k, solve(k, g, u), u) == g``.
    """
    g = np.asarray(g, dtype=float)
    if k == 0:
        return g.copy()
    u = as_controls(u, sys.control_dim)
    if abs(k) > len(u):
        raise SequenceTooShortError(f"|k| = {abs(k)} exceeds the {len(u)} available controls")
    if k > 0:
        for j in range(k):
            g = step(sys, g, u[j])
        return g
    for j in range(-k - 1, -1, -1):
        g = step_inverse(sys, g, u[j])
    return g


def trajectory(sys: LinearSystem, g, u) -> np.ndarray:
    """All states ``x_0, ..., x_k`` along a forward solution, shape ``(k + 1, n, n)``."""
    u = as_controls(u, sys.control_dim)
    states = [np.asarray(g, dtype=float)]
    for row in u:
        states.append(step(sys, states[-1], row))
    return np.array(states)


def shift(u, t: int) -> np.ndarray:
    """The shifted window ``Theta_t(u)`` for ``t >= 0``."""
    return np.asarray(u)[t:]


def is_valid_state(sys: LinearSystem, g, tol: float = 1e-7) -> bool:
    return group_membership(g, sys.group, tol)
