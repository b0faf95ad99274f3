"""Reachable sets: control Jacobians, regular pairs, interior certificates,
sampling and constructive checks of the solution identities."""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .lie import from_coords, to_coords
from .linalg import matrix_inverse, numerical_rank
from .system import (
    ControlBoxError,
    LinearSystem,
    as_controls,
    reversed_system,
    shift,
    solve,
)

RANK_TOL = 1e-8
IDENTITY_TOL = 1e-9
MAX_SAMPLES = 10**7
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50


class NotInteriorError(ValueError):
    pass


class CertificateNotFoundError(LookupError):
    def __init__(self, k_min: int, k_max: int):
        self.k_min, self.k_max = k_min, k_max
        super().__init__(f"no regular pair returning to e for k in [{k_min}, {k_max}] (inconclusive)")


class BudgetExceededError(ValueError):
    pass


def endpoint_with_derivative(sys: LinearSystem, g, u) -> tuple[np.ndarray, np.ndarray]:
    """``phi(k, g, u)`` and its partial derivatives in every control component.

    Derivatives are propagated exactly (dual numbers) through each step.
    The derivative array has shape ``(k * m, n, n)``; parameters are ordered
    step-major, ``(u_0[0], ..., u_0[m-1], u_1[0], ...)``.
    """
    m = sys.control_dim
    u = as_controls(u, m)
    k = len(u)
    state = np.asarray(g, dtype=float)
    n = state.shape[0]
    d_state = np.zeros((k * m, n, n))
    for j, row in enumerate(u):
        if not sys.box.contains(row):
            raise ControlBoxError(f"control {row.tolist()} outside the box")
        b, db = sys.control_matrix_dual(row)
        c = sys.drift(state)
        dc = sys.h @ d_state @ sys.h_inv
        d_state = b @ dc
        d_state[j * m:(j + 1) * m] += db @ c
        state = b @ c
    return state, d_state


def control_jacobian(sys: LinearSystem, g, u, frame: str = "algebra",
                     strict: bool = False) -> np.ndarray:
    """Jacobian of ``u -> phi(k, g, u)``.

    In the default ``"algebra"`` frame each variation is left-translated to
    the identity (``endpoint^-1 dG``) and expanded in the algebra basis,
    giving a ``dim G x (k m)`` matrix.  The ``"ambient"`` frame returns the
    raw ``n^2 x (k m)`` derivative of the matrix entries (row-major).
    """
    u = as_controls(u, sys.control_dim)
    if strict and not all(sys.box.strictly_contains(row) for row in u):
        raise NotInteriorError("controls must lie in the interior of the box")
    end, d_end = endpoint_with_derivative(sys, g, u)
    if frame == "ambient":
        return d_end.reshape(len(d_end), -1).T
    if frame != "algebra":
        raise ValueError(f"unknown frame {frame!r}")
    pulled = matrix_inverse(end) @ d_end
    return to_coords(pulled, sys.group).T


def is_regular_pair(sys: LinearSystem, g, u, tol_rank: float = RANK_TOL) -> bool:
    """Full rank of the control Jacobian at an interior control sequence."""
    jac = control_jacobian(sys, g, u, strict=True)
    return numerical_rank(jac, tol_rank) == sys.group.dim


@dataclass(frozen=True, eq=False)
class RegularityCertificate:
    k: int
    u_star: np.ndarray
    endpoint: np.ndarray
    jacobian: np.ndarray
    rank: int
    status: str = "rank-only"  # "verified" once the Newton covering check succeeds
    newton: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "u_star": self.u_star.tolist(),
            "endpoint": self.endpoint.tolist(),
            "jacobian": self.jacobian.tolist(),
            "rank": self.rank,
            "status": self.status,
            "newton": self.newton,
        }


def newton_reach(sys: LinearSystem, target, u0, tol: float = NEWTON_TOL,
                 maxiter: int = NEWTON_MAXITER) -> tuple[np.ndarray, float, bool]:
    """Find controls with ``phi(k, e, u) = target`` by Gauss-Newton from ``u0``.

    Steps solve ``J du = log(endpoint^-1 target)`` in the least-norm sense.
    Returns ``(u, residual, converged)`` with ``residual = ||endpoint - target||_F``.
    """
    m = sys.control_dim
    u = as_controls(u0, m).copy()
    e = np.eye(sys.group.n)
    target = np.asarray(target, dtype=float)
    residual = math.inf
    for _ in range(maxiter):
        end, d_end = endpoint_with_derivative(sys, e, u)
        residual = float(np.linalg.norm(end - target))
        if residual <= tol:
            return u, residual, True
        end_inv = matrix_inverse(end)
        jac = to_coords(end_inv @ d_end, sys.group).T
        err = to_coords(np.real(scipy.linalg.logm(end_inv @ target)), sys.group)
        du, *_ = np.linalg.lstsq(jac, err, rcond=None)
        u = u + du.reshape(u.shape)
        if not all(sys.box.contains(row) for row in u):
            return u, residual, False
    end, _ = endpoint_with_derivative(sys, e, u)
    residual = float(np.linalg.norm(end - target))
    return u, residual, residual <= tol


def verify_covering(sys: LinearSystem, cert: RegularityCertificate, targets: int = 50,
                    radius: float = 1e-4, seed: int = 0, tol: float = 1e-8) -> dict:
    """Reach seeded targets ``exp(X)``, ``|X| = radius``, from ``u_star`` by Newton."""
    rng = np.random.default_rng(seed)
    dim = sys.group.dim
    worst = 0.0
    reached = 0
    for _ in range(targets):
        x = rng.standard_normal(dim)
        x *= radius / np.linalg.norm(x)
        target = scipy.linalg.expm(from_coords(x, sys.group))
        _, res, ok = newton_reach(sys, target, cert.u_star)
        worst = max(worst, res)
        reached += ok and res <= tol
    return {"targets": targets, "radius": radius, "seed": seed, "reached": int(reached),
            "max_residual": worst}


def interior_certificate(sys: LinearSystem, k_min: int | None = None, k_max: int = 8,
                         tol_rank: float = RANK_TOL, verify: bool = True,
                         seed: int = 0) -> RegularityCertificate:
    """Search ``k = k_min..k_max`` for a regular pair ``(e, 0)``.

    Because ``b(0) = e`` the zero sequence returns exactly to ``e``, so a full
    rank Jacobian there certifies ``e`` in the interior of the reachable set.
    Raises :class:`CertificateNotFoundError` (inconclusive, not a disproof).
    """
    m = sys.control_dim
    dim = sys.group.dim
    lower = math.ceil(dim / m)
    if k_min is None:
        k_min = lower
    if k_min < lower:
        raise ValueError(f"k_min must be at least ceil(dim G / m) = {lower}")
    e = np.eye(sys.group.n)
    for k in range(k_min, k_max + 1):
        u_star = np.zeros((k, m))
        end, d_end = endpoint_with_derivative(sys, e, u_star)
        jac = to_coords(matrix_inverse(end) @ d_end, sys.group).T
        rank = numerical_rank(jac, tol_rank)
        if rank == dim:
            cert = RegularityCertificate(k, u_star, end, jac, rank)
            if not verify:
                return cert
            info = verify_covering(sys, cert, seed=seed)
            status = "verified" if info["reached"] == info["targets"] else "rank-only"
            return RegularityCertificate(k, u_star, end, jac, rank, status, info)
    raise CertificateNotFoundError(k_min, k_max)


@dataclass(frozen=True, eq=False)
class ReachSample:
    k: int
    points: np.ndarray  # (N, n, n)
    generators: np.ndarray  # (N, k, m)
    strategy: str
    seed: int

    def __len__(self) -> int:
        return len(self.points)


def _axis_points(lo: float, hi: float, q: int) -> list[float]:
    # q odd: 0 plus (q-1)/2 equispaced points on each side, ordered 0, -, +, --, ++, ...
    half = (q - 1) // 2
    neg = np.linspace(0.0, lo, half + 1)[1:]
    pos = np.linspace(0.0, hi, half + 1)[1:]
    out = [0.0]
    for a, b in zip(neg, pos):
        out += [float(a), float(b)]
    return out


def grid_generators(sys: LinearSystem, k: int, samples: int, points_per_axis: int | None = None) -> np.ndarray:
    """Lexicographic prefix of the product grid over the ``k * m`` control components.

    Per-axis values are 0 followed by alternating negative / positive
    equispaced points ending at the box bounds, so the all-zero sequence
    comes first.
    """
    m = sys.control_dim
    axes = k * m
    if points_per_axis is None:
        q = 3
        while q**axes < samples:
            q += 2
    else:
        q = points_per_axis if points_per_axis % 2 else points_per_axis + 1
    per_axis = [_axis_points(sys.box.lo[i % m], sys.box.hi[i % m], q) for i in range(axes)]
    combos = itertools.islice(itertools.product(*per_axis), samples)
    return np.array(list(combos), dtype=float).reshape(-1, k, m)


def mc_generators(sys: LinearSystem, k: int, samples: int, seed: int) -> np.ndarray:
    """Seeded uniform draws from the box; the first sequence is replaced by zeros."""
    rng = np.random.default_rng(seed)
    gens = sys.box.sample(rng, (samples, k))
    gens[0] = 0.0
    return gens


def _solve_chunk(sys: LinearSystem, k: int, gens: np.ndarray) -> np.ndarray:
    e = np.eye(sys.group.n)
    return np.array([solve(sys, k, e, u) for u in gens]).reshape(-1, sys.group.n, sys.group.n)


def sample_reachable(sys: LinearSystem, k: int, strategy: str = "monte-carlo", samples: int = 1000,
                     seed: int = 0, workers: int = 1, points_per_axis: int | None = None) -> ReachSample:
    """Sample ``R_k(e)``; output is identical for any number of workers."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if samples > MAX_SAMPLES:
        raise BudgetExceededError(f"refusing {samples} samples (limit {MAX_SAMPLES})")
    if k < 1:
        raise ValueError("horizon must be at least 1")
    if strategy == "grid":
        gens = grid_generators(sys, k, samples, points_per_axis)
    elif strategy in ("monte-carlo", "mc"):
        strategy = "monte-carlo"
        gens = mc_generators(sys, k, samples, seed)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if workers <= 1:
        points = _solve_chunk(sys, k, gens)
    else:
        chunks = np.array_split(gens, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _solve_chunk(sys, k, c), chunks))
        points = np.concatenate(parts)
    return ReachSample(k, points, gens, strategy, seed)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def to_csv(sample: ReachSample) -> str:
    """CSV with header ``k,seq,g11,...,gnn``; ``seq`` joins vectors with ``;``."""
    n = sample.points.shape[-1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "seq"] + [f"g{i + 1}{j + 1}" for i in range(n) for j in range(n)])
    for g, u in zip(sample.points, sample.generators):
        seq = ";".join(",".join(_fmt(x) for x in row) for row in u)
        writer.writerow([sample.k, seq] + [_fmt(x) for x in g.ravel()])
    return buf.getvalue()


@dataclass
class CheckReport:
    name: str
    max_residual: float
    tolerance: float
    samples: int
    seed: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "samples": self.samples, "seed": self.seed,
                "details": self.details}


def _controls(sys: LinearSystem, rng: np.random.Generator, samples: int, k: int) -> np.ndarray:
    gens = sys.box.sample(rng, (samples, k))
    gens[0] = 0.0
    return gens


def _random_element(sys: LinearSystem, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """``exp(X)`` for a seeded Gaussian algebra element ``X``."""
    x = scale * rng.standard_normal(sys.group.dim)
    return scipy.linalg.expm(from_coords(x, sys.group))


def _dist(a, b) -> float:
    """Entrywise residual normalised by the scale of ``a`` (absolute when ``|a| <= 1``)."""
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(a)))))


def translation_check(sys: LinearSystem, k: int, samples: int = 100, seed: int = 0,
                      tol: float = IDENTITY_TOL) -> CheckReport:
    """``phi(k, g, u) = phi(k, e, u) h^k g h^-k`` on random ``g = exp(X)`` and ``u``."""
    rng = np.random.default_rng(seed)
    n = sys.group.n
    e = np.eye(n)
    hk, hk_inv = sys.drift_power(k), sys.drift_power(-k)
    worst = 0.0
    for u in _controls(sys, rng, samples, k):
        g = _random_element(sys, rng)
        worst = max(worst, _dist(solve(sys, k, g, u), solve(sys, k, e, u) @ hk @ g @ hk_inv))
    return CheckReport("translation", worst, tol, samples, seed)


def cocycle_check(sys: LinearSystem, k: int, t: int, samples: int = 100, seed: int = 0,
                  tol: float = IDENTITY_TOL) -> CheckReport:
    """``phi(k + t, g, u) = phi(k, phi(t, g, u), Theta_t u)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u in _controls(sys, rng, samples, k + t):
        g = _random_element(sys, rng)
        lhs = solve(sys, k + t, g, u)
        rhs = solve(sys, k, solve(sys, t, g, u), shift(u, t))
        worst = max(worst, _dist(lhs, rhs))
    return CheckReport("cocycle", worst, tol, samples, seed, {"k": k, "t": t})


def semigroup_check(sys: LinearSystem, k1: int, k2: int, samples: int = 100, seed: int = 0,
                    tol: float = IDENTITY_TOL) -> CheckReport:
    """``R_{k1+k2} = R_{k1} f_0^{k1}(R_{k2})`` constructively.

    For sampled ``u`` (length k1) and ``v`` (length k2) the concatenation
    ``w = v + u`` satisfies ``phi(k1+k2, e, w) = phi(k1, e, u) h^k1 phi(k2, e, v) h^-k1``.
    Monotonicity ``R_{k1} in R_{k1+k2}`` is checked with zero padding in front.
    """
    if k1 < 1 or k2 < 1:
        raise ValueError("k1 and k2 must be at least 1")
    rng = np.random.default_rng(seed)
    m = sys.control_dim
    e = np.eye(sys.group.n)
    hk, hk_inv = sys.drift_power(k1), sys.drift_power(-k1)
    worst = worst_pad = 0.0
    us = _controls(sys, rng, samples, k1)
    vs = _controls(sys, rng, samples, k2)
    for u, v in zip(us, vs):
        w = np.concatenate([v, u])
        phi_u = solve(sys, k1, e, u)
        rhs = phi_u @ hk @ solve(sys, k2, e, v) @ hk_inv
        worst = max(worst, _dist(solve(sys, k1 + k2, e, w), rhs))
        padded = np.concatenate([np.zeros((k2, m)), u])
        worst_pad = max(worst_pad, _dist(solve(sys, k1 + k2, e, padded), phi_u))
    return CheckReport("semigroup", max(worst, worst_pad), tol, samples, seed,
                       {"k1": k1, "k2": k2, "concatenation": "v then u",
                        "semigroup_residual": worst, "monotonicity_residual": worst_pad})


def duality_check(sys: LinearSystem, k: int, samples: int = 200, seed: int = 0,
                  tol: float = IDENTITY_TOL) -> CheckReport:
    """Reversed-system duality ``phi*(k, e, reverse(u)) = h^-k phi(k, e, u)^-1 h^k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = np.random.default_rng(seed)
    rev = reversed_system(sys)
    e = np.eye(sys.group.n)
    hk, hk_inv = sys.drift_power(k), sys.drift_power(-k)
    worst = 0.0
    for u in _controls(sys, rng, samples, k):
        lhs = solve(rev, k, e, u[::-1])
        rhs = hk_inv @ matrix_inverse(solve(sys, k, e, u)) @ hk
        worst = max(worst, _dist(lhs, rhs))
    return CheckReport("duality", worst, tol, samples, seed,
                       {"k": k, "control_mapping": "sequence reversal"})
