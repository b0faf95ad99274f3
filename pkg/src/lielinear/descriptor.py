"""On-disk JSON form of a system, bundled fixtures and random test systems."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .expr import ExprError
from .lie import GroupSpec
from .system import SystemSpec

FIXTURES = ("sl2_unipotent", "sl2_trig_printed", "sl2_trig_corrected", "sl2_hyperbolic")


class DescriptorError(ValueError):
    pass


def _data(name: str):
    return resources.files("lielinear").joinpath("data").joinpath(name)


def load_schema(name: str) -> dict:
    return json.loads(_data(f"{name}.schema.json").read_text())


def from_dict(doc: dict, name: str = "") -> SystemSpec:
    try:
        jsonschema.validate(doc, load_schema("descriptor"))
    except jsonschema.ValidationError as exc:
        raise DescriptorError(f"descriptor does not match schema: {exc.message}") from exc
    try:
        group = GroupSpec(doc["group"]["kind"], doc["group"]["n"])
    except ValueError as exc:
        raise DescriptorError(str(exc)) from exc
    m = doc["control_dim"]
    lo, hi = doc["control_box"]["lo"], doc["control_box"]["hi"]
    if len(lo) != m or len(hi) != m:
        raise DescriptorError(f"control_box bounds must have length control_dim = {m}")
    h = np.array(doc["automorphism"]["h"], dtype=float)
    n = group.n
    if h.shape != (n, n):
        raise DescriptorError(f"h must be {n}x{n}")
    entries = doc["b_entries"]
    if len(entries) != n or any(len(row) != n for row in entries):
        raise DescriptorError(f"b_entries must be an {n}x{n} grid")
    try:
        return SystemSpec.from_strings(group, h, entries, lo, hi, name=doc.get("name", name))
    except ExprError as exc:
        raise DescriptorError(f"bad b_entries expression: {exc}") from exc
    except ValueError as exc:
        raise DescriptorError(str(exc)) from exc


def load(path) -> SystemSpec:
    """Read a descriptor file. I/O problems raise ``OSError``; malformed content ``DescriptorError``."""
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"{path}: invalid JSON: {exc}") from exc
    return from_dict(doc, name=path.stem)


def to_dict(sys: SystemSpec) -> dict:
    return {
        "group": {"kind": sys.group.kind, "n": sys.group.n},
        "automorphism": {"kind": "conjugation", "h": sys.h.tolist()},
        "control_dim": sys.control_dim,
        "control_box": {"lo": sys.box.lo.tolist(), "hi": sys.box.hi.tolist()},
        "b_entries": sys.b_sources,
    }


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    return Path(str(_data(f"{name}.json")))


def fixture(name: str) -> SystemSpec:
    return load(fixture_path(name))


def _fmt(x: float) -> str:
    return repr(float(x))


def random_sl2_system(rng: np.random.Generator, m: int | None = None) -> SystemSpec:
    """A random valid linear system on SL(2).

    ``b(u) = P T(u) P^-1`` with ``P`` a random well-conditioned SL(2) matrix and ``T(u)`` a
    product of one-parameter subgroups (shears, rotations, diagonal scalings)
    driven by random linear forms of the controls.  ``h`` is a random
    invertible 2x2 matrix with condition number below 4, which keeps
    states over short horizons at moderate scale.
    """
    if m is None:
        m = int(rng.integers(1, 4))
    while True:
        h = rng.normal(size=(2, 2))
        if abs(np.linalg.det(h)) > 0.2 and np.linalg.cond(h) < 4:
            break
    while True:
        p = rng.normal(size=(2, 2))
        if np.linalg.cond(p) < 4:
            break
    if np.linalg.det(p) < 0:
        p[:, 0] *= -1
    p /= np.sqrt(np.linalg.det(p))
    p_inv = np.linalg.inv(p)

    factors = []
    for _ in range(int(rng.integers(2, 4))):
        coeffs = 0.5 * rng.normal(size=m)
        lin = " + ".join(f"{_fmt(c)}*u{i + 1}" for i, c in enumerate(coeffs))
        t = f"({lin})"
        kind = rng.choice(["upper", "lower", "rot", "diag"])
        if kind == "upper":
            factors.append([["1", t], ["0", "1"]])
        elif kind == "lower":
            factors.append([["1", "0"], [t, "1"]])
        elif kind == "rot":
            factors.append([[f"cos{t}", f"sin{t}"], [f"-sin{t}", f"cos{t}"]])
        else:
            factors.append([[f"exp{t}", "0"], ["0", f"exp(-{t})"]])

    def mul(a, b):
        return [[" + ".join(f"({a[i][k]})*({b[k][j]})" for k in range(2)) for j in range(2)] for i in range(2)]

    def const(x):
        return [[_fmt(v) for v in row] for row in x]

    t_mat = factors[0]
    for f in factors[1:]:
        t_mat = mul(t_mat, f)
    entries = mul(mul(const(p), t_mat), const(p_inv))
    lo = -rng.uniform(0.2, 1.0, size=m)
    hi = rng.uniform(0.2, 1.0, size=m)
    return SystemSpec.from_strings(GroupSpec("SL", 2), h, entries, lo, hi, name="random")
