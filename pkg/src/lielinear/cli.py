"""Command line front end.

Exit codes: 0 ok, 1 I/O or schema error, 2 check failed, 3 refused budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import descriptor
from .expr import EvaluationError
from .linalg import SingularMatrixError
from .reach import IDENTITY_TOL, BudgetExceededError, duality_check, sample_reachable, to_csv
from .system import ControlBoxError, MembershipError, SequenceTooShortError, as_controls, trajectory, validate
from .verdict import analyze, canonical_json, report_json

EXIT_OK, EXIT_IO, EXIT_CHECK, EXIT_REFUSED = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _emit(doc: dict) -> None:
    sys.stdout.write(canonical_json(doc) + "\n")


def _load(path: str):
    try:
        return descriptor.load(path)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc}") from exc
    except descriptor.DescriptorError as exc:
        raise _Fail(EXIT_IO, str(exc)) from exc


def _read_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_IO, f"{what} {path}: invalid JSON: {exc}") from exc


def cmd_validate(args) -> int:
    sysm = _load(args.descriptor)
    report = validate(sysm, samples=args.samples, seed=args.seed)
    _emit(report.to_dict())
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_analyze(args) -> int:
    sysm = _load(args.descriptor)
    v = analyze(sysm, k_max=args.k_max, tol_unimodular=args.tol_unimodular,
                tol_rank=args.tol_rank, seed=args.seed)
    sys.stdout.write(report_json(v) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    sysm = _load(args.descriptor)
    controls = _read_json(args.controls, "controls file")
    try:
        u = as_controls(np.array(controls, dtype=float).reshape(len(controls), -1), sysm.control_dim)
    except ValueError as exc:
        raise _Fail(EXIT_IO, f"bad controls: {exc}") from exc
    g0 = np.eye(sysm.group.n)
    if args.initial:
        g0 = np.array(_read_json(args.initial, "initial state"), dtype=float)
        if g0.shape != (sysm.group.n, sysm.group.n):
            raise _Fail(EXIT_IO, f"initial state must be {sysm.group.n}x{sysm.group.n}")
    try:
        states = trajectory(sysm, g0, u)
    except (ControlBoxError, MembershipError, EvaluationError, SingularMatrixError) as exc:
        raise _Fail(EXIT_CHECK, str(exc)) from exc
    sys.stdout.write(canonical_json([s.tolist() for s in states]) + "\n")
    return EXIT_OK


def cmd_reach(args) -> int:
    sysm = _load(args.descriptor)
    try:
        sample = sample_reachable(sysm, args.horizon, args.strategy, args.samples,
                                  seed=args.seed, workers=args.workers)
    except BudgetExceededError as exc:
        raise _Fail(EXIT_REFUSED, str(exc)) from exc
    text = to_csv(sample)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise _Fail(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stderr.write("no --out given; CSV written to stderr\n")
        sys.stderr.write(text)
    e = np.eye(sysm.group.n)
    has_identity = bool(np.any(np.all(np.abs(sample.points - e) <= IDENTITY_TOL, axis=(1, 2))))
    _emit({"horizon": sample.k, "strategy": sample.strategy, "samples": len(sample),
           "seed": sample.seed, "out": args.out, "contains_identity": has_identity})
    return EXIT_OK


def cmd_duality(args) -> int:
    sysm = _load(args.descriptor)
    try:
        report = duality_check(sysm, args.horizon, samples=args.samples, seed=args.seed)
    except SequenceTooShortError as exc:
        raise _Fail(EXIT_IO, str(exc)) from exc
    _emit(report.to_dict())
    return EXIT_OK if report.passed else EXIT_CHECK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 (input error); exit 2 is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("descriptor", help="system descriptor JSON file")
    shared.add_argument("--tol-rank", type=float, default=1e-8)
    shared.add_argument("--tol-unimodular", type=float, default=1e-6)
    shared.add_argument("--k-max", type=int, default=8)
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--json", action="store_true", help="JSON output (always on; kept for scripts)")

    parser = _Parser(prog="lielinear", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[shared], help="check a descriptor")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", parents=[shared], help="controllability verdict")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", parents=[shared], help="trajectory for a control sequence")
    p.add_argument("--controls", required=True, help="JSON array of control vectors")
    p.add_argument("--initial", help="JSON matrix for the initial state (default e)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reach", parents=[shared], help="sample the reachable set to CSV")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--strategy", choices=["grid", "mc", "monte-carlo"], default="mc")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("duality", parents=[shared], help="reversed-system duality check")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_duality)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except ValueError as exc:
        sys.stderr.write(f"error: invalid argument: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
