"""Command-line front end.

Usage::

    hybrid-bracket check-identities --seed 42 --trials 200 --tolerance 1e-12
    hybrid-bracket evolve --observable A.json --hamiltonian H.json --order 4 --t 0.5
    hybrid-bracket scenario-spin --c 1 --t 2 --x0 0 --epsilon 0.5
    hybrid-bracket scenario-momentum --c 0 --t 5
    hybrid-bracket canonical-scan --hamiltonian H.json --order 3

Exit status: 0 on success, 1 on bad input, 2 when an identity sweep exceeds
the tolerance. ``HYBRID_BRACKET_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algebra import SWEEPS, DimensionMismatch, HybridObservable, generators, sweep_identity
from .dynamics import canonical_scan, evaluate_trajectory, taylor_evolve
from .oracle import MomentumCouplingParams, compare_with_quasiclassical
from .states import bin_branches, branch_decompose, spin_state

log = logging.getLogger("hybrid_bracket")

SEED_ENV = "HYBRID_BRACKET_SEED"


class InputError(Exception):
    """Bad configuration or input file; maps to exit status 1."""


def load_observable(path) -> HybridObservable:
    """Read an observable from the shared JSON format."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    try:
        return HybridObservable.from_dict(data)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_observable(A: HybridObservable, path) -> None:
    Path(path).write_text(json.dumps(A.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# commands; each returns (report dict, csv rows, exit status)


def cmd_check_identities(args):
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    if args.degree < 1:
        raise InputError("--degree must be >= 1")
    names = args.identity or sorted(SWEEPS)
    rows, failed = [], False
    for name in names:
        if name not in SWEEPS:
            raise InputError(f"unknown identity {name!r}")
        rep = sweep_identity(name, args.trials, args.seed, args.dims, args.degree, args.hbar)
        ok = rep.max_abs_residual <= args.tolerance
        failed |= not ok
        rows.append({**rep.to_dict(), "passed": ok})
        log.info("%-32s max residual %.3e %s", name, rep.max_abs_residual, "ok" if ok else "FAIL")
    report = {
        "command": "check-identities",
        "seed": args.seed,
        "trials": args.trials,
        "tolerance": args.tolerance,
        "identities": rows,
        "passed": not failed,
    }
    return report, rows, 2 if failed else 0


def cmd_evolve(args):
    A = load_observable(args.observable)
    H = load_observable(args.hamiltonian)
    if A.dim != H.dim:
        raise InputError(f"dimension mismatch: observable dim {A.dim}, Hamiltonian dim {H.dim}")
    sol = taylor_evolve(A, H, args.order)
    report = {"command": "evolve", **sol.to_dict()}
    rows = [
        {"n": n, "a": a, "b": b, "norm": float(np.linalg.norm(m))}
        for n, c in enumerate(sol.coefficients)
        for (a, b), m in c.terms.items()
    ]
    if args.t is not None:
        traj = evaluate_trajectory(sol, args.t)
        report["t"] = args.t
        report["value"] = traj.value.to_dict()
        report["remainder_bound"] = traj.remainder_bound
    return report, rows, 0


def cmd_scenario_spin(args):
    if args.epsilon < 0:
        raise InputError("--epsilon must be >= 0")
    x, k, sz = (generators(n, 2, args.hbar) for n in ("x", "k", "pauli_z"))
    H = k * sz * args.c
    sol = taylor_evolve(x, H, args.order)
    x_t = evaluate_trajectory(sol, args.t).value
    raw = branch_decompose(x_t, spin_state(args.spin), (args.x0, args.k0))
    binned = bin_branches(raw, args.epsilon)
    report = {
        "command": "scenario-spin",
        "c": args.c,
        "t": args.t,
        "x0": args.x0,
        "k0": args.k0,
        "terminated_early": sol.terminated_early,
        "branches": raw.to_dict()["branches"],
        "binned": binned.to_dict(),
        "resolved": len(binned.branches) > 1,
    }
    rows = [
        {"kind": kind, "value": b.value, "prob": b.prob}
        for kind, bs in (("branch", raw), ("bin", binned))
        for b in bs.branches
    ]
    return report, rows, 0


def cmd_scenario_momentum(args):
    norm = (abs(args.amp_plus) ** 2 + abs(args.amp_minus) ** 2) ** 0.5
    if norm == 0:
        raise InputError("amplitudes cannot both be zero")
    try:
        params = MomentumCouplingParams(
            c=args.c,
            p_bar=args.p_bar,
            x0=args.x0,
            width=args.width,
            hbar=args.hbar,
            amplitudes=(args.amp_plus / norm, args.amp_minus / norm),
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    cmp = compare_with_quasiclassical(params, args.t)
    report = {"command": "scenario-momentum", **cmp.to_dict()}
    rows = [{"t": cmp.t, **b} for b in report["branches"]]
    return report, rows, 0


def cmd_canonical_scan(args):
    H = load_observable(args.hamiltonian)
    if H.dim < 2:
        raise InputError("canonical-scan needs a Hamiltonian with dim >= 2")
    rep = canonical_scan(H, args.order)
    report = {"command": "canonical-scan", **rep.to_dict()}
    rows = [
        {"pair": name, "order": n, "residual": r}
        for name, vals in rep.residuals.items()
        for n, r in enumerate(vals)
    ]
    return report, rows, 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-bracket",
        description="Hybrid quasiclassical-quantum brackets, evolution and scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", "-o", help="report file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--hbar", type=float, default=1.0)
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = common(sub.add_parser("check-identities", help="randomized bracket identity sweeps"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--degree", type=int, default=2, help="max polynomial degree")
    p.add_argument("--dims", type=int, nargs="+", default=[2, 3])
    p.add_argument("--identity", action="append", help="restrict to named identities")
    p.set_defaults(func=cmd_check_identities)

    p = common(sub.add_parser("evolve", help="Taylor-evolve an observable"))
    p.add_argument("--observable", required=True)
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--t", type=float, default=None)
    p.set_defaults(func=cmd_evolve)

    p = common(sub.add_parser("scenario-spin", help="spin coupled through c k sigma_z"))
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--k0", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--spin", default="+x")
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_scenario_spin)

    p = common(sub.add_parser("scenario-momentum", help="momentum-momentum coupling comparison"))
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--p-bar", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--amp-plus", type=complex, default=1.0)
    p.add_argument("--amp-minus", type=complex, default=1.0)
    p.set_defaults(func=cmd_scenario_momentum)

    p = common(sub.add_parser("canonical-scan", help="per-order canonical bracket residuals"))
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_canonical_scan)
    return parser


def _validate(args) -> None:
    env = os.environ.get(SEED_ENV)
    if env is not None and hasattr(args, "seed"):
        try:
            args.seed = int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV}={env!r} is not an integer") from None
    if getattr(args, "tolerance", 1.0) <= 0:
        raise InputError("--tolerance must be > 0")
    if getattr(args, "order", 0) < 0:
        raise InputError("--order must be >= 0")
    if args.command == "canonical-scan" and args.order < 1:
        raise InputError("--order must be >= 1 for canonical-scan")
    if not args.hbar > 0:
        raise InputError("--hbar must be > 0")


def render(report: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        _validate(args)
        report, rows, status = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DimensionMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render(report, rows, args.format)
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
