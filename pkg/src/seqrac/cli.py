"""Command-line entry point: every table and curve as CSV or JSON plot data.

Exit codes: 0 success, 2 usage / invalid input, 3 reference-table mismatch,
4 see-saw non-convergence.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import certify, qubit, seesaw
from .errors import NoConvergence, RegressionMismatch, SeqracError
from .game import classical_bruteforce, classical_optimal_fraction, classical_optimal_success
from .io import read_config, render

EXIT_USAGE = 2
EXIT_REGRESSION = 3
EXIT_NO_CONVERGENCE = 4

CLASSICAL_FIELDS = ("d", "model", "formula", "bruteforce", "barun", "chhanda", "match", "oracle")
BOUNDARY_FIELDS = ("eta", "p_ab", "p_ac", "boundary", "classical_ab", "classical_joint")
AUDIT_FIELDS = ("n_samples", "n_accepted", "seed", "max_violation", "worst_sample", "passed")
SWEEP_ETA_FIELDS = certify.REPORT_FIELDS + ("defined",)
SEESAW_FIELDS = ("d", "eta", "p_ab", "p_ac", "p_joint", "iterations", "converged",
                 "best_restart", "restarts", "restarts_converged", "seed")
DIMSWEEP_FIELDS = seesaw.SWEEP_FIELDS + ("exceeds_classical",)


def _emit(args, rows, fields):
    text = render(rows, fields, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _workers(args) -> int:
    return max(1, int(args.threads))


def cmd_classical(args):
    d = args.d
    if d < 2 or d > 6:
        raise argparse.ArgumentTypeError("--d must be in 2..6")
    rows = []
    models = ("standard", "relay") if args.relay else ("standard",)
    for model in models:
        row = {"d": d, "model": model, "formula": classical_optimal_success(d) if model == "standard" else None}
        if d <= 3:
            opt = classical_bruteforce(d, relay=model == "relay")
            row.update(bruteforce=float(opt.joint), barun=float(opt.barun), chhanda=float(opt.chhanda),
                       oracle="ran")
            if model == "standard":
                row["match"] = opt.joint == classical_optimal_fraction(d)
        else:
            row["oracle"] = "skipped"
        rows.append(row)
    _emit(args, rows, CLASSICAL_FIELDS)


def cmd_boundary(args):
    if args.steps < 2:
        raise argparse.ArgumentTypeError("--steps must be >= 2")
    rows = []
    for pt in qubit.tradeoff_curve(args.steps):
        rows.append({
            "eta": pt.eta, "p_ab": pt.p_ab, "p_ac": pt.p_ac,
            "boundary": qubit.boundary_pac(pt.p_ab),
            "classical_ab": 0.75, "classical_joint": classical_optimal_success(2),
        })
    _emit(args, rows, BOUNDARY_FIELDS)


def cmd_audit(args):
    if args.n < 1:
        raise argparse.ArgumentTypeError("--n must be >= 1")
    res = qubit.boundary_audit(args.n, args.seed, workers=_workers(args))
    row = {"n_samples": res.n_samples, "n_accepted": res.n_accepted, "seed": args.seed,
           "max_violation": res.max_violation, "worst_sample": res.worst_sample,
           "passed": res.max_violation <= 1e-9}
    _emit(args, [row], AUDIT_FIELDS)


def cmd_certify(args):
    noise = certify.NoiseParams(args.p1, args.p2, args.p3)
    _emit(args, [certify.report_row(noise, args.eta)], certify.REPORT_FIELDS)


def cmd_table1(args):
    try:
        rows = certify.table1_report()
    except RegressionMismatch:
        _emit(args, certify.table1_report(check=False), certify.REPORT_FIELDS)
        raise
    _emit(args, rows, certify.REPORT_FIELDS)


def cmd_sweep_eta(args):
    if args.steps < 2:
        raise argparse.ArgumentTypeError("--steps must be >= 2")
    noise = certify.NoiseParams(args.p1, args.p2, args.p3)
    grid = np.linspace(args.eta_min, args.eta_max, args.steps)
    rows = []
    for pt in certify.target_sweep(noise, grid):
        obs = certify.noisy_pipeline(noise, pt.eta_target)
        rows.append({
            "p1": noise.p1, "p2": noise.p2, "p3": noise.p3, "eta_target": pt.eta_target,
            "p_ab": obs.p_ab_obs, "p_ac": obs.p_ac_obs,
            "eta_lower": pt.eta_lower, "eta_upper": pt.eta_upper, "delta": pt.delta,
            "delta_star_fixture": None, "defined": pt.defined,
        })
    _emit(args, rows, SWEEP_ETA_FIELDS)


def _parse_eta(text: str, d: int) -> float:
    if text == "critical":
        return seesaw.eta_critical(d)
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eta must be a number or 'critical', got {text!r}") from None


def cmd_seesaw(args):
    eta = _parse_eta(args.eta, args.d)
    cfg = seesaw.SeesawConfig(args.d, eta, args.restarts, args.max_iters, args.tol, args.seed)
    res = seesaw.seesaw_run(cfg, workers=_workers(args))
    row = {"d": args.d, "eta": eta, "p_ab": res.p_ab, "p_ac": res.p_ac, "p_joint": res.p_joint,
           "iterations": res.iterations, "converged": res.converged, "best_restart": res.best_restart,
           "restarts": args.restarts, "restarts_converged": res.restarts_converged, "seed": args.seed}
    _emit(args, [row], SEESAW_FIELDS)
    if not res.converged:
        raise NoConvergence("no see-saw restart converged", res)


def cmd_dimsweep(args):
    if not 2 <= args.dmin <= args.dmax <= 6:
        raise argparse.ArgumentTypeError("need 2 <= --dmin <= --dmax <= 6")
    rows = seesaw.dimension_sweep(range(args.dmin, args.dmax + 1), restarts=args.restarts, tol=args.tol,
                                  seed=args.seed, max_iters=args.max_iters, workers=_workers(args))
    for row in rows:
        row["exceeds_classical"] = (None if row["mode"] == "classical"
                                    else row["p_total"] > classical_optimal_success(row["d"]))
    _emit(args, rows, DIMSWEEP_FIELDS)
    if not all(r["converged"] for r in rows):
        raise NoConvergence("a see-saw job did not converge")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write to this path instead of stdout")
    common.add_argument("--threads", type=int, default=int(os.environ.get("SEQRAC_THREADS", "1")))
    common.add_argument("--config", default=None, help="key=value file; explicit flags win")

    parser = argparse.ArgumentParser(prog="seqrac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical", parents=[common], help="classical optimum and brute-force oracle")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--relay", action="store_true", help="also score the relayed-dit variant")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("boundary", parents=[common], help="qubit trade-off curve against the boundary")
    p.add_argument("--steps", type=int, default=101)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("audit", parents=[common], help="random falsification search of the boundary")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_audit)

    def visibilities(p):
        p.add_argument("--p1", type=float, required=True)
        p.add_argument("--p2", type=float, required=True)
        p.add_argument("--p3", type=float, required=True)

    p = sub.add_parser("certify", parents=[common], help="sharpness bounds for one noisy configuration")
    visibilities(p)
    p.add_argument("--eta", type=float, required=True, help="target sharpness")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("table1", parents=[common], help="recompute the noisy reference table")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("sweep-eta", parents=[common], help="bound gap versus target sharpness")
    visibilities(p)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--eta-min", type=float, default=0.0)
    p.add_argument("--eta-max", type=float, default=1.0)
    p.set_defaults(func=cmd_sweep_eta)

    def seesaw_opts(p):
        p.add_argument("--restarts", type=int, default=seesaw.C.SEESAW_RESTARTS)
        p.add_argument("--tol", type=float, default=seesaw.C.SEESAW_TOL)
        p.add_argument("--max-iters", type=int, default=seesaw.C.SEESAW_MAX_ITERS)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("seesaw", parents=[common], help="see-saw lower bound for one (d, eta)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eta", default="critical", help="number in [0, 1] or 'critical'")
    seesaw_opts(p)
    p.set_defaults(func=cmd_seesaw)

    p = sub.add_parser("dimsweep", parents=[common], help="classical / eta_c / sharp rows per dimension")
    p.add_argument("--dmin", type=int, default=2)
    p.add_argument("--dmax", type=int, default=6)
    seesaw_opts(p)
    p.set_defaults(func=cmd_dimsweep)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if known.config and known.command in subparsers:
        try:
            values = read_config(known.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        subparser = subparsers[known.command]
        dests = {a.dest for a in subparser._actions}
        unknown = sorted(set(values) - dests)
        if unknown:
            parser.error(f"unknown config keys for {known.command}: {', '.join(unknown)}")
        for action in subparser._actions:
            if action.dest in values:
                action.required = False
        subparser.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    try:
        args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"seqrac {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegressionMismatch as exc:
        print(f"seqrac {args.command}: regression mismatch: {exc}", file=sys.stderr)
        return EXIT_REGRESSION
    except NoConvergence as exc:
        print(f"seqrac {args.command}: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (SeqracError, ValueError) as exc:
        print(f"seqrac {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
