"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, convex, factorize, werner
from .suites import SUITES, Check, ReportDocument, Settings, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return np.linspace(start, start + (count - 1) * step, count)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected start:stop:step or a comma list") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="slack floor for inequality checks")
    common.add_argument("--seed", type=int, default=42, help="seed for randomized checks")
    common.add_argument("--json", metavar="PATH", help="write the report document here")
    common.add_argument("--mc-samples", type=int, default=20000, help="Haar samples per Monte Carlo check")

    p = _Parser(prog="qbirkhoff", description="Check mixed-unitary and factorizable channel certificates.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="run a check battery")
    v.add_argument("suite", choices=("all",) + SUITES)

    c = sub.add_parser("certify", parents=[common], help="certify T_lambda^(x)power is mixed-unitary")
    c.add_argument("lam", type=float, metavar="lambda")
    c.add_argument("power", type=int, choices=(2, 3))

    d = sub.add_parser("distance", parents=[common], help="closed-form cb distances")
    d.add_argument("target", choices=("w3minus-mixedunitary", "wnminus-mixedunitary", "w3minus-factorizable"))
    d.add_argument("n", type=int, nargs="?")

    e = sub.add_parser("export", parents=[common], help="write CSV data")
    e.add_argument("what", choices=("curves", "path"))
    e.add_argument("grid", help="start:stop:step or comma list")
    e.add_argument("out", help="output CSV path")
    return p


def _emit(report: ReportDocument, args, stream) -> int:
    for c in report.checks:
        op = "<=" if c.comparison == "le" else ">="
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.id:<28} {c.value:.6g} {op} {c.tolerance:g}  {c.description}",
              file=stream)
    print(f"{report.suite}: {'PASS' if report.passed else 'FAIL'} "
          f"({sum(c.passed for c in report.checks)}/{len(report.checks)})", file=stream)
    if args.json:
        Path(args.json).write_text(report.dumps() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args, stream) -> int:
    settings = Settings(tol=args.tol, seed=args.seed, mc_samples=args.mc_samples)
    return _emit(run_suite(args.suite, settings), args, stream)


def cmd_certify(args, stream) -> int:
    if not 0 <= args.lam <= 1:
        raise UsageError(f"lambda must lie in [0, 1], got {args.lam}")
    start = time.perf_counter()
    cert = convex.certify_tensor_membership(args.lam, args.power)
    checks = [
        Check.make("min_weight", f"smallest weight ({cert.route} route)", cert.min_weight, -1e-10, "ge"),
        Check.make("reconstruction", f"||sum w_i X_i - T_lambda^(x){args.power}||", cert.reconstruction_residual, 1e-9),
    ]
    report = ReportDocument(f"certify {args.lam:g} {args.power}", tuple(checks), args.seed,
                            elapsed_ms=int((time.perf_counter() - start) * 1000),
                            extra={"certificate": cert.to_json()})
    print(json.dumps(cert.to_json(), indent=2), file=stream)
    return _emit(report, args, stream)


def cmd_distance(args, stream) -> int:
    if args.target == "w3minus-factorizable":
        cert = factorize.dist_factorizable_w3minus()
    else:
        n = 3 if args.target == "w3minus-mixedunitary" else args.n
        if n is None:
            raise UsageError("wnminus-mixedunitary needs an odd n >= 3")
        try:
            cert = werner.dist_mixed_unitary_wminus(n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    print(f"{cert.target}: {cert.exact} = {cert.distance:.12g}", file=stream)
    print(f"  witness weights (W+, W-) = ({cert.witness_weights[0]:.12g}, {cert.witness_weights[1]:.12g})", file=stream)
    print(f"  witness residual = {cert.witness_residual:.3g}; lower weight = {cert.lower_weight:.12g}; "
          f"||W+ - W-||_cb = {cert.cb_gap:.12g}", file=stream)
    print(f"  {cert.notes}", file=stream)
    if args.json:
        doc = {"target": cert.target, "exact": cert.exact, "distance": cert.distance,
               "witness_weights": list(cert.witness_weights), "witness_residual": cert.witness_residual,
               "lower_weight": cert.lower_weight, "cb_gap": cert.cb_gap}
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_export(args, stream) -> int:
    grid = parse_grid(args.grid)
    try:
        if args.what == "curves":
            rows = convex.curve_export(grid)
            convex.write_csv(args.out, convex.CURVE_HEADER, rows)
        else:
            rows = convex.path_export(grid)
            convex.write_csv(args.out, convex.PATH_HEADER, rows)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"wrote {len(rows)} rows to {args.out}", file=stream)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "certify": cmd_certify, "distance": cmd_distance, "export": cmd_export}


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, stream)
    except UsageError as exc:
        print(f"qbirkhoff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qbirkhoff: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
