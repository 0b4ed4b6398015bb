"""Command-line front end.

Exit codes: 0 success, 1 invalid input (bad arguments, rejected scenario,
detector that cannot click), 2 numerical contract violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError, ContractViolation, UndefinedConditionalError
from .linalg import DERIVED_TOL
from .model import Detector
from .pipeline import run_check, run_metrics, run_screen, run_sweep, write_sweep_csv
from .scenario import PRESETS, ScenarioError, load_preset, load_scenario

OUT_ENV = "QERASER_OUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
DETECTORS = [d.value for d in Detector]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("file", nargs="?", help="scenario file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")


def _add_out_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output directory, or '-' for stdout (default: ${OUT_ENV} or the current directory)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qeraser", description="Generalized quantum-eraser simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="P, V, C, D for one detector branch, both routes")
    _add_scenario_args(p)
    p.add_argument("--detector", choices=DETECTORS, default="D1")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("sweep", help="metrics along the scenario's sweep grid, as CSV")
    _add_scenario_args(p)
    p.add_argument("--detector", choices=DETECTORS, default="D1")
    p.add_argument("--workers", type=int, default=1)
    _add_out_arg(p)

    p = sub.add_parser("screen", help="Monte Carlo screen pattern for a detector branch")
    _add_scenario_args(p)
    p.add_argument("--detector", choices=DETECTORS + ["none"], default="D1",
                   help="'none' gives the pattern with no post-selection")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--workers", type=int, default=1)
    _add_out_arg(p)

    p = sub.add_parser("check", help="verify all identities on random configurations")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DERIVED_TOL)
    return parser


def _scenario(args):
    if args.preset:
        return load_preset(args.preset), args.preset
    return load_scenario(args.file), Path(args.file).stem


def _out_dir(args) -> str:
    return args.out or os.environ.get(OUT_ENV) or "."


def _emit(out: str, name: str, write) -> None:
    if out == "-":
        write(sys.stdout)
        return
    path = Path(out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write(fh)
    print(f"wrote {path}", file=sys.stderr)


def _report_lines(rep) -> str:
    return (
        f"  P = {rep.P:.12f}  V = {rep.V:.12f}  C = {rep.C:.12f}  D = {rep.D:.12f}\n"
        f"  purity = {rep.purity:.12f}  p = {rep.probability:.12f}\n"
        f"  residuals: triality {rep.residual_triality:.2e}, "
        f"duality-purity {rep.residual_duality_purity:.2e}, "
        f"distinguishability {rep.residual_distinguishability:.2e}"
    )


def cmd_metrics(args) -> int:
    scenario, _ = _scenario(args)
    result = run_metrics(scenario, args.detector)
    if args.json:
        payload = {
            "detector": args.detector,
            "evolved": result.evolved.as_dict(),
            "closed_form": result.closed_form.as_dict(),
            "discrepancy": result.discrepancy,
        }
        print(json.dumps(payload, indent=2))
    else:
        print(f"detector {args.detector}")
        print("evolved:")
        print(_report_lines(result.evolved))
        print("closed form:")
        print(_report_lines(result.closed_form))
        print(f"max route discrepancy: {result.discrepancy:.2e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario, stem = _scenario(args)
    rows = run_sweep(scenario, args.detector, workers=args.workers)
    _emit(_out_dir(args), f"sweep_{stem}_{args.detector}.csv", lambda fh: write_sweep_csv(rows, fh))
    skipped = sum(not r.defined for r in rows)
    if skipped:
        print(f"{skipped} grid point(s) where {args.detector} cannot click (metrics written as nan)", file=sys.stderr)
    return EXIT_OK


def cmd_screen(args) -> int:
    scenario, stem = _scenario(args)
    detector = None if args.detector == "none" else args.detector
    result = run_screen(scenario, detector, samples=args.samples, seed=args.seed, bins=args.bins, workers=args.workers)
    out = _out_dir(args)
    tag = f"screen_{stem}_{args.detector}"
    _emit(out, f"{tag}_hist.csv", result.samples.write_csv)
    if out != "-":
        _emit(out, f"{tag}_profile.csv", result.profile.write_csv)
    print(result.summary(), file=sys.stderr if out == "-" else sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    summary = run_check(args.n, args.seed, args.tol)
    print(f"{summary.n_configs} configurations, {summary.n_branches} D1/D2 branches, tol {args.tol:g}")
    failures = summary.failures(args.tol)
    for name, worst in summary.worst().items():
        status = "FAIL" if name in failures else "ok"
        print(f"  {status:4} {name:24} max deviation {worst:.3e}")
    return EXIT_NUMERIC if failures else EXIT_OK


COMMANDS = {"metrics": cmd_metrics, "sweep": cmd_sweep, "screen": cmd_screen, "check": cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = COMMANDS[args.command](args)
        sys.stdout.flush()
        return code
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except ContractViolation as exc:
        print(f"numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UndefinedConditionalError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
