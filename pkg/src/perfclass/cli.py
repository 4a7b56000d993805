"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 model-validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict

from . import config as config_mod
from .classifier import evaluate, objective_value
from .errors import ConfigError, ModelValidationError, ParameterError, PerfClassError, ZeroGapError
from .oracle import run_suite, simulate_population
from .solver import ZERO_GAP_TOL, check_conditions, solve_optimal

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_MODEL = 3

SIG_DIGITS = 12
CSV_HEADER = ("tau", "gap_pos", "gap_neg", "prevalence_pos", "prevalence_neg", "value_pos", "value_neg")


def round_floats(obj):
    """Round every float to 12 significant digits; non-finite floats become null."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return round_floats(obj.item())
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(round_floats(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def curve_csv(curve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in curve:
        writer.writerow([f"{getattr(p, k):.{SIG_DIGITS}g}" for k in CSV_HEADER])
    return buf.getvalue()


def _emit(report: dict, out) -> None:
    text = dumps_report(report)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _header(rc: config_mod.RunConfig) -> dict:
    # output destinations are left out so a report depends only on its inputs
    cfg = {k: v for k, v in rc.raw.items() if k != "output"}
    return {"command": rc.command, "config": cfg, "numerics": asdict(rc.numerics)}


# ---------------------------------------------------------------------------
# commands


def cmd_solve(rc: config_mod.RunConfig, quiet: bool = False):
    env = config_mod.parse_environment(rc.raw["environment"])
    result = solve_optimal(env, rc.weights, rc.numerics)
    report = _header(rc)
    report.update(environment=env.to_dict(), result=result.to_dict(include_curve=False),
                  warnings=list(result.warnings), curve_points=len(result.curve))
    if rc.csv:
        write_atomic(rc.csv, curve_csv(result.curve))
    if not quiet:
        _emit(report, rc.out)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK, report, result


def cmd_evaluate(rc: config_mod.RunConfig):
    if "classifier" not in rc.block:
        raise ConfigError("evaluate block needs a classifier spec")
    clf = config_mod.parse_classifier(rc.block["classifier"])
    env = config_mod.parse_environment(rc.raw["environment"])
    ev = evaluate(env, clf)
    report = _header(rc)
    report.update(
        environment=env.to_dict(),
        classifier=clf.to_dict(),
        evaluation=ev.to_dict(),
        objective=rc.weights.to_dict(),
        objective_value=objective_value(env, clf, rc.weights),
        compliance_cost_cutoff=env.r * ev.gap,
        conditions=None,
    )
    if abs(ev.gap) > ZERO_GAP_TOL:
        try:
            report["conditions"] = check_conditions(env, clf, rc.weights, rc.numerics).to_dict()
        except ZeroGapError:
            pass
    _emit(report, rc.out)
    return EXIT_OK, report


def cmd_verify(rc: config_mod.RunConfig):
    trial = config_mod.parse_trial(rc.block)
    result = run_suite(trial, rc.numerics)
    report = _header(rc)
    report.update(passed=result.passed, report=result.to_dict())
    _emit(report, rc.out)
    code = EXIT_OK if result.passed else EXIT_VERIFY_FAILED
    if code:
        print(f"verification failed: {result.failures} of {result.trials_run} trials", file=sys.stderr)
    return code, report


def cmd_simulate(rc: config_mod.RunConfig):
    block = rc.block
    n = block.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"simulate.n must be an integer >= 1, got {n!r}")
    seed = block.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"simulate.seed must be a non-negative integer, got {seed!r}")
    if "classifier" not in block:
        raise ConfigError("simulate block needs a classifier spec")
    clf = config_mod.parse_classifier(block["classifier"])
    env = config_mod.parse_environment(rc.raw["environment"])

    sim = simulate_population(env, clf, n, seed)
    analytic = evaluate(env, clf).to_dict()
    z = {}
    for k, est in sim.estimates.items():
        se = sim.standard_errors[k]
        diff = est - analytic[k]
        z[k] = diff / se if se > 0 else (0.0 if diff == 0 else None)
    report = _header(rc)
    report.update(
        environment=env.to_dict(), classifier=clf.to_dict(), n=n, seed=seed,
        empirical=sim.estimates, standard_errors=sim.standard_errors,
        analytic={k: analytic[k] for k in sim.estimates}, z_scores=z,
    )
    _emit(report, rc.out)
    return EXIT_OK, report


def example_table(result, r: float) -> str:
    rows = [("family", "tau", "r*gap", "prevalence", "accuracy")]
    for opt in (result.best_positive, result.best_negative):
        ev = opt.evaluation
        rows.append((opt.family, f"{opt.tau:.4f}", f"{r * ev.gap:.4f}", f"{ev.prevalence:.4f}", f"{ev.accuracy:.6f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.append(f"winner: {result.winner} (value {result.winner_value:.6f}); "
                 f"score monotonicity violated: {'yes' if result.score_monotonicity_violated else 'no'}")
    return "\n".join(lines) + "\n"


def cmd_paper_example(rc: config_mod.RunConfig):
    code, report, result = cmd_solve(rc, quiet=True)
    if rc.out:
        write_atomic(rc.out, dumps_report(report))
    sys.stdout.write(example_table(result, report["environment"]["r"]))
    return code, report


COMMAND_FUNCS = {
    "solve": lambda rc: cmd_solve(rc)[:2],
    "evaluate": cmd_evaluate,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "paper-example": cmd_paper_example,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="write the objective curve as CSV (solve, paper-example)")
    common.add_argument("--seed", type=int, help="override the seed of verify/simulate")
    parser = argparse.ArgumentParser(
        prog="perfclass",
        description="Optimal classification when behaviour responds to the classifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "best threshold, negative-threshold and constant rules",
        "evaluate": "evaluate one classifier and its dominance conditions",
        "verify": "randomized dominance and remainder-sign suite",
        "simulate": "Monte Carlo population simulation",
        "paper-example": "solve the built-in N(3/4,1) cost, r=5 example",
    }
    for name in config_mod.COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "paper-example" and not args.config:
            doc = config_mod.EXAMPLE_CONFIG
        elif args.config:
            doc = config_mod.load(args.config)
        elif args.command == "verify":
            doc = {}
        else:
            raise ConfigError(f"{args.command} requires --config")
        rc = config_mod.resolve(args.command, doc, out=args.out, csv=args.csv, seed=args.seed)
        code, _ = COMMAND_FUNCS[args.command](rc)
        return code
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelValidationError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except PerfClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
