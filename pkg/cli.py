"""
belief-bound command line.

Usage:
    python cli.py analyze models/guess_reward.pomdp --clipping --eta 1 --budget 4 --lambda 7/10
    python cli.py sweep models/guess_reward.pomdp --budgets 0,2,4,8
    python cli.py compare models/guess_reward.pomdp --etas 1,2,3
    python cli.py history --model-id guess_reward

Exit codes: 0 success (a refuted threshold is a result, not an error),
2 unreadable model or bad option, 3 analysis failure.
"""

import argparse
import json
import os
import sys
from typing import List, Optional

from config.settings import configure_logging
from dao.model_format import read_model_text, serialize_abstraction
from model.errors import AnalysisError, ConfigurationError, ModelError
from model.report import CUTOFF_SOURCES, DIRECTIONS, OBJECTIVES, AnalysisRequest, parse_rational
from service import AnalysisService
from service.dot_export import export_dot

EXIT_INPUT = 2
EXIT_ANALYSIS = 3


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("expected a non-empty list of non-negative integers")
    return values


def _rational(text: str):
    try:
        return parse_rational(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_model_options(parser: argparse.ArgumentParser):
    parser.add_argument("model", help="model file in the explicit POMDP format")
    parser.add_argument("--direction", choices=DIRECTIONS, default="max")
    parser.add_argument("--objective", choices=OBJECTIVES, default="reward")
    parser.add_argument("--goal-obs", nargs="+", default=[], metavar="NAME",
                        help="goal observations (overrides the model's goal line)")
    parser.add_argument("--lambda", dest="threshold", type=_rational, metavar="P/Q",
                        help="threshold to refute")
    parser.add_argument("--clipping", action="store_true", help="enable belief clipping")
    parser.add_argument("--eta", type=int, default=2, help="grid resolution for clipping candidates")
    parser.add_argument("--size-factor", type=float, default=1.0)
    parser.add_argument("--budget", type=int, help="absolute size threshold, overrides --size-factor")
    parser.add_argument("--precision", type=float, default=1e-6, help="relative value-iteration precision")
    parser.add_argument("--max-expansions", type=int, help="hard cap on expanded beliefs")
    parser.add_argument("--threads", type=int, help="threads for clipping (default BELIEF_BOUND_THREADS)")
    parser.add_argument("--cutoff", choices=CUTOFF_SOURCES, default="heuristic",
                        help="cut-off values: heuristic policy or the minimal values")
    parser.add_argument("--clipping-solver", choices=("enumerate", "milp"), default="enumerate")
    parser.add_argument("--model-id", help="run-log id (default: file name)")
    parser.add_argument("--deterministic", action="store_true", help="zero timing fields")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="belief-bound", description="Lower bounds for POMDP total rewards")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="compute a bound and a threshold verdict")
    _add_model_options(analyze)
    analyze.add_argument("--report", help="write the JSON report here instead of stdout")
    analyze.add_argument("--dot", help="write the abstraction as GraphViz DOT")
    analyze.add_argument("--export-abstraction", help="write the abstraction in the explicit format")
    analyze.add_argument("--record", action="store_true", help="store the report in the run log")

    sweep = sub.add_parser("sweep", help="bounds over a schedule of size budgets (CSV)")
    _add_model_options(sweep)
    sweep.add_argument("--budgets", type=_int_list, required=True, metavar="A,B,C")
    sweep.add_argument("--output", help="CSV file (default stdout)")

    compare = sub.add_parser("compare", help="cut-off only against clipping per eta (CSV)")
    _add_model_options(compare)
    compare.add_argument("--etas", type=_int_list, default=[1, 2, 3], metavar="A,B,C")
    compare.add_argument("--output", help="CSV file (default stdout)")

    history = sub.add_parser("history", help="list or delete recorded runs")
    history.add_argument("--model-id")
    history.add_argument("--limit", type=int, default=20)
    history.add_argument("--delete", metavar="RUN_ID")
    return parser


def _request(args) -> AnalysisRequest:
    model_id = args.model_id or os.path.splitext(os.path.basename(args.model))[0]
    return AnalysisRequest(
        direction=args.direction,
        objective=args.objective,
        goal_observations=tuple(args.goal_obs),
        threshold=args.threshold,
        clipping=args.clipping,
        eta=args.eta,
        size_factor=args.size_factor,
        size_budget=args.budget,
        precision=args.precision,
        max_expansions=args.max_expansions,
        threads=args.threads,
        cutoff_source=args.cutoff,
        clipping_solver=args.clipping_solver,
        model_id=model_id,
        deterministic=args.deterministic,
    )


def _write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc.strerror or exc}") from None


def run_analyze(args) -> int:
    outcome = AnalysisService.run(read_model_text(args.model), _request(args))
    if args.dot:
        _write(args.dot, export_dot(outcome.abstraction))
    if args.export_abstraction:
        _write(args.export_abstraction, serialize_abstraction(outcome.abstraction))
    if args.record:
        AnalysisService.record(outcome.report)
    _write(args.report, outcome.report.to_json() + "\n")
    return 0


def run_sweep(args) -> int:
    frame = AnalysisService.sweep(read_model_text(args.model), _request(args), args.budgets)
    _write(args.output, frame.to_csv(index=False))
    return 0


def run_compare(args) -> int:
    frame = AnalysisService.compare(read_model_text(args.model), _request(args), args.etas)
    _write(args.output, frame.to_csv(index=False))
    return 0


def run_history(args) -> int:
    if args.delete:
        deleted = AnalysisService.delete_history_record(args.delete)
        print(json.dumps({"deleted": args.delete if deleted else None}))
        return 0
    runs = AnalysisService.get_recent_history(args.model_id, limit=args.limit)
    payload = [
        {"run_id": item["run_id"], "created_at": item["created_at"], "report": item["report"].to_dict()}
        for item in runs
    ]
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


COMMANDS = {
    "analyze": run_analyze,
    "sweep": run_sweep,
    "compare": run_compare,
    "history": run_history,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging({0: None, 1: "INFO"}.get(args.verbose, "DEBUG"))
    try:
        return COMMANDS[args.command](args)
    except (ModelError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AnalysisError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
