"""
Command-line front end: denoise, match, simulate, bench.

Exit codes: 0 success, 2 invalid input (parse, dimensions, missing flags),
3 instance too large for brute-force enumeration.
"""
from pathlib import Path
from typing import List, Optional, Sequence
import argparse
import json
import logging
import sys

import numpy as np

from config.settings import settings
from core.matrix import read_matrix, write_matrix
from estimators.estimator_orchestrator import estimator_orchestrator
from estimators.levsort_estimator import levsort
from models.schemas import (
    EstimatorName,
    ExperimentConfig,
    ObservationModel,
    PointCloud,
)
from models.errors import InstanceTooLarge, PermutedModelError
from services.analysis_service import rate_mle, rate_svt
from services.csv_service import emit_csv, read_csv, write_correspondence
from services.harness_service import (
    experiment_service,
    fit_rate_constant,
    slopes_by_estimator,
    summarize,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TOO_LARGE = 3


class UsageError(Exception):
    pass


def _fail(message: str, code: int = EXIT_INVALID) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _int_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _estimator_list(text: str) -> List[EstimatorName]:
    try:
        return [EstimatorName(tok.strip()) for tok in text.split(",") if tok.strip()]
    except ValueError:
        choices = ",".join(e.value for e in EstimatorName)
        raise argparse.ArgumentTypeError(f"estimators must be drawn from {choices}")


def _print_diagnostics(diagnostics: dict) -> None:
    for key in sorted(diagnostics):
        value = diagnostics[key]
        if isinstance(value, (float, np.floating)):
            print(f"{key} = {float(value):.10g}")
        else:
            print(f"{key} = {json.dumps(value, default=str)}")


def cmd_denoise(args: argparse.Namespace) -> int:
    estimator = EstimatorName(args.estimator)
    if estimator == EstimatorName.SVT and args.sigma is None:
        return _fail("--sigma is required for --estimator svt")
    handler = estimator_orchestrator.get(estimator)
    if handler.requires_design and args.a is None:
        return _fail(f"--a is required for --estimator {estimator.value}")

    try:
        y = read_matrix(args.y)
        a = read_matrix(args.a) if args.a is not None else None
        params = {"lam": args.lam, "tie_tol": args.tie_tol, "cap": args.mle_cap}
        result = estimator_orchestrator.run(
            estimator, y, a=a, sigma=args.sigma, model=ObservationModel(args.model), **params
        )
        write_matrix(args.out, result.y_hat, header=[f"estimator {estimator.value}"])
    except InstanceTooLarge as e:
        logger.error(f"denoise rejected: {e}")
        return _fail(str(e), EXIT_TOO_LARGE)
    except (PermutedModelError, OSError) as e:
        logger.error(f"denoise failed: {e}")
        return _fail(str(e))

    n, m = y.shape
    print(f"estimator = {estimator.value}")
    print(f"objective = {result.objective:.10g}")
    print(f"normalized_objective = {result.objective / (n * m):.10g}")
    _print_diagnostics(result.diagnostics)
    return EXIT_OK


def cmd_match(args: argparse.Namespace) -> int:
    try:
        source = PointCloud(points=read_matrix(args.source))
        target = PointCloud(points=read_matrix(args.target))
        if source.points.shape != target.points.shape:
            return _fail(
                f"source {source.points.shape} and target {target.points.shape} differ in shape"
            )
        result = levsort(source.points, target.points, tie_tol=args.tie_tol)
        write_correspondence(args.out, result.arrangement_hat)
        transform_out = args.transform_out or str(Path(args.out).with_suffix(".transform.txt"))
        write_matrix(transform_out, result.x_hat, header=["estimated transform X_hat"])
    except (PermutedModelError, OSError) as e:
        logger.error(f"match failed: {e}")
        return _fail(str(e))

    if not result.diagnostics["preconditions_met"]:
        print(
            "warning: exact-recovery conditions not met "
            f"(rank_a={result.diagnostics['rank_a']}, rank_y={result.diagnostics['rank_y']}, "
            f"degenerate_leverage={result.diagnostics['degenerate_leverage']}); "
            "correspondence is heuristic"
        )
    print(f"residual = {np.sqrt(result.objective):.10g}")
    print(f"correspondence written to {args.out}")
    print(f"transform written to {transform_out}")
    return EXIT_OK


def _broadcast(values: Sequence, size: int, flag: str) -> list:
    if len(values) == size:
        return list(values)
    if len(values) == 1:
        return list(values) * size
    raise UsageError(f"{flag} has {len(values)} entries, expected 1 or {size}")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    if not args.n or not args.m or not args.d:
        raise UsageError("--n, --m and --d need at least one value each")
    if args.pairing == "product":
        cells = [(n, m, d) for n in args.n for m in args.m for d in args.d]
    else:
        size = max(len(args.n), len(args.m), len(args.d))
        cells = list(zip(
            _broadcast(args.n, size, "--n"),
            _broadcast(args.m, size, "--m"),
            _broadcast(args.d, size, "--d"),
        ))
    return ExperimentConfig(
        cells=cells,
        sigmas=args.sigma,
        trials=args.trials,
        estimators=args.estimators,
        model=ObservationModel(args.model),
        master_seed=args.seed,
        mle_cap=args.mle_cap,
        workers=args.workers,
        record_timing=not args.no_timing,
    )


def _run_sweep(args: argparse.Namespace, echo: bool):
    try:
        cfg = build_config(args)
    except (UsageError, PermutedModelError, ValueError) as e:
        logger.error(f"invalid grid: {e}")
        return None, _fail(f"invalid grid: {e}")
    table = experiment_service.run_experiment(cfg)
    if args.out:
        emit_csv(table, args.out)
    elif echo:
        emit_csv(table, sys.stdout)
    return table, EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    _, code = _run_sweep(args, echo=True)
    return code


def cmd_bench(args: argparse.Namespace) -> int:
    if args.from_csv:
        try:
            table = read_csv(args.from_csv)
        except (OSError, ValueError) as e:
            return _fail(f"cannot read {args.from_csv}: {e}")
    else:
        table, code = _run_sweep(args, echo=False)
        if table is None:
            return code

    for row in summarize(table):
        print(
            f"summary {row['estimator']} n={row['n']} m={row['m']} d={row['d']} "
            f"sigma={row['sigma']:g} mean={row['mean_error']:.6g} std={row['std_error']:.3g} "
            f"count={row['count']}"
        )
    for estimator, slope in sorted(slopes_by_estimator(table, axis=args.slope_axis).items()):
        print(f"slope {estimator} = {slope:.4f}")
    for estimator in EstimatorName:
        rate_fn = rate_mle if estimator == EstimatorName.MLE else rate_svt
        constant = fit_rate_constant(table, rate_fn, estimator)
        if constant is not None:
            print(f"rate_constant {estimator.value} = {constant:.4g}")
    return EXIT_OK


def _add_sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=_int_list, default=[32])
    parser.add_argument("--m", type=_int_list, default=[32])
    parser.add_argument("--d", type=_int_list, default=[2])
    parser.add_argument("--sigma", type=_float_list, default=[1.0])
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--estimators", type=_estimator_list, default=[EstimatorName.SVT])
    parser.add_argument("--model", choices=[m.value for m in ObservationModel],
                        default=ObservationModel.PERMUTATION.value)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mle-cap", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--pairing", choices=["zip", "product"], default="zip",
                        help="zip the --n/--m/--d lists (length-1 lists broadcast) or take their product")
    parser.add_argument("--no-timing", action="store_true",
                        help="write elapsed_ms as 0 so repeated runs are byte-identical")
    parser.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permuted-denoise",
                                     description="Estimators for the permuted linear model")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    denoise = sub.add_parser("denoise", help="denoise an observation matrix")
    denoise.add_argument("--a", default=None)
    denoise.add_argument("--y", required=True)
    denoise.add_argument("--estimator", required=True, choices=[e.value for e in EstimatorName])
    denoise.add_argument("--sigma", type=float, default=None)
    denoise.add_argument("--lambda", dest="lam", type=float, default=None)
    denoise.add_argument("--tie-tol", type=float, default=None)
    denoise.add_argument("--mle-cap", type=int, default=None)
    denoise.add_argument("--model", choices=[m.value for m in ObservationModel],
                         default=ObservationModel.PERMUTATION.value)
    denoise.add_argument("--out", required=True)
    denoise.set_defaults(handler=cmd_denoise)

    match = sub.add_parser("match", help="recover point correspondence and linear transform")
    match.add_argument("--source", required=True)
    match.add_argument("--target", required=True)
    match.add_argument("--out", required=True)
    match.add_argument("--transform-out", default=None)
    match.add_argument("--tie-tol", type=float, default=None)
    match.set_defaults(handler=cmd_match)

    simulate = sub.add_parser("simulate", help="run a Monte-Carlo sweep and write CSV")
    _add_sweep_flags(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    bench = sub.add_parser("bench", help="sweep and print fitted log-log slopes")
    _add_sweep_flags(bench)
    bench.add_argument("--from-csv", default=None, help="summarize an existing results file")
    bench.add_argument("--slope-axis", choices=["n", "m"], default="n")
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse reports usage errors with status 2
        return int(e.code) if e.code is not None else EXIT_OK
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return args.handler(args)
