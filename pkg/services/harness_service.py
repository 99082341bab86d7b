"""
Harness Service - seeded Monte-Carlo sweeps over the estimators
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Any
from collections import defaultdict
import time
import logging

import numpy as np
from joblib import Parallel, delayed

from config.settings import settings
from core.instances import generate_instance, mix_seed
from core.linalg import numerical_rank
from estimators.estimator_orchestrator import estimator_orchestrator
from models.schemas import (
    EstimatorName,
    ExperimentConfig,
    ObservationModel,
    RateParams,
    ResultRecord,
    ResultTable,
)
from models.errors import DegenerateFit, InstanceTooLarge
from services.analysis_service import normalized_prediction_error

logger = logging.getLogger(__name__)

Job = Tuple[int, int, int, int, float, int]


def _run_trial(cfg: ExperimentConfig, job: Job) -> List[ResultRecord]:
    """All requested estimators on one generated instance"""
    cell_index, n, m, d, sigma, trial = job
    seed = mix_seed(cfg.master_seed, cell_index, trial)
    instance = generate_instance(n, m, d, sigma, model=cfg.model, seed=seed)
    rank_a = numerical_rank(instance.a) if d > 0 else 0

    records = []
    for name in cfg.estimators:
        base = dict(estimator=name, n=n, m=m, d=d, rank_a=rank_a, sigma=sigma,
                    model=cfg.model, trial=trial, seed=seed)
        reason = estimator_orchestrator.skip_reason(name, n, sigma, cfg.model, cap=cfg.mle_cap)
        if reason is not None:
            records.append(ResultRecord(**base, skip_reason=reason))
            continue

        start = time.perf_counter()
        try:
            result = estimator_orchestrator.run(
                name, instance.y, a=instance.a, sigma=sigma, model=cfg.model, cap=cfg.mle_cap
            )
        except InstanceTooLarge:
            records.append(ResultRecord(**base, skip_reason="instance_too_large"))
            continue
        elapsed_ms = (time.perf_counter() - start) * 1000.0 if cfg.record_timing else 0.0
        error = normalized_prediction_error(result.y_hat, instance.y_star)
        records.append(ResultRecord(**base, normalized_error=error, elapsed_ms=elapsed_ms))
    return records


class ExperimentService:
    def __init__(self):
        self.default_workers = settings.HARNESS_WORKERS

    def jobs(self, cfg: ExperimentConfig) -> List[Job]:
        """Cells in grid order: (n, m, d) outer, sigma inner, then trials"""
        out = []
        cell_index = 0
        for n, m, d in cfg.cells:
            for sigma in cfg.sigmas:
                for trial in range(cfg.trials):
                    out.append((cell_index, n, m, d, float(sigma), trial))
                cell_index += 1
        return out

    def run_experiment(self, cfg: ExperimentConfig) -> ResultTable:
        """Run every (cell, trial) job; output order and values are independent
        of the worker count"""
        jobs = self.jobs(cfg)
        workers = cfg.workers or self.default_workers
        logger.info(
            f"Starting experiment: {len(jobs)} trials, estimators "
            f"{[e.value for e in cfg.estimators]}, model {cfg.model.value}, workers {workers}"
        )

        if workers > 1:
            per_job = Parallel(n_jobs=workers)(delayed(_run_trial)(cfg, job) for job in jobs)
        else:
            per_job = [_run_trial(cfg, job) for job in jobs]

        order = {name: i for i, name in enumerate(cfg.estimators)}
        keyed = []
        for job, records in zip(jobs, per_job):
            for record in records:
                keyed.append(((job[0], order[record.estimator], job[5]), record))
        keyed.sort(key=lambda item: item[0])

        table = ResultTable(records=[record for _, record in keyed])
        skipped = len(table) - len(table.completed())
        if skipped:
            logger.warning(f"{skipped} of {len(table)} records skipped (estimator inapplicable)")
        logger.info(f"Experiment finished with {len(table)} records")
        return table


def fit_loglog_slope(points: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of log y against log x."""
    if len(points) < 2:
        raise DegenerateFit("need at least two points")
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DegenerateFit("log-log fit needs positive coordinates")
    lx = np.log(xs)
    ly = np.log(ys)
    centered = lx - lx.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        raise DegenerateFit("all x values are equal")
    return float(np.dot(centered, ly - ly.mean()) / denom)


def summarize(table: ResultTable) -> List[Dict[str, Any]]:
    """Mean/std/count of the normalized error per (estimator, n, m, d, sigma, model)"""
    groups: Dict[tuple, List[float]] = defaultdict(list)
    ranks: Dict[tuple, int] = {}
    for record in table.completed():
        key = (record.estimator, record.n, record.m, record.d, record.sigma, record.model)
        groups[key].append(record.normalized_error)
        ranks[key] = max(ranks.get(key, 0), record.rank_a)
    rows = []
    for key, errors in groups.items():
        estimator, n, m, d, sigma, model = key
        arr = np.asarray(errors)
        rows.append({
            "estimator": estimator.value, "n": n, "m": m, "d": d, "sigma": sigma,
            "model": model.value, "rank_a": ranks[key],
            "mean_error": float(arr.mean()), "std_error": float(arr.std()), "count": int(arr.size),
        })
    return rows


def slopes_by_estimator(table: ResultTable, axis: str = "n") -> Dict[str, float]:
    """Log-log slope of mean error against one grid dimension, per estimator"""
    by_estimator: Dict[str, Dict[float, List[float]]] = defaultdict(lambda: defaultdict(list))
    for row in summarize(table):
        if row["mean_error"] > 0:
            by_estimator[row["estimator"]][float(row[axis])].append(row["mean_error"])
    slopes = {}
    for estimator, series in by_estimator.items():
        points = [(x, float(np.mean(v))) for x, v in sorted(series.items())]
        try:
            slopes[estimator] = fit_loglog_slope(points)
        except DegenerateFit as e:
            logger.warning(f"No slope for {estimator}: {e}")
    return slopes


def fit_rate_constant(table: ResultTable,
                      rate_fn: Callable[[RateParams], float],
                      estimator: Optional[EstimatorName] = None) -> Optional[float]:
    """Mean ratio of observed error to the rate expression; sigma = 0 and
    rank-zero cells carry no information and are left out"""
    ratios = []
    for record in table.completed():
        if estimator is not None and record.estimator != estimator:
            continue
        if record.sigma <= 0 or record.rank_a < 1:
            continue
        params = RateParams(n=record.n, m=record.m, rank_a=record.rank_a, sigma=record.sigma)
        ratios.append(record.normalized_error / rate_fn(params))
    if not ratios:
        return None
    return float(np.mean(ratios))


# Global experiment service instance
experiment_service = ExperimentService()
