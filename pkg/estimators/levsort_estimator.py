"""
LevSort: match rows by sorted leverage scores, then solve least squares.

Exact on noiseless inputs when rank(A) <= rank(X*) and both score vectors
have distinct entries; otherwise returned as a heuristic with
preconditions_met = False in the diagnostics.
"""
from typing import Optional, Any
import warnings
import logging

import numpy as np

from config.settings import settings
from core.arrangements import apply_arrangement, make_permutation
from core.linalg import svd, least_squares
from core.matrix import as_matrix
from estimators.base_estimator import BaseEstimator
from models.schemas import DenoiseResult, EstimatorName, LeverageScores, ObservationModel
from models.errors import DimensionMismatch, DegenerateLeverage

logger = logging.getLogger(__name__)


def leverage_scores(m, rank_tol: Optional[float] = None) -> LeverageScores:
    """Squared row norms of the left singular vectors."""
    factors = svd(m, rank_tol)
    scores = np.sum(factors.u * factors.u, axis=1)
    return LeverageScores(scores=scores, rank=factors.rank)


def _min_gap(sorted_desc: np.ndarray) -> float:
    if sorted_desc.size < 2:
        return float("inf")
    return float(np.min(sorted_desc[:-1] - sorted_desc[1:]))


def match_by_sorting(scores_y: np.ndarray, scores_a: np.ndarray) -> np.ndarray:
    """Row map pairing the i-th largest score of y with the i-th largest of a."""
    order_y = np.argsort(-scores_y, kind="stable")
    order_a = np.argsort(-scores_a, kind="stable")
    mapping = np.empty(scores_y.size, dtype=np.intp)
    mapping[order_y] = order_a
    return mapping


def levsort(a, y, tie_tol: Optional[float] = None) -> DenoiseResult:
    """tie_tol is relative to the largest leverage score."""
    a = as_matrix(a, "a")
    y = as_matrix(y, "y", allow_empty=False)
    if a.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"a has {a.shape[0]} rows but y has {y.shape[0]}")
    tie_tol = settings.LEVSORT_TIE_TOL if tie_tol is None else float(tie_tol)

    lev_a = leverage_scores(a)
    lev_y = leverage_scores(y)
    arrangement = make_permutation(match_by_sorting(lev_y.scores, lev_a.scores))

    arranged = apply_arrangement(arrangement, a)
    x_hat = least_squares(arranged, y)
    y_hat = arranged @ x_hat
    residual = y - y_hat

    gap_a = _min_gap(np.sort(lev_a.scores)[::-1])
    gap_y = _min_gap(np.sort(lev_y.scores)[::-1])
    scale = max(float(np.max(lev_a.scores, initial=0.0)), float(np.max(lev_y.scores, initial=0.0)))
    distinct = gap_a > tie_tol * scale and gap_y > tie_tol * scale
    rank_match = lev_a.rank == lev_y.rank
    # noiseless inputs satisfy l(Y) = Pi l(A) exactly
    leverage_residual = float(np.max(
        np.abs(lev_y.scores - apply_arrangement(arrangement, lev_a.scores)), initial=0.0
    ))
    consistent = leverage_residual <= settings.LEVSORT_CONSISTENCY_TOL

    if not distinct:
        message = f"leverage scores tie within {tie_tol:g} (gaps: a={gap_a:.3g}, y={gap_y:.3g})"
        logger.warning(message)
        warnings.warn(message, DegenerateLeverage, stacklevel=2)
    if not rank_match:
        logger.warning(f"rank(Y)={lev_y.rank} differs from rank(A)={lev_a.rank}; exact recovery not guaranteed")

    return DenoiseResult(
        y_hat=y_hat,
        arrangement_hat=arrangement,
        x_hat=x_hat,
        objective=float(np.sum(residual * residual)),
        diagnostics={
            "preconditions_met": bool(distinct and rank_match and consistent),
            "leverage_residual": leverage_residual,
            "degenerate_leverage": not distinct,
            "rank_a": lev_a.rank,
            "rank_y": lev_y.rank,
            "min_gap_a": gap_a,
            "min_gap_y": gap_y,
        },
    )


class LevSortEstimator(BaseEstimator):
    def __init__(self):
        super().__init__(
            name=EstimatorName.LEVSORT,
            description="Leverage-score sorting match followed by least squares (exact when noiseless)",
            requires_design=True,
            requires_sigma=False,
            returns_arrangement=True,
        )

    def denoise(self, y, a=None, sigma=None, model=ObservationModel.PERMUTATION, **params: Any):
        if a is None:
            raise DimensionMismatch("levsort requires the design matrix a")
        return levsort(a, y, tie_tol=params.get("tie_tol"))

    def get_models(self):
        return [ObservationModel.PERMUTATION]

    def inapplicable_reason(self, n, sigma, model, **params):
        return None
