"""
Square-root LASSO with a nuclear-norm penalty:

    minimize_{Y'}  ||Y - Y'||_F + lam * ||Y'||_*

The objective is unitarily invariant, so the minimizer shares the singular
vectors of Y and has singular values t_i = max(s_i - lam * r, 0), where the
residual radius r >= 0 solves r^2 = sum_i min(s_i, lam * r)^2. With k values
above lam * r the fixed point is r^2 (1 - k lam^2) = sum_{i > k} s_i^2, one
closed-form candidate per k. Every candidate is a feasible point, so the
candidate of smallest objective is the exact minimizer.
"""
from typing import Optional, Any, List, Tuple
import math
import logging

import numpy as np

from config.settings import settings
from core.linalg import svd
from core.matrix import as_matrix
from estimators.base_estimator import BaseEstimator
from models.schemas import DenoiseResult, EstimatorName, ObservationModel
from models.errors import ConfigurationError

logger = logging.getLogger(__name__)

_REGION_RTOL = 1e-12


def default_lambda(n: int, m: int, factor: Optional[float] = None) -> float:
    factor = settings.SRLASSO_LAMBDA_FACTOR if factor is None else factor
    return factor * (1.0 / math.sqrt(n) + 1.0 / math.sqrt(m))


def sqrt_lasso_objective(y, y_prime, lam: float) -> float:
    y = as_matrix(y)
    y_prime = as_matrix(y_prime)
    nuclear = float(np.sum(np.linalg.svd(y_prime, compute_uv=False))) if y_prime.size else 0.0
    return float(np.linalg.norm(y - y_prime)) + lam * nuclear


def _spectral_objective(s: np.ndarray, t: np.ndarray, lam: float) -> float:
    return float(math.sqrt(np.sum((s - t) ** 2)) + lam * np.sum(t))


def _candidates(s: np.ndarray, lam: float) -> List[Tuple[int, float, bool]]:
    """(k, r, consistent) for each active-set size with a valid fixed point."""
    p = s.size
    tail = np.concatenate([np.cumsum((s ** 2)[::-1])[::-1], [0.0]])
    out = [(p, 0.0, True)]  # no shrinkage
    for k in range(p + 1):
        denom = 1.0 - k * lam * lam
        if tail[k] <= 0.0:
            continue
        if denom <= 0.0:
            break
        r = math.sqrt(tail[k] / denom)
        level = lam * r
        upper = s[k - 1] if k > 0 else math.inf
        lower = s[k] if k < p else 0.0
        consistent = lower <= level * (1 + _REGION_RTOL) and level < upper * (1 + _REGION_RTOL)
        out.append((k, r, consistent))
    return out


def sqrt_lasso_denoise(y, lam: Optional[float] = None) -> DenoiseResult:
    y = as_matrix(y, "y", allow_empty=False)
    n, m = y.shape
    lam = default_lambda(n, m) if lam is None else float(lam)
    if not lam > 0:
        raise ConfigurationError(f"lambda must be positive, got {lam}")

    factors = svd(y, rank_tol=0.0)
    s = factors.singular_values

    candidates = _candidates(s, lam)
    pool = [c for c in candidates if c[2]] or candidates
    best = None
    for k, r, consistent in pool:
        t = np.maximum(s - lam * r, 0.0) if r > 0 else s.copy()
        value = _spectral_objective(s, t, lam)
        if best is None or value < best[0]:
            best = (value, k, r, t)

    value, k, r, t = best
    y_hat = (factors.u * t) @ factors.v.T if s.size else np.zeros_like(y)
    active = [int(i) for i in np.flatnonzero(t > 0)]
    residual_radius = float(math.sqrt(np.sum((s - t) ** 2)))
    logger.debug(f"sqrt-LASSO lam={lam:.4g}: radius {residual_radius:.4g}, active {len(active)}/{s.size}")
    return DenoiseResult(
        y_hat=y_hat.reshape(y.shape),
        objective=value,
        diagnostics={
            "lambda": lam,
            "residual_radius": residual_radius,
            "active_set": active,
            "retained_rank": len(active),
            "candidates": len(candidates),
        },
    )


class SqrtLassoEstimator(BaseEstimator):
    def __init__(self):
        super().__init__(
            name=EstimatorName.SRLASSO,
            description="Square-root LASSO with nuclear-norm penalty; tuning free of sigma",
            requires_design=False,
            requires_sigma=False,
            returns_arrangement=False,
        )

    def denoise(self, y, a=None, sigma=None, model=ObservationModel.PERMUTATION, **params: Any):
        return sqrt_lasso_denoise(y, lam=params.get("lam"))

    def inapplicable_reason(self, n, sigma, model, **params):
        return None
