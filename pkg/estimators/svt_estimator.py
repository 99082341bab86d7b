"""
Singular value hard thresholding
"""
from typing import Optional, Any
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


def _threshold(m: np.ndarray, lam: float):
    if lam < 0:
        raise ConfigurationError(f"threshold must be nonnegative, got {lam}")
    factors = svd(m, rank_tol=0.0)
    keep = factors.singular_values >= lam
    out = (factors.u[:, keep] * factors.singular_values[keep]) @ factors.v[:, keep].T
    return out.reshape(m.shape), int(np.count_nonzero(keep))


def svt_threshold(m, lam: float) -> np.ndarray:
    """Keep the singular triplets with sigma_i >= lam, drop the rest."""
    return _threshold(as_matrix(m), lam)[0]


def svt_level(n: int, m: int, sigma: float, factor: Optional[float] = None) -> float:
    factor = settings.SVT_LAMBDA_FACTOR if factor is None else factor
    return factor * sigma * (math.sqrt(n) + math.sqrt(m))


def svt_denoise(y, sigma: float, factor: Optional[float] = None) -> DenoiseResult:
    """Threshold y at 1.1 sigma (sqrt(n) + sqrt(m))."""
    if sigma is None or not sigma > 0:
        raise ConfigurationError("svt requires a positive noise level sigma")
    y = as_matrix(y, "y", allow_empty=False)
    n, m = y.shape
    lam = svt_level(n, m, sigma, factor)
    y_hat, retained = _threshold(y, lam)
    residual = y - y_hat
    return DenoiseResult(
        y_hat=y_hat,
        objective=float(np.sum(residual * residual)),
        diagnostics={"lambda": lam, "retained_rank": retained, "sigma": float(sigma)},
    )


class SvtEstimator(BaseEstimator):
    def __init__(self):
        super().__init__(
            name=EstimatorName.SVT,
            description="Hard singular value thresholding at a noise-calibrated level",
            requires_design=False,
            requires_sigma=True,
            returns_arrangement=False,
        )

    def denoise(self, y, a=None, sigma=None, model=ObservationModel.PERMUTATION, **params: Any):
        return svt_denoise(y, sigma, factor=params.get("factor"))

    def inapplicable_reason(self, n, sigma, model, **params):
        if sigma is None or sigma <= 0:
            return "sigma_required"
        return None
