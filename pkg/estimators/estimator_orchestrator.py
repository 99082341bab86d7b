"""
Estimator Orchestrator - registry and dispatch for the denoising procedures
"""
from typing import Dict, Any, Optional, Union
import logging

import numpy as np

from estimators.base_estimator import BaseEstimator
from estimators.mle_estimator import MleEstimator
from estimators.svt_estimator import SvtEstimator
from estimators.sqrt_lasso_estimator import SqrtLassoEstimator
from estimators.levsort_estimator import LevSortEstimator
from models.schemas import DenoiseResult, EstimatorName, ObservationModel
from models.errors import ConfigurationError

logger = logging.getLogger(__name__)


class EstimatorOrchestrator:
    def __init__(self):
        """Register all estimators"""
        self.estimators: Dict[EstimatorName, BaseEstimator] = {
            EstimatorName.MLE: MleEstimator(),
            EstimatorName.SVT: SvtEstimator(),
            EstimatorName.SRLASSO: SqrtLassoEstimator(),
            EstimatorName.LEVSORT: LevSortEstimator(),
        }

    def get(self, name: Union[EstimatorName, str]) -> BaseEstimator:
        try:
            return self.estimators[EstimatorName(name)]
        except (ValueError, KeyError):
            raise ConfigurationError(f"unknown estimator: {name}")

    def describe(self) -> Dict[str, Any]:
        return {
            name.value: {
                **estimator.get_capabilities(),
                "models": [model.value for model in estimator.get_models()],
            }
            for name, estimator in self.estimators.items()
        }

    def skip_reason(self, name: Union[EstimatorName, str], n: int, sigma: Optional[float],
                    model: ObservationModel, **params: Any) -> Optional[str]:
        """Reason the estimator is inapplicable to this cell, None if it can run"""
        return self.get(name).inapplicable_reason(n, sigma, ObservationModel(model), **params)

    def run(self,
            name: Union[EstimatorName, str],
            y: np.ndarray,
            a: Optional[np.ndarray] = None,
            sigma: Optional[float] = None,
            model: ObservationModel = ObservationModel.PERMUTATION,
            **params: Any) -> DenoiseResult:
        estimator = self.get(name)
        logger.debug(f"Running {estimator.name.value} on {np.shape(y)} observation")
        return estimator.run(y, a=a, sigma=sigma, model=ObservationModel(model), **params)


# Global orchestrator instance
estimator_orchestrator = EstimatorOrchestrator()
