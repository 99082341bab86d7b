"""
Base estimator class for the denoising procedures
"""
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Any
import time
import logging

import numpy as np

from models.schemas import DenoiseResult, EstimatorName, ObservationModel

logger = logging.getLogger(__name__)


class BaseEstimator(ABC):
    """Base class for all estimators of the permuted linear model"""

    def __init__(self, name: EstimatorName, description: str,
                 requires_design: bool, requires_sigma: bool, returns_arrangement: bool):
        self.name = name
        self.description = description
        self.requires_design = requires_design
        self.requires_sigma = requires_sigma
        self.returns_arrangement = returns_arrangement

    @abstractmethod
    def denoise(self,
                y: np.ndarray,
                a: Optional[np.ndarray] = None,
                sigma: Optional[float] = None,
                model: ObservationModel = ObservationModel.PERMUTATION,
                **params: Any) -> DenoiseResult:
        """Estimate the noiseless matrix from the observation y"""
        pass

    @abstractmethod
    def inapplicable_reason(self, n: int, sigma: Optional[float],
                            model: ObservationModel, **params: Any) -> Optional[str]:
        """Why this estimator cannot run on the given inputs, or None"""
        pass

    def get_capabilities(self) -> Dict[str, Any]:
        return {
            "name": self.name.value,
            "description": self.description,
            "requires_design": self.requires_design,
            "requires_sigma": self.requires_sigma,
            "returns_arrangement": self.returns_arrangement,
        }

    def get_models(self) -> List[ObservationModel]:
        return list(ObservationModel)

    def run(self, y: np.ndarray, a: Optional[np.ndarray] = None, sigma: Optional[float] = None,
            model: ObservationModel = ObservationModel.PERMUTATION, **params: Any) -> DenoiseResult:
        """Run denoise and stamp wall time into the diagnostics"""
        start = time.perf_counter()
        try:
            result = self.denoise(y, a=a, sigma=sigma, model=model, **params)
        except Exception as e:
            logger.error(f"{self.name.value} failed on {np.shape(y)} input: {e}")
            raise
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        diagnostics = {**result.diagnostics, "wall_time_ms": elapsed_ms}
        return result.model_copy(update={"diagnostics": diagnostics})
