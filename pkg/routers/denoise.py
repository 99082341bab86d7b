"""
Denoise router for estimator and matching endpoints
"""
from fastapi import APIRouter, HTTPException
from typing import Any, Dict
import math
import logging

import numpy as np

from core.matrix import as_matrix
from estimators.estimator_orchestrator import estimator_orchestrator
from estimators.levsort_estimator import levsort
from models.schemas import (
    DenoiseRequest,
    DenoiseResponse,
    MatchRequest,
    MatchResponse,
    PointCloud,
)
from models.errors import InstanceTooLarge, PermutedModelError

logger = logging.getLogger(__name__)
router = APIRouter()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


@router.get("/estimators")
async def get_estimators():
    """List the available estimators and their requirements"""
    estimators = estimator_orchestrator.describe()
    return {"estimators": estimators, "total_estimators": len(estimators)}


@router.post("/denoise", response_model=DenoiseResponse)
async def denoise(request: DenoiseRequest):
    """Run one estimator on a JSON-encoded observation"""
    handler = estimator_orchestrator.get(request.estimator)
    if handler.requires_design and request.a is None:
        raise HTTPException(status_code=400, detail=f"{request.estimator.value} requires the design matrix a")
    if handler.requires_sigma and request.sigma is None:
        raise HTTPException(status_code=400, detail=f"{request.estimator.value} requires sigma")

    try:
        y = as_matrix(request.y, "y", allow_empty=False)
        a = None if request.a is None else as_matrix(request.a, "a", allow_empty=False)
        result = estimator_orchestrator.run(
            request.estimator, y, a=a, sigma=request.sigma, model=request.model,
            lam=request.lam, tie_tol=request.tie_tol, cap=request.mle_cap,
        )
    except InstanceTooLarge as e:
        logger.error(f"Denoise rejected: {e}")
        raise HTTPException(status_code=413, detail=str(e))
    except (PermutedModelError, ValueError) as e:
        logger.error(f"Error denoising: {e}")
        raise HTTPException(status_code=400, detail=str(e))

    n, m = y.shape
    return DenoiseResponse(
        estimator=request.estimator,
        y_hat=result.y_hat.tolist(),
        arrangement_hat=None if result.arrangement_hat is None else list(result.arrangement_hat.map),
        x_hat=None if result.x_hat is None else result.x_hat.tolist(),
        objective=result.objective,
        normalized_objective=result.objective / (n * m),
        diagnostics=_jsonable(result.diagnostics),
    )


@router.post("/match", response_model=MatchResponse)
async def match(request: MatchRequest):
    """Recover correspondence and linear transform between two point clouds"""
    try:
        source = PointCloud(points=request.source)
        target = PointCloud(points=request.target)
        if source.points.shape != target.points.shape:
            raise HTTPException(status_code=400, detail="source and target differ in shape")
        result = levsort(source.points, target.points, tie_tol=request.tie_tol)
    except HTTPException:
        raise
    except (PermutedModelError, ValueError) as e:
        logger.error(f"Error matching point clouds: {e}")
        raise HTTPException(status_code=400, detail=str(e))

    met = bool(result.diagnostics["preconditions_met"])
    return MatchResponse(
        correspondence=list(result.arrangement_hat.map),
        transform=result.x_hat.tolist(),
        preconditions_met=met,
        warning=None if met else "exact-recovery conditions not met; correspondence is heuristic",
        residual=math.sqrt(result.objective),
    )
