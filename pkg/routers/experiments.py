"""
Experiments router for Monte-Carlo sweeps
"""
from fastapi import APIRouter, HTTPException
from fastapi.responses import PlainTextResponse
import logging

from models.schemas import ExperimentConfig
from models.errors import PermutedModelError
from services.csv_service import results_to_text
from services.harness_service import experiment_service, slopes_by_estimator, summarize

logger = logging.getLogger(__name__)
router = APIRouter()


@router.post("/simulate", response_class=PlainTextResponse)
async def simulate(cfg: ExperimentConfig):
    """Run the sweep and return the results CSV"""
    try:
        table = experiment_service.run_experiment(cfg)
    except PermutedModelError as e:
        logger.error(f"Error running experiment: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    return PlainTextResponse(results_to_text(table), media_type="text/csv")


@router.post("/bench")
async def bench(cfg: ExperimentConfig):
    """Run the sweep and return summaries with log-log slopes against n"""
    try:
        table = experiment_service.run_experiment(cfg)
    except PermutedModelError as e:
        logger.error(f"Error running experiment: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    return {"summary": summarize(table), "slopes": slopes_by_estimator(table)}
