from fastapi import APIRouter

from fvelab.models.schemas import StudyConfig, StudyReport, StudyRequest
from fvelab.services.harness import run_study
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)
router = APIRouter(prefix="/api/studies", tags=["studies"])


@router.post("/run", response_model=StudyReport)
def run_convergence_study(request: StudyRequest):
    """Run a convergence study and return its errors and orders"""
    logger.info(f"Study request: {request.scheme} on {request.problem}, levels {request.levels}")
    config = StudyConfig(scheme=request.scheme, problem=request.problem, levels=request.levels)
    return run_study(config)
