from typing import List

from fastapi import APIRouter

from fvelab.models.schemas import CheckRequest, CheckResponse, DesignRequest, DesignResponse
from fvelab.services.harness import load_scheme_source
from fvelab.services.scheme import (
    PRESETS,
    check_orthogonality,
    design,
    function_value_points,
    max_orthogonality_order,
    reference_dual_points,
)
from fvelab.utils.exceptions import NotApplicableError
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)
router = APIRouter(prefix="/api/schemes", tags=["schemes"])


@router.get("/presets", response_model=List[str])
def list_presets():
    """Names accepted as preset:<name>"""
    return sorted(PRESETS)


@router.post("/design", response_model=DesignResponse)
def design_scheme(request: DesignRequest):
    """
    Design a scheme by Method I, Method II, the quartic or quintic family, or Gauss layout.

    Returns the scheme with its maximal orthogonality order, the Pi* witness
    and the function-value superconvergent points.
    """
    logger.info(f"Design request: k={request.k}, method={request.method}, params={request.params}")
    spec = design(request.k, request.method, request.params)
    max_order, witness = max_orthogonality_order(reference_dual_points(spec).G)
    value_points: List[float] = []
    if max_order >= spec.k - 1:
        try:
            value_points = function_value_points(spec).tolist()
        except NotApplicableError as e:
            logger.info(f"No value points for {spec.label}: {e}")
    return DesignResponse(
        scheme=spec,
        max_order=max_order,
        witness=witness.tolist() if witness is not None else None,
        value_points=value_points,
    )


@router.post("/check", response_model=CheckResponse)
def check_scheme(request: CheckRequest):
    """Check the k-r-order orthogonal condition of a preset or scheme file"""
    spec = load_scheme_source(request.scheme)
    passed = check_orthogonality(spec, request.r)
    max_order, witness = max_orthogonality_order(reference_dual_points(spec).G)
    return CheckResponse(
        scheme=request.scheme,
        r=request.r,
        max_order=max_order,
        passed=passed,
        witness=witness.tolist() if witness is not None else None,
    )
