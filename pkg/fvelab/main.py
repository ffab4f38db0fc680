from typing import Dict

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fvelab.config import get_settings
from fvelab.middleware.error_handler import ErrorHandlingMiddleware
from fvelab.routers import health_router, schemes_router, studies_router
from fvelab.services.scheme import PRESETS, max_orthogonality_order, preset, reference_dual_points
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)

settings = get_settings()
app = FastAPI(
    title=settings.app_name,
    description="Finite volume element schemes for 1D two-point boundary value problems",
    version=settings.app_version,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=settings.cors_credentials,
    allow_methods=settings.cors_methods,
    allow_headers=settings.cors_headers,
)

# Maps InputError to 400 and NumericalError to 422
app.add_middleware(ErrorHandlingMiddleware)

app.include_router(health_router)
app.include_router(schemes_router)
app.include_router(studies_router)


def preset_orders() -> Dict[str, int]:
    """Maximal orthogonality order of every scheme preset"""
    return {
        name: max_orthogonality_order(reference_dual_points(preset(name)).G)[0]
        for name in sorted(PRESETS)
    }


@app.on_event("startup")
async def startup_event():
    """Log the numerics configuration and check that every preset resolves"""
    logger.info(f"Starting {settings.app_name} v{settings.app_version}")
    logger.info(f"Debug mode: {settings.debug}, log level: {settings.log_level}")
    quad = settings.quad_points if settings.quad_points is not None else "k+3"
    logger.info(
        f"Numerics: quad_points={quad}, eoc_floor={settings.eoc_floor:.1e}, "
        f"inf_sup_max_dofs={settings.inf_sup_max_dofs}, study_workers={settings.study_workers}"
    )
    orders = preset_orders()
    logger.info("Scheme presets: " + ", ".join(f"{name} (r={r})" for name, r in orders.items()))


@app.on_event("shutdown")
async def shutdown_event():
    """Flush a closing line to the log"""
    logger.info(f"Shutting down {settings.app_name}")


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "fvelab.main:app",
        host=settings.host,
        port=settings.port,
        reload=settings.reload,
        log_level=settings.log_level.lower(),
    )
