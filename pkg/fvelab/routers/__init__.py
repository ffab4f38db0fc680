from fvelab.routers.health import router as health_router
from fvelab.routers.schemes import router as schemes_router
from fvelab.routers.studies import router as studies_router

__all__ = ["health_router", "schemes_router", "studies_router"]
