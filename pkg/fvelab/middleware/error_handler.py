from fastapi import Request
from fastapi.responses import JSONResponse
from starlette.middleware.base import BaseHTTPMiddleware
from fvelab.utils.logger import setup_logger
from fvelab.utils.exceptions import InputError, NumericalError
import traceback

logger = setup_logger(__name__)


def _error_body(exc: Exception) -> dict:
    return {"detail": str(exc), "type": exc.__class__.__name__}


class ErrorHandlingMiddleware(BaseHTTPMiddleware):
    """Map the FVELab exception families to 400 / 422 and anything else to 500"""

    async def dispatch(self, request: Request, call_next):
        try:
            response = await call_next(request)
            return response
        except InputError as exc:
            logger.error(f"{exc.__class__.__name__} on {request.url.path}: {exc}")
            return JSONResponse(status_code=400, content=_error_body(exc))
        except NumericalError as exc:
            logger.error(f"{exc.__class__.__name__} on {request.url.path}: {exc}")
            return JSONResponse(status_code=422, content=_error_body(exc))
        except Exception as exc:
            logger.error(f"Unhandled exception: {str(exc)}\n{traceback.format_exc()}")
            return JSONResponse(
                status_code=500,
                content={
                    "detail": "Internal server error",
                    "type": "InternalServerError",
                },
            )
