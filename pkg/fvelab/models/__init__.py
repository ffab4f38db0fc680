from fvelab.models.schemas import (
    ERROR_COLUMNS,
    SchemeSpec,
    ErrorReport,
    StudyConfig,
    StudyReport,
    GoldenMismatch,
    GoldenDiff,
    HealthCheckResponse,
    DesignRequest,
    DesignResponse,
    CheckRequest,
    CheckResponse,
    StudyRequest,
)

__all__ = [
    "ERROR_COLUMNS",
    "SchemeSpec",
    "ErrorReport",
    "StudyConfig",
    "StudyReport",
    "GoldenMismatch",
    "GoldenDiff",
    "HealthCheckResponse",
    "DesignRequest",
    "DesignResponse",
    "CheckRequest",
    "CheckResponse",
    "StudyRequest",
]
