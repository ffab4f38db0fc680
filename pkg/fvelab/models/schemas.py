from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fvelab.utils.validators import validate_descending_params, validate_refinements

ERROR_COLUMNS = ["err_h1", "err_l2", "err_ui_h1", "err_ui_l2", "err_p1", "err_p0"]


class SchemeSpec(BaseModel):
    """Design of a k-order FVE scheme on a symmetric dual mesh"""
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1, description="Polynomial order of the trial space")
    alphas: List[float] = Field(default_factory=list, description="Dual point parameters, descending")
    pi_star_params: Optional[List[float]] = Field(None, description="Pi* node parameters a_j")
    value_node_params: Optional[List[float]] = Field(None, description="Value node parameters a~_j")
    label: str = Field("", description="Free-form provenance")

    @property
    def l(self) -> int:
        return (self.k + 1) // 2

    @property
    def j0(self) -> int:
        return self.k // 2

    @property
    def is_odd(self) -> bool:
        return self.k % 2 == 1

    @model_validator(mode="after")
    def validate_ordering(self) -> "SchemeSpec":
        validate_descending_params("alpha", self.alphas, self.j0)
        if self.pi_star_params is not None:
            validate_descending_params("a", self.pi_star_params, self.l - 1)
        if self.value_node_params is not None:
            validate_descending_params("a~", self.value_node_params, self.l - 1)
        return self


class ErrorReport(BaseModel):
    """Errors of one refinement level"""
    n: int = Field(..., description="Number of primary elements")
    h: float = Field(..., gt=0, description="Maximum element length")
    err_h1: float = Field(..., ge=0, description="|u - u_h|_1")
    err_l2: float = Field(..., ge=0, description="||u - u_h||_0")
    err_ui_h1: float = Field(..., ge=0, description="|u_h - u_I|_1")
    err_ui_l2: float = Field(..., ge=0, description="||u_h - u_I||_0")
    err_p1: float = Field(..., ge=0, description="max |u' - u_h'| over the dual points")
    err_p0: Optional[float] = Field(None, ge=0, description="max |u - u_h| over the value points, None without value points")
    solver_residual: float = Field(0.0, ge=0, description="Relative residual of the banded solve")


class StudyConfig(BaseModel):
    """Inputs of a convergence study"""
    scheme: str = Field(..., description="preset:<name> or file:<path>")
    problem: str = Field(..., description="Problem preset name")
    levels: List[int] = Field(..., description="Element counts N, strictly increasing")
    columns: List[str] = Field(default_factory=lambda: list(ERROR_COLUMNS))
    output_path: Optional[str] = None

    @field_validator("levels")
    def validate_levels(cls, v):
        return validate_refinements(v)

    @field_validator("columns")
    def validate_columns(cls, v):
        unknown = set(v) - set(ERROR_COLUMNS)
        if unknown:
            raise ValueError(f"Unknown error columns: {sorted(unknown)}")
        return v


class StudyReport(BaseModel):
    """Errors and orders of a convergence study"""
    scheme: str
    problem: str
    quad_points: int
    rows: List[ErrorReport]
    eocs: Dict[str, List[Optional[float]]]
    floor: float = Field(0.0, ge=0, description="Round-off floor of the error columns")
    floor_limited: Dict[str, List[bool]] = Field(
        default_factory=dict, description="Per column, True where an order is limited by the floor"
    )
    metadata: Dict[str, Any] = Field(default_factory=dict)


class GoldenMismatch(BaseModel):
    """One cell that differs from the reference table"""
    row: int
    column: str
    expected: float
    actual: Optional[float]
    kind: str  # value or rate


class GoldenDiff(BaseModel):
    """Outcome of a golden-table comparison"""
    passed: bool
    checked_cells: int
    mismatches: List[GoldenMismatch] = Field(default_factory=list)


class HealthCheckResponse(BaseModel):
    """Health check response"""
    status: str
    version: str
    app_name: str


class DesignRequest(BaseModel):
    """Scheme design request"""
    k: int = Field(..., ge=1)
    method: str = Field(..., description="I, II, quartic, quintic or gauss")
    params: List[float] = Field(default_factory=list)


class DesignResponse(BaseModel):
    """Designed scheme with its orthogonality summary"""
    scheme: SchemeSpec
    max_order: int
    witness: Optional[List[float]]
    value_points: List[float]


class CheckRequest(BaseModel):
    """Orthogonality check request"""
    scheme: str = Field(..., description="preset:<name>")
    r: int


class CheckResponse(BaseModel):
    """Orthogonality check result"""
    scheme: str
    r: int
    max_order: int
    passed: bool
    witness: Optional[List[float]]


class StudyRequest(BaseModel):
    """Convergence study request"""
    scheme: str
    problem: str
    levels: List[int]

    @field_validator("levels")
    def validate_levels(cls, v):
        return validate_refinements(v)
