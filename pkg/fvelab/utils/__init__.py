from fvelab.utils.logger import setup_logger
from fvelab.utils.exceptions import (
    FveLabException,
    InputError,
    ParameterError,
    InvalidSchemeError,
    MethodNotApplicableError,
    DomainError,
    UnknownPresetError,
    InvalidProblemError,
    NotApplicableError,
    GoldenShapeError,
    NumericalError,
    SingularSystemError,
    IllPosedSchemeError,
    RootFindingError,
    GramMatrixError,
    StudyLevelError,
)
from fvelab.utils.validators import (
    quadrature_points,
    validate_refinements,
    parse_scheme_source,
    parse_float_list,
    parse_int_list,
    validate_descending_params,
)

__all__ = [
    "setup_logger",
    "FveLabException",
    "InputError",
    "ParameterError",
    "InvalidSchemeError",
    "MethodNotApplicableError",
    "DomainError",
    "UnknownPresetError",
    "InvalidProblemError",
    "NotApplicableError",
    "GoldenShapeError",
    "NumericalError",
    "SingularSystemError",
    "IllPosedSchemeError",
    "RootFindingError",
    "GramMatrixError",
    "StudyLevelError",
    "quadrature_points",
    "validate_refinements",
    "parse_scheme_source",
    "parse_float_list",
    "parse_int_list",
    "validate_descending_params",
]
