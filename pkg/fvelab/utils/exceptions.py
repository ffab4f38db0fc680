from typing import Optional, Tuple


class FveLabException(Exception):
    """Base exception for the FVE toolkit"""
    pass


class InputError(FveLabException):
    """Invalid usage or parameters supplied by the caller"""
    pass


class ParameterError(InputError):
    """Exception raised when a numeric parameter is out of range"""
    pass


class InvalidSchemeError(InputError):
    """Exception raised when a scheme violates its ordering/symmetry rules"""
    pass


class MethodNotApplicableError(InputError):
    """Exception raised when a design method does not apply to the order"""
    pass


class DomainError(InputError):
    """Exception raised when a closed-form family is evaluated off its domain"""
    pass


class UnknownPresetError(InputError):
    """Exception raised when a preset name is not registered"""
    pass


class InvalidProblemError(InputError):
    """Exception raised when a boundary value problem is not admissible"""
    pass


class NotApplicableError(InputError):
    """Exception raised when an operation needs data the scheme cannot provide"""
    pass


class GoldenShapeError(InputError):
    """Exception raised when a report and a golden table cannot be aligned"""
    pass


class NumericalError(FveLabException):
    """Numerical failure during a computation"""
    pass


class SingularSystemError(NumericalError):
    """Exception raised when the banded factorization meets a vanishing pivot"""

    def __init__(self, message: str, row: int, volume: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.row = row
        self.volume = volume


class IllPosedSchemeError(NumericalError):
    """Exception raised when the MMD shape system is singular"""
    pass


class RootFindingError(NumericalError):
    """Exception raised when a bracketed root search has no sign change"""
    pass


class GramMatrixError(NumericalError):
    """Exception raised when a norm Gram matrix is not positive definite"""
    pass


class StudyLevelError(NumericalError):
    """Exception raised when one refinement level of a study fails numerically"""

    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level
