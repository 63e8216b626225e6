"""Error codes and the exception hierarchy."""

from enum import Enum

from ..common.error import ErrorInfo


class ErrorCode(str, Enum):
    """Error codes raised by the library."""

    # linalg
    NOT_POSITIVE_DEFINITE = "NOT_POSITIVE_DEFINITE"
    DOWNDATE_FAILURE = "DOWNDATE_FAILURE"
    SINGULAR_UPDATE = "SINGULAR_UPDATE"
    EIGENSOLVER_NOT_CONVERGED = "EIGENSOLVER_NOT_CONVERGED"

    # covariance
    DEGENERATE_FEATURE = "DEGENERATE_FEATURE"

    # sdp / sampler
    INPUT_NOT_PSD = "INPUT_NOT_PSD"
    NOT_CORRELATION = "NOT_CORRELATION"
    INFEASIBLE_S = "INFEASIBLE_S"

    # filter
    EMPTY_CLASS = "EMPTY_CLASS"

    # shared
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    INVALID_ARGUMENT = "INVALID_ARGUMENT"

    # storage
    PARSE_ERROR = "PARSE_ERROR"
    FILE_NOT_FOUND = "FILE_NOT_FOUND"


# Exit codes used by the CLI
EXIT_CODES: dict[ErrorCode, int] = {
    ErrorCode.INVALID_ARGUMENT: 2,
    ErrorCode.DIMENSION_MISMATCH: 2,
    ErrorCode.PARSE_ERROR: 3,
    ErrorCode.FILE_NOT_FOUND: 4,
}
DEFAULT_EXIT_CODE = 1


class KnockoffError(Exception):
    """Base class for every error raised by knockoffkit."""

    def __init__(self, code: ErrorCode, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"{self.code.value}: {self.message}"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.code, DEFAULT_EXIT_CODE)

    def to_error_info(self) -> ErrorInfo:
        """Convert the exception into the shared error schema."""
        return ErrorInfo(status=self.exit_code, code=self.code.value, message=self.message)


class LinalgError(KnockoffError):
    """Factorization, update or eigensolver failure."""


class CovarianceError(KnockoffError):
    """Covariance estimation failure."""


class SolverError(KnockoffError):
    """Knockoff SDP failure."""


class SamplerError(KnockoffError):
    """Knockoff sampling failure."""


class FilterError(KnockoffError):
    """Statistic or threshold failure."""


class DataError(KnockoffError):
    """Input file or shape failure."""
