"""Base exceptions with user-ready messages.

Every failure the pipeline reports carries a message that can be shown
directly on the command line and a stable error code used in the JSON
error envelope. The CLI maps the classes below to process exit codes in
app/utils/cli_error_handlers.py.
"""

from typing import Any


class ConfigurationError(Exception):
    """Raised when application configuration is invalid."""

    pass


class BusinessLogicException(Exception):
    """Base exception class for pipeline errors.

    All exceptions include user-ready messages that can be printed directly
    without caller-side message construction.
    """

    def __init__(self, message: str, error_code: str) -> None:
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class DomainException(BusinessLogicException):
    """Exception raised when an argument lies outside an operation's domain."""

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="DOMAIN_ERROR")


class PreconditionException(BusinessLogicException):
    """Exception raised when a documented hypothesis of an operation fails."""

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="PRECONDITION_FAILED")


class InfeasibleException(BusinessLogicException):
    """Exception raised when a required combinatorial object cannot be built."""

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="INFEASIBLE")


class CapabilityException(BusinessLogicException):
    """Exception raised when an exact method is asked to go beyond its size limit."""

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="CAPABILITY_EXCEEDED")


class EmbeddingFailureException(BusinessLogicException):
    """Exception raised when a stage of the embedding algorithm fails.

    Carries the failing stage tag and a diagnostics mapping describing the
    state at the moment of failure.
    """

    def __init__(self, stage: str, cause: str, diagnostics: dict[str, Any] | None = None) -> None:
        self.stage = stage
        self.cause = cause
        self.diagnostics = diagnostics or {}
        message = f"Embedding failed during {stage}: {cause}"
        super().__init__(message, error_code="EMBEDDING_FAILED")


class SamplingAbortedException(BusinessLogicException):
    """Exception raised when a sampler fails on more than half of its draws."""

    def __init__(self, failures: int, attempts: int, last_error: str | None = None) -> None:
        self.failures = failures
        self.attempts = attempts
        self.last_error = last_error
        message = f"Sampling aborted after {failures} failures in {attempts} draws"
        if last_error:
            message += f" (last error: {last_error})"
        super().__init__(message, error_code="SAMPLING_ABORTED")


class InvariantViolationException(BusinessLogicException):
    """Exception raised when an asserted invariant does not hold."""

    def __init__(self, invariant: str, detail: str) -> None:
        self.invariant = invariant
        message = f"Invariant {invariant} violated: {detail}"
        super().__init__(message, error_code="INVARIANT_VIOLATION")


class InvalidOperationException(BusinessLogicException):
    """Exception raised when an operation cannot be performed in the current state."""

    def __init__(self, operation: str, cause: str) -> None:
        self.operation = operation
        self.cause = cause
        message = f"Cannot {operation} because {cause}"
        super().__init__(message, error_code="INVALID_OPERATION")


class ValidationException(BusinessLogicException):
    """Exception raised for malformed input files or documents."""

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="VALIDATION_FAILED")
