"""Command-line error handling.

Converts exceptions raised by the pipeline into a JSON error envelope on
stderr and a process exit code:

- 1: usage errors (reported by click itself)
- 2: domain, precondition, infeasibility and configuration errors
- 3: algorithmic failures (capability limits, failed embeddings, aborted
  sampling, violated invariants, invalid operations)
- 4: malformed input and I/O errors
"""

import json
import logging
from typing import Any

import click
from pydantic import ValidationError

from app.exceptions import (
    BusinessLogicException,
    CapabilityException,
    ConfigurationError,
    DomainException,
    EmbeddingFailureException,
    InfeasibleException,
    InvalidOperationException,
    InvariantViolationException,
    PreconditionException,
    SamplingAbortedException,
    ValidationException,
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_FAILURE = 3
EXIT_IO = 4

_EXIT_CODES: list[tuple[type[BaseException], int]] = [
    (DomainException, EXIT_PRECONDITION),
    (PreconditionException, EXIT_PRECONDITION),
    (InfeasibleException, EXIT_PRECONDITION),
    (ConfigurationError, EXIT_PRECONDITION),
    (CapabilityException, EXIT_FAILURE),
    (EmbeddingFailureException, EXIT_FAILURE),
    (SamplingAbortedException, EXIT_FAILURE),
    (InvariantViolationException, EXIT_FAILURE),
    (InvalidOperationException, EXIT_FAILURE),
    (ValidationException, EXIT_IO),
    (ValidationError, EXIT_IO),
    (OSError, EXIT_IO),
]


def build_error_envelope(error: str, details: dict[str, Any], code: str | None = None) -> dict[str, Any]:
    """JSON envelope written to stderr for every failed command."""
    return {"error": error, "code": code, "details": details}


def exit_code_for(error: BaseException) -> int | None:
    """Exit code for a handled exception, None for anything unexpected."""
    for error_type, code in _EXIT_CODES:
        if isinstance(error, error_type):
            return code
    if isinstance(error, BusinessLogicException):
        return EXIT_FAILURE
    return None


def _details(error: BaseException) -> dict[str, Any]:
    if isinstance(error, EmbeddingFailureException):
        return {"stage": error.stage, "cause": error.cause, "diagnostics": error.diagnostics}
    if isinstance(error, SamplingAbortedException):
        return {"failures": error.failures, "attempts": error.attempts, "last_error": error.last_error}
    if isinstance(error, InvariantViolationException):
        return {"invariant": error.invariant}
    if isinstance(error, ValidationError):
        return {
            "errors": [
                {"field": ".".join(str(x) for x in err["loc"]), "message": err["msg"]}
                for err in error.errors()
            ]
        }
    if isinstance(error, OSError):
        return {"path": error.filename, "message": error.strerror}
    return {}


def report_error(error: BaseException) -> int | None:
    """Write the envelope for a handled exception and return its exit code.

    Returns None, writing nothing, when the exception is not one the CLI
    handles; the caller re-raises it.
    """
    code = exit_code_for(error)
    if code is None:
        return None

    if isinstance(error, BusinessLogicException):
        message, error_code = error.message, error.error_code
    elif isinstance(error, ConfigurationError):
        message, error_code = str(error), "CONFIGURATION_ERROR"
    elif isinstance(error, ValidationError):
        message, error_code = "Input document failed validation", "VALIDATION_FAILED"
    else:
        message, error_code = str(error), "IO_ERROR"

    if code == EXIT_FAILURE:
        logger.error(f"Command failed: {message}")
    else:
        logger.warning(f"Command rejected: {message}")
    envelope = build_error_envelope(message, _details(error), error_code)
    click.echo(json.dumps(envelope, default=str), err=True)
    return code
