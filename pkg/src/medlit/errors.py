"""Exception hierarchy shared across the package.

Errors are split along one axis that matters operationally: whether a
failed service call may be retried (`RetryableServiceError`) or must
abort immediately (everything else).
"""

from __future__ import annotations


class MedlitError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(MedlitError):
    """Metadata CSV could not be ingested (bad header, undecodable bytes)."""


class ValidationError(MedlitError):
    """A document or record violates its structural invariants."""


class StorageError(MedlitError):
    """Document store I/O or locking failure."""


class WireFormatError(MedlitError):
    """A service result document does not conform to the wire schema."""


class QueryError(MedlitError):
    """Base class for query parsing/evaluation errors."""


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        suffix = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at line {line}, column {column}{suffix}")


class QuerySemanticError(QueryError):
    """Structurally valid query that cannot be evaluated (bad alias, shadowing)."""


class ServiceError(MedlitError):
    """Base class for remote analysis service failures."""


class AuthError(ServiceError):
    """Rejected credentials. Never retried."""


class RetryableServiceError(ServiceError):
    """Transient service failure (429 or 5xx). May carry a retry-after hint."""

    def __init__(self, message: str, retry_after: float | None = None, status: int | None = None):
        self.retry_after = retry_after
        self.status = status
        super().__init__(message)


class JobFailedError(ServiceError):
    """The analysis job finished with status 'failed'."""


class RetriesExhaustedError(ServiceError):
    """All attempts allowed by the retry policy were consumed."""

    def __init__(self, message: str, attempts: int, cause: Exception | None = None):
        self.attempts = attempts
        self.cause = cause
        super().__init__(f"{message} after {attempts} attempts" + (f": {cause}" if cause else ""))
