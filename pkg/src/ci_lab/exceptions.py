"""
Structured exception classes for ci-lab.

All exceptions include context (timestamp, variable, bound, etc.) for observability.
Follows exception-only failure pattern - no fallbacks, no imputation, no silent errors.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any


class CILabException(Exception):
    """
    Base exception for all ci-lab errors.

    All exceptions include ISO 8601 timestamp for observability.
    """

    def __init__(self, message: str, timestamp: datetime | None = None) -> None:
        """
        Initialize base exception.

        Args:
            message: Human-readable error description
            timestamp: When error occurred (defaults to current UTC time)
        """
        self.timestamp = timestamp or datetime.now(timezone.utc)
        self.message = message
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        """
        Convert exception to dictionary for logging/serialization.

        Returns:
            Dictionary with exception details
        """
        return {
            "timestamp": self.timestamp.isoformat(),
            "error_type": self.__class__.__name__,
            "message": self.message,
        }


class TableValidationException(CILabException):
    """
    Joint table construction failure.

    Raised when entries, supports or distributions violate table invariants.
    """

    def __init__(
        self,
        message: str,
        field: str | None = None,
        value: object | None = None,
        constraint: str | None = None,
        timestamp: datetime | None = None,
    ) -> None:
        """
        Initialize validation exception.

        Args:
            message: Human-readable error description
            field: Variable or entry that failed validation
            value: Offending value
            constraint: Constraint that was violated
            timestamp: When error occurred (defaults to current UTC time)
        """
        super().__init__(message, timestamp)
        self.field = field
        self.value = value
        self.constraint = constraint

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update(
            {
                "field": self.field,
                "value": None if self.value is None else str(self.value),
                "constraint": self.constraint,
            }
        )
        return base

    def __str__(self) -> str:
        """String representation with context."""
        parts = []
        if self.field:
            parts.append(f"field: {self.field}")
        if self.value is not None:
            parts.append(f"value: {self.value}")
        if self.constraint:
            parts.append(f"constraint: {self.constraint}")
        return f"{self.message} [{', '.join(parts)}]" if parts else self.message


class SumNotOneException(TableValidationException):
    """Probabilities do not sum to exactly 1."""


class NegativeProbabilityException(TableValidationException):
    """A probability is negative."""


class UnknownOutcomeException(TableValidationException):
    """An outcome label is not in its variable's support."""


class DuplicateAssignmentException(TableValidationException):
    """The same full assignment appears twice."""


class DuplicateVariableException(TableValidationException):
    """A variable name is already used in the schema."""


class MissingValueException(TableValidationException):
    """A value map does not cover a variable's support."""


class UnknownVariableException(CILabException):
    """A variable name is not part of the schema."""

    def __init__(self, variable: str, timestamp: datetime | None = None) -> None:
        super().__init__(f"Unknown variable: {variable}", timestamp)
        self.variable = variable

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"variable": self.variable})
        return base


class OverlappingSetsException(CILabException):
    """Variable sets of a statement are not pairwise disjoint."""

    def __init__(
        self,
        message: str,
        overlap: frozenset[str] | set[str] = frozenset(),
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.overlap = frozenset(overlap)

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"overlap": sorted(self.overlap)})
        return base

    def __str__(self) -> str:
        if self.overlap:
            return f"{self.message} [overlap: {', '.join(sorted(self.overlap))}]"
        return self.message


class ZeroProbabilityEventException(CILabException):
    """
    Conditioning event has probability zero.

    The conditional distribution is undefined; callers must surface this rather
    than impute a value.
    """

    def __init__(
        self,
        message: str,
        event: dict[str, str] | None = None,
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.event = dict(event or {})

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"event": self.event})
        return base

    def __str__(self) -> str:
        if self.event:
            event_str = ", ".join(f"{k}={v}" for k, v in self.event.items())
            return f"{self.message} [{event_str}]"
        return self.message


class BoundExceededException(CILabException):
    """A configured size bound was exceeded."""

    def __init__(
        self,
        message: str,
        limit: int,
        actual: int,
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.limit = limit
        self.actual = actual

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"limit": self.limit, "actual": self.actual})
        return base

    def __str__(self) -> str:
        return f"{self.message} [limit: {self.limit}, actual: {self.actual}]"


class SupportTooLargeException(BoundExceededException):
    """Partition enumeration would exceed the support-size bound."""


class SchemaTooLargeException(BoundExceededException):
    """Schema product support exceeds the cell bound."""


class GridTooLargeException(BoundExceededException):
    """Exhaustive grid would contain too many tables."""


class RoleValidationException(CILabException):
    """Claim roles do not name valid, distinct schema variables."""

    def __init__(
        self,
        message: str,
        role: str | None = None,
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.role = role

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"role": self.role})
        return base


class ParseException(CILabException):
    """Statement text does not match the CI grammar."""

    def __init__(
        self,
        message: str,
        text: str,
        position: int,
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.text = text
        self.position = position

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"text": self.text, "position": self.position})
        return base

    def __str__(self) -> str:
        return f"{self.message} at position {self.position}: {self.text!r}"


class NotDeterministicException(CILabException):
    """A substitute variable is not a deterministic function of the causes."""

    def __init__(
        self,
        message: str,
        variable: str,
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.variable = variable

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"variable": self.variable})
        return base


class EmptyDataException(CILabException):
    """A dataset has no rows."""


class FormatException(CILabException):
    """
    Input file is malformed.

    Includes the file path and the underlying parse/validation detail.
    """

    def __init__(
        self,
        message: str,
        path: str | None = None,
        timestamp: datetime | None = None,
    ) -> None:
        super().__init__(message, timestamp)
        self.path = path

    def to_dict(self) -> dict[str, Any]:
        base = super().to_dict()
        base.update({"path": self.path})
        return base

    def __str__(self) -> str:
        return f"{self.message} [path: {self.path}]" if self.path else self.message
