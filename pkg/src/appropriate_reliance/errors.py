"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Optional, Sequence


class RelianceError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(RelianceError, ValueError):
    """A trial or log row violates the trial schema.

    ``line`` is 1-based (header = line 1 for CSV) when known; ``column`` names
    the offending field.
    """

    def __init__(
        self,
        message: str,
        *,
        column: Optional[str] = None,
        line: Optional[int] = None,
        trial_id: Optional[str] = None,
    ) -> None:
        self.column = column
        self.line = line
        self.trial_id = trial_id
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if trial_id is not None:
            where.append(f"trial {trial_id!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class UnknownLabelError(SchemaError):
    pass


class MissingColumnError(SchemaError):
    pass


class DuplicateKeyError(SchemaError):
    def __init__(self, key: tuple, lines: Sequence[int]) -> None:
        self.key = key
        self.lines = tuple(lines)
        super().__init__(
            f"duplicate (participant_id, trial_id) key {key!r} on lines "
            + ", ".join(str(n) for n in self.lines),
            line=self.lines[-1],
        )


class EmptyLogError(SchemaError):
    pass


class DomainError(RelianceError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(RelianceError, ValueError):
    """Statistical test preconditions are not met (sample size, variance)."""


class ConfigError(RelianceError, ValueError):
    """Invalid simulator configuration."""


class PlotError(RelianceError, ValueError):
    """Nothing in the report can be placed in reliance space."""
