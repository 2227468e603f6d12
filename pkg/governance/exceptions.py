"""
Error hierarchy shared by every app.

The command layer maps each family onto a process exit code:
validation failures exit 1, degenerate distributions exit 2 and
parameter (usage) errors exit 64.
"""


class VbeError(Exception):
    """Base class for toolkit errors."""


class ValidationFailure(VbeError):
    """Input data breaks a schema or integrity rule."""


class SchemaError(ValidationFailure):
    """A file is missing required columns or has an unknown layout."""


class RowValidationError(ValidationFailure):
    """A single input row is malformed."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ReferentialIntegrityError(ValidationFailure):
    """A vote references an election that is not part of the dataset."""


class MissingBalanceError(ValidationFailure):
    """An account in a partition or vote has no recorded balance."""


class UnknownChoiceError(ValidationFailure):
    """A choice label is not in the alias table."""


class ArityError(ValidationFailure):
    """A choice index does not fit the election's arity."""


class DegenerateDistributionError(VbeError):
    """Token masses sum to zero, so no share vector exists."""


class EmptyInputError(ValidationFailure, DegenerateDistributionError):
    """An input file holds no data rows."""


class ParameterError(VbeError):
    """A caller passed an invalid parameter."""


class UnknownTheoremError(ParameterError):
    pass


class EmptySeriesError(ParameterError):
    """Aggregation was requested over zero windows."""


class PreconditionViolation(VbeError):
    """A transformation broke token conservation."""


class ReportWriteError(VbeError):
    """A report destination could not be written."""
