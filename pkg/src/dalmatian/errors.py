"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigurationError -> 2,
InputError (and subclasses) -> 3, anything else -> 4.
"""


class DalmatianError(Exception):
    """Base class for package errors."""


class ConfigurationError(DalmatianError):
    """A run was requested with unusable settings (bad operator name,
    no eligible invariants, degenerate target, ...)."""


class InputError(DalmatianError):
    """Input data could not be used as supplied."""


class ParseError(InputError):
    """A data file is malformed (ragged row, unreadable cell, ...)."""


class SchemaError(InputError):
    """Column structure is invalid (duplicate header, wrong column kind)."""


class StructuralError(DalmatianError):
    """An expression references a column that does not exist.

    Distinct from an undefined evaluation: this is a programming error in
    the caller, not a domain violation in the data.
    """


class DegenerateTargetError(ConfigurationError):
    """Target values have zero dispersion where dispersion is required."""
