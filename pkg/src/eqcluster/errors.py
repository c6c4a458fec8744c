"""Exception types shared across the package.

Exit codes used by the CLI: 2 for validation errors, 3 for I/O errors
(plain OSError), 4 for guard refusals.
"""


class EqclusterError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(EqclusterError):
    """Invalid input data, malformed files, or violated preconditions."""

    exit_code = 2


class CoverageError(ValidationError):
    """A document has no usable token vectors at all."""


class GuardRefusal(EqclusterError):
    """A computation was refused because it exceeds a safety bound."""

    exit_code = 4
