"""Exception hierarchy; the CLI maps each family to an exit code."""


class FqdynError(Exception):
    exit_code = 3


class ParseError(FqdynError):
    """Malformed input text or JSON."""

    exit_code = 2

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ValidationError(FqdynError):
    """Input is well formed but violates a mathematical requirement."""

    exit_code = 3


class FieldError(ValidationError):
    pass


class RelationError(ValidationError):
    """A coefficient vector is not an idempotent relation."""


class CapError(FqdynError):
    """A resource cap would be exceeded."""

    exit_code = 4


class ExactnessError(FqdynError):
    """Model-level counts cannot be certified equal to the true counts."""

    exit_code = 4
