"""Exception types shared across the package."""


class DiagramError(Exception):
    """Base class for all package errors."""


class ParseError(DiagramError):
    """Malformed 2GD or move-script text."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        self.message = message
        super().__init__(f"line {lineno}: {message}")


class ValidationError(DiagramError):
    """A structural invariant failed; carries the offending checks."""

    def __init__(self, failures):
        self.failures = list(failures)
        detail = "; ".join(f"{name} at {locus}: {msg}" for name, locus, msg in self.failures)
        super().__init__(detail or "validation failed")


class DomainError(DiagramError):
    """An operation precondition does not hold (not a structural defect)."""
