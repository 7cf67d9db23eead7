"""Exception types shared across the package."""


class HeislabError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(HeislabError, ValueError):
    """Bad argument: dimension mismatch, non-positive scale, etc."""


class DomainError(HeislabError):
    """A map was evaluated outside its declared domain."""


class PreconditionError(HeislabError):
    """An operation's precondition failed; carries the offending residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConstraintError(HeislabError):
    """Optimizer could not meet an endpoint constraint within tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotSymplecticError(HeislabError):
    """A map failed the symplecticity/exactness compatibility check."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IntegrationError(HeislabError):
    """Implicit solver diverged at some step."""

    def __init__(self, message, step=None, residual=None):
        super().__init__(message)
        self.step = step
        self.residual = residual


class ConsistencyError(HeislabError):
    """Internal cross-check failed (e.g. a composed map is not vertical)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TheoremViolationError(HeislabError):
    """A certified inequality came out reversed: an implementation bug."""


class ConfigError(HeislabError):
    """Run configuration is invalid; message carries the field path."""


class DslParseError(HeislabError):
    """Expression source could not be parsed.

    Attributes:
        offset: byte offset of the failure in the source string.
        expected: description of what the parser expected there.
        excerpt: the source line around the failure.
    """

    def __init__(self, offset, expected, excerpt):
        super().__init__(f"parse error at offset {offset}: expected {expected}")
        self.offset = offset
        self.expected = expected
        self.excerpt = excerpt


class EvalError(HeislabError):
    """Expression evaluation failed; carries the path to the failing node."""

    def __init__(self, message, path=()):
        super().__init__(f"{message} (at node {'/'.join(path) or 'root'})")
        self.path = tuple(path)


class UnsupportedNodeError(HeislabError):
    """A node kind is not allowed in this context (e.g. abs under grad)."""
