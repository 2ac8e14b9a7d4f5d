"""Exception hierarchy shared across the package."""


class RationevalError(Exception):
    """Base class for all library errors."""


class ParseError(RationevalError):
    """Malformed dataset row; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(RationevalError):
    """An instance violates a structural invariant."""


class MissingAnnotationError(RationevalError):
    """Neither per-labeler rationales nor pre-aggregated sets are present."""


class EmptyInputError(RationevalError):
    """Text is empty or whitespace-only where content is required."""


class StrategyError(RationevalError):
    """A perturbation strategy cannot handle the requested token."""


class TrainingError(RationevalError):
    """The builtin classifier cannot be trained on the given corpus."""


class TransportError(RationevalError):
    """A model backend is unreachable or failed mid-request."""


class StartupError(TransportError):
    """External backend did not complete the handshake in time."""


class ProtocolError(RationevalError):
    """External backend replied with a malformed message."""


class CapabilityError(RationevalError):
    """External backend advertises capabilities this library cannot use."""


class SurrogateFitError(RationevalError):
    """The local surrogate design matrix is degenerate."""


class SizeError(RationevalError):
    """Exhaustive enumeration was requested above the size limit."""


class DomainError(RationevalError):
    """Metric arguments fall outside their required domain."""


class EmptyWeightError(RationevalError):
    """All explanation weights are zero; no weighted set can be formed."""


class ConfigError(RationevalError):
    """Invalid run or explainer configuration."""
