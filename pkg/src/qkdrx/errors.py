"""Exception hierarchy shared by all modules."""


class QkdrxError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QkdrxError, ValueError):
    """A parameter violates a physical invariant.

    ``field`` names the offending parameter (``section.key`` when raised
    while resolving a configuration).
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(QkdrxError, ValueError):
    """A function argument lies outside its mathematical domain."""


class InfeasibleBiasError(QkdrxError):
    """No grid point satisfies the transit-frequency constraint."""


class UnphysicalCovarianceError(QkdrxError):
    """A covariance matrix has a symplectic eigenvalue below the vacuum level."""

    def __init__(self, message: str, value: float):
        self.value = value
        super().__init__(f"{message} (offending value {value!r})")


class ConfigError(QkdrxError):
    """Malformed configuration text, unknown key or invalid value."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
