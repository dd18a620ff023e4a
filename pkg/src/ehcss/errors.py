"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class ConfigError(ValueError):
    """A configuration file or override could not be parsed or validated."""


class BracketError(ValueError):
    """A root search bracket does not contain a sign change."""
