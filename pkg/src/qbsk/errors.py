"""Exception types shared across the package."""


class QbskError(Exception):
    """Base class for all library errors."""


class NonConvergent(QbskError):
    """A truncated series hit its term budget before meeting the tail bound."""


class DomainError(QbskError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class EvalError(QbskError, ArithmeticError):
    """Numerical evaluation failed (log/sqrt of a negative, division by zero)."""


class DepthExceeded(QbskError):
    """Adaptive quadrature reached its maximum recursion depth."""


class MissingDerivative(QbskError):
    """A bound needs a derivative the test function does not provide."""


class DegenerateWeight(QbskError, ValueError):
    """The Lipschitz weight alpha*x^2 + beta*x vanishes on the grid."""


class ConfigError(QbskError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ParseError(QbskError, ValueError):
    """Malformed expression. ``column`` is 1-based."""

    def __init__(self, column, expected, source=""):
        self.column = column
        self.expected = expected
        self.source = source
        super().__init__(f"column {column}: expected {expected}")
