"""Exception types shared across the package."""


class QEraserError(Exception):
    """Base class for all package errors."""


class DimensionError(QEraserError, ValueError):
    """Operand shapes do not fit together."""


class ContractViolation(QEraserError, ValueError):
    """A numerical precondition or postcondition does not hold."""


class ConfigError(QEraserError, ValueError):
    """An apparatus configuration is physically invalid."""


class UndefinedConditionalError(QEraserError):
    """The requested detector branch has zero click probability."""
