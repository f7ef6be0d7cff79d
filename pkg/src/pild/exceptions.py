"""Exception types raised across the package."""


class PILDError(Exception):
    """Base class for all package errors."""


class ValidationError(PILDError, ValueError):
    """Malformed input: shapes, Hermiticity, grid parameters, config fields."""


class BudgetError(PILDError, MemoryError):
    """A requested tensor or path enumeration exceeds the configured budget."""


class NumericalError(PILDError, ArithmeticError):
    """Quadrature or ODE failure, or non-finite intermediates."""
