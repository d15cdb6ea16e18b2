"""
Workbench exceptions

Every failure raised by the symbolic core derives from WorkbenchError, so callers
(the CLI in particular) can map whole families of failures to exit codes.
"""

from typing import Optional


class WorkbenchError(Exception):
    """Base class for all workbench failures."""


class RegistryConflictError(WorkbenchError):
    """A generator was registered twice with different weights."""


class LocalizationError(WorkbenchError):
    """A negative power was requested for a generator that is not invertible."""


class ContractViolation(WorkbenchError):
    """
    An internal identity that must hold did not.

    Examples: residual p̄ after reduction, a nonzero (h∂)^{n-1} flatness
    coefficient, a λ left in an emitted condition, a route mismatch.
    """

    def __init__(self, message: str, residual: Optional[object] = None):
        super().__init__(message)
        self.residual = residual


class NonGenericError(WorkbenchError):
    """A coefficient that must be invertible vanished (e.g. t_n = 0)."""


class ParseError(WorkbenchError):
    """Syntax, dialect or unknown-name error in the expression language."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


class BindingError(WorkbenchError):
    """Numeric evaluation failed: unbound generator, ε-guard, degenerate fit."""


class UsageError(WorkbenchError):
    """Command-line arguments out of bounds."""
