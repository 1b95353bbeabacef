"""Exception hierarchy.

Every error raised on purpose by the package derives from `CapproxError`.
The CLI maps the two main branches onto exit codes: `ArgumentError` -> 2,
`NumericError` -> 3, `CapproxIOError` -> 4.
"""


class CapproxError(Exception):
    """Base class for all package errors."""


class ArgumentError(CapproxError, ValueError):
    """Invalid argument or violated precondition."""


class DimensionError(ArgumentError):
    """Ambient dimensions of the operands do not agree."""


class ResourceBudgetError(ArgumentError):
    """A requested enumeration or discretization exceeds its configured cap."""


class MeasurabilityError(ArgumentError):
    """A random input is not constant on the atoms of its sample space."""


class ParseError(ArgumentError):
    """Malformed expression source.

    Attributes
    ----------
    offset : int
        Byte offset (UTF-8) of the offending token in the source.
    expected : str
        Description of what the parser expected there.
    """

    def __init__(self, offset, expected, source=None):
        self.offset = offset
        self.expected = expected
        self.source = source
        super().__init__(f"parse error at offset {offset}: expected {expected}")


class SchemaError(ArgumentError):
    """JSON document does not match its schema; `path` names the field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericError(CapproxError, ArithmeticError):
    """Numerical failure: poles, domains, non-finite values, non-convergence."""


class PoleProximityError(NumericError):
    """A denominator came closer to zero than the pole tolerance.

    Attributes
    ----------
    point : ndarray or None
        The evaluation point that triggered the error.
    magnitude : float
        The offending denominator modulus (or distance to the nearest pole).
    """

    def __init__(self, message, point=None, magnitude=None):
        self.point = point
        self.magnitude = magnitude
        super().__init__(message)


class DomainError(NumericError):
    """Function evaluated outside its domain (log near 0)."""


class GeometryError(NumericError):
    """No valid contour or square cover for the requested parameters."""


class ConvergenceError(NumericError):
    """Iteration budget exhausted; `best_error` is the best value reached."""

    def __init__(self, message, best_error=None):
        self.best_error = best_error
        super().__init__(message)


class SelectionError(ConvergenceError):
    """Some atoms admit no index (or polynomial) meeting the tolerance.

    `atoms` maps atom index to the best error seen on that atom.
    """

    def __init__(self, message, atoms):
        self.atoms = dict(atoms)
        best = max(self.atoms.values()) if self.atoms else None
        super().__init__(message, best_error=best)


class UndefinedResultError(NumericError):
    """Result is mathematically undefined for the supplied data."""


class CapproxIOError(CapproxError, OSError):
    """File could not be read or written."""
