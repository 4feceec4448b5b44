"""Exception hierarchy.

Input problems (bad expressions, bad configs, non-realizable data) derive from
``InputError``; failures of the numerical machinery derive from
``NumericFailure``.  The CLI maps them to exit codes 2 and 3.
"""


class ParamWeightError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ParamWeightError, ValueError):
    """Invalid user input."""


class PolyParseError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class InvalidGermError(InputError):
    """The parameterization violates a structural requirement."""


class NotRealizableError(InputError):
    """Combinatorial data that no parameterized surface can produce."""


class NumericFailure(ParamWeightError, RuntimeError):
    """A numerical step could not be certified."""

    def __init__(self, message: str, *, depth: int | None = None, branch: str | None = None):
        super().__init__(message)
        self.depth = depth
        self.branch = branch


class SingularJacobianError(NumericFailure):
    pass


class ConvergenceError(NumericFailure):
    pass


class AmbiguityError(NumericFailure):
    """Point matching could not certify a unique assignment."""


class RefinementExhausted(NumericFailure):
    pass


class FiberCountChange(NumericFailure):
    """The fiber cardinality changed along a path; the loop radius is too large."""
