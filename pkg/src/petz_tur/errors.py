"""Exception hierarchy.

Validation problems (bad shapes, non-Hermitian input, out-of-range
parameters) derive from :class:`ValidationError`; failures of the numerics
themselves (eigensolver, quadrature, branch evaluation) derive from
:class:`NumericalError`.  The CLI maps the two families to distinct exit
codes.
"""


class PetzTurError(Exception):
    """Base class for all package errors."""


class ValidationError(PetzTurError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(PetzTurError, ArithmeticError):
    """A numerical routine could not deliver its contract."""


class NotHermitian(ValidationError):
    pass


class NotDensityMatrix(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class InvalidAlpha(ValidationError):
    pass


class UnsupportedGenerator(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class SupportViolation(ValidationError):
    pass


class DegenerateTriple(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class BranchCutError(NumericalError):
    pass
