"""Exception hierarchy shared by all modules."""


class BogofockError(Exception):
    pass


class DimensionError(BogofockError, ValueError):
    """Shapes of the operands do not fit together."""


class DomainError(BogofockError, ValueError):
    """Input lies outside the domain of the operation (e.g. ||K|| >= 1)."""


class PreconditionError(BogofockError, ValueError):
    """A documented precondition of an operation does not hold."""


class QuadratureError(BogofockError, RuntimeError):
    """Adaptive quadrature hit its subdivision cap."""


class InvariantViolation(BogofockError, RuntimeError):
    """Something that cannot happen for valid input happened anyway."""
