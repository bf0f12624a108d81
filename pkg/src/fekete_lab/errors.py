"""Exception and warning types raised across the package."""

from __future__ import annotations


class FeketeLabError(Exception):
    """Base class for all package errors."""


class EvaluationError(FeketeLabError, ArithmeticError):
    """A potential or kernel evaluation produced a non-finite value."""


class CoincidentPointsError(FeketeLabError, ValueError):
    """Two points of a configuration coincide, so the energy is infinite.

    Kept separate from floating point overflow: the configuration itself is
    degenerate, not the arithmetic.
    """

    def __init__(self, i: int, j: int):
        super().__init__(f"points {i} and {j} coincide; energy is +inf")
        self.pair = (i, j)


class NonConvergenceError(FeketeLabError, RuntimeError):
    """The optimizer missed its gradient tolerance on every restart."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class CapabilityError(FeketeLabError, TypeError):
    """An operation needs a capability the model does not provide."""


class IllConditionedError(FeketeLabError, ArithmeticError):
    """The monomial moment matrix is numerically singular."""

    def __init__(self, degree: int, condition: float):
        super().__init__(
            f"moment matrix ill-conditioned at degree {degree} (cond ~ {condition:.3e})"
        )
        self.degree = degree
        self.condition = condition


class AssemblyError(FeketeLabError, RuntimeError):
    """A concentration matrix has eigenvalues outside the rounding band of [0, 1]."""


class EigensolverError(FeketeLabError, RuntimeError):
    """Eigenpairs failed the residual check."""


class ZeroModulusError(FeketeLabError, ValueError):
    """Gradient of |f| requested at a zero of f."""


class ResampleError(FeketeLabError, RuntimeError):
    """A random trial degenerated (e.g. f vanished at every node)."""


class MissingDataError(FeketeLabError, KeyError):
    """Requested n values are absent from a sweep."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"sweep has no results for n in {self.missing}")


class DomainWarning(UserWarning):
    """An argument lies outside the region where an estimate is meaningful."""
