"""Exception hierarchy shared by every module."""


class TsgeoError(Exception):
    """Base class for all library errors."""


class DomainError(TsgeoError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class NotEquivalentError(DomainError):
    """Two process specs fail the equivalent-martingale-measure conditions."""


class ConvergenceError(TsgeoError, ArithmeticError):
    """A series, quadrature, extrapolation or optimizer failed to converge."""


class MassError(ConvergenceError):
    """An inverted density grid does not integrate to one."""
