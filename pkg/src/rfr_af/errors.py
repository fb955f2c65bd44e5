"""Exception hierarchy shared by all modules.

Every error raised on purpose by the package derives from :class:`RFRError`.
The CLI maps the classes onto distinct exit codes.
"""


class RFRError(Exception):
    """Base class for package errors."""


class NumericError(RFRError, ArithmeticError):
    """A numerical computation produced an unusable result."""


class NonFiniteValue(NumericError):
    """An activation function returned NaN or infinity at a quadrature node."""


class NegativeMuStar(NumericError):
    """The nonlinearity moment came out clearly negative (quadrature failure)."""


class InvalidMoments(RFRError, ValueError):
    """A moment triple violates mu2 >= mu0^2 + mu1^2."""


class InterpolationThreshold(RFRError, ValueError):
    """The ridgeless objective is undefined at psi1 == psi2."""


class DegenerateLeadingCoefficient(NumericError):
    """Every polynomial coefficient vanished."""


class RootNotFound(NumericError):
    """A root guaranteed by the theory could not be located."""


class TieBreakAmbiguous(RFRError):
    """Parameters sit on a threshold where the optimum is not unique."""


class SolverDiverged(NumericError):
    """An iterative solver hit its bracket cap without converging."""


class SolveFailed(NumericError):
    """A linear solve or factorization failed."""
