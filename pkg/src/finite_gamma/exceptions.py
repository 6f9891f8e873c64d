"""Exception hierarchy for the finite gamma-factor package."""


class GammaError(Exception):
    """Base class for every error raised by this package."""


class BudgetExceededError(GammaError, ValueError):
    """Requested group is larger than the configured enumeration cap."""


class NotInAmbientError(GammaError, ValueError):
    """Element lies outside the ambient group of a coset table."""


class NotUnipotentError(GammaError, ValueError):
    """Matrix is not upper unitriangular."""


class DirectionMismatchError(GammaError, ValueError):
    """Functions of incompatible character directions were combined."""


class SingularMatrixError(GammaError, ArithmeticError):
    """Linear system is rank deficient at the working tolerance."""


class ClusterAmbiguityError(GammaError, ArithmeticError):
    """Two eigenvalue clusters are too close to separate reliably."""


class NotScalarError(GammaError, ArithmeticError):
    """Operator expected to act by a scalar deviates from every scalar."""


class NoNonvanishingPairError(GammaError, ArithmeticError):
    """Every probe pairing vanished, so no ratio can be formed."""


class InconsistentRatioError(GammaError, ArithmeticError):
    """Two nonvanishing pairs produced different functional-equation ratios."""


class DecompositionError(GammaError, ArithmeticError):
    """Gelfand-Graev decomposition failed its bookkeeping checks."""


class CacheError(GammaError, OSError):
    """Cache file could not be read or written."""
