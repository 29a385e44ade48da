"""Exception and warning types raised across the package."""


class QslError(ValueError):
    """Base class for all errors raised by qslbound."""


class NotHermitian(QslError):
    pass


class NonHermitianSample(NotHermitian):
    """A Hamiltonian sample on the propagation grid is not Hermitian."""


class DimMismatch(QslError):
    pass


class OutOfRange(QslError):
    pass


class InvalidState(QslError):
    """Matrix is not a density matrix (trace, positivity or shape)."""


class SingularPower(QslError):
    """Non-positive exponent requested for a rank-deficient state."""


class SingularLog(QslError):
    pass


class RequiresFullRank(QslError):
    pass


class NonPositivePurity(QslError):
    """Relative purity vanished; the Renyi divergence is infinite."""


class SingularPhi(QslError):
    """The Renyi prefactor denominator ``1 + (1 - a) ln lambda_min`` is ~0."""


class VanishingOverlap(QslError):
    """``Tr(A U B U^dag)`` vanished; the min-relative entropy diverges."""


class ZeroHorizon(QslError):
    pass


class ConfigError(QslError):
    pass


class DegenerateStateWarning(UserWarning):
    """Support projector requested for the zero matrix."""
