"""Exception hierarchy shared by every module in the package."""


class FingerprintError(Exception):
    """Base class for all errors raised by qfingerprint."""


class MatrixFormatError(FingerprintError, ValueError):
    """A matrix or protocol text document could not be parsed."""


class DimensionMismatch(FingerprintError, ValueError):
    pass


class IndexOutOfRange(FingerprintError, IndexError):
    pass


class NotSquare(FingerprintError, ValueError):
    pass


class ConvergenceFailure(FingerprintError, ArithmeticError):
    """Jacobi SVD did not reach its off-diagonal threshold within the sweep cap."""


class NotSymmetric(FingerprintError, ValueError):
    pass


class NotPSD(FingerprintError, ValueError):
    pass


class DecompositionMismatch(FingerprintError, ValueError):
    """Factor pairs do not match the family they claim to decompose."""


class DegenerateWidth(FingerprintError, ValueError):
    """Row or column width is zero, so the fingerprint cannot be normalized."""


class NotNormalized(FingerprintError, ValueError):
    pass


class InvalidConfig(FingerprintError, ValueError):
    pass


class ValidationExhausted(FingerprintError, RuntimeError):
    """No re-seeded attempt produced a protocol meeting the thresholds."""


class ConsistencyError(FingerprintError, AssertionError):
    """Certified lower and upper bounds contradict each other."""
