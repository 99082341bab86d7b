"""
Exception hierarchy shared by the library, the CLI and the HTTP routers
"""


class PermutedModelError(Exception):
    """Base class for every error raised by this package"""


class DimensionMismatch(PermutedModelError):
    pass


class InvalidDimensions(PermutedModelError):
    pass


class OutOfRange(PermutedModelError):
    pass


class DuplicateIndex(PermutedModelError):
    pass


class ConvergenceFailure(PermutedModelError):
    """SVD did not converge with any available LAPACK driver"""


class InstanceTooLarge(PermutedModelError):
    """Brute-force enumeration requested above the configured cap"""

    def __init__(self, n: int, cap: int, model: str):
        super().__init__(f"{model} MLE with n={n} exceeds the enumeration cap {cap}")
        self.n = n
        self.cap = cap
        self.model = model


class RankTooLarge(PermutedModelError):
    pass


class InvalidGamma(PermutedModelError):
    pass


class InvalidSeparation(PermutedModelError):
    """Separation margin xi must be positive"""


class DegenerateFit(PermutedModelError):
    pass


class MatrixParseError(PermutedModelError):
    pass


class ConfigurationError(PermutedModelError):
    pass


class DegenerateLeverage(UserWarning):
    """Leverage scores tie within the tolerance; the sort matching is not unique"""
