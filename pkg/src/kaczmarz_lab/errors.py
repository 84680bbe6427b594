"""Exception types raised across the package."""


class KaczmarzError(Exception):
    pass


class ZeroRowError(KaczmarzError, ValueError):
    def __init__(self, row):
        super().__init__(f"row {row} has zero Euclidean norm")
        self.row = row


class DimensionMismatch(KaczmarzError, ValueError):
    pass


class NotStandardized(KaczmarzError, ValueError):
    pass


class EmptyRange(KaczmarzError, ValueError):
    pass


class Converged(KaczmarzError):
    """All residuals are within tolerance of zero; residual weights are undefined."""


class NeedTwoRows(KaczmarzError, ValueError):
    pass


class InvalidDistribution(KaczmarzError, ValueError):
    pass


class NotASolution(KaczmarzError, ValueError):
    pass


class ZeroResidual(KaczmarzError, ValueError):
    pass


class TooLarge(KaczmarzError, ValueError):
    pass
