"""Exception types raised across the package."""


class PncError(Exception):
    """Base class for all errors raised by :mod:`mimopnc`."""


class DimensionError(PncError, ValueError):
    pass


class RankDeficient(PncError, ValueError):
    pass


class UnequalSingularValueProducts(PncError, ValueError):
    """The two channel matrices do not share a singular-value product."""

    def __init__(self, product_1, product_2):
        self.product_1 = float(product_1)
        self.product_2 = float(product_2)
        super().__init__(
            f"singular-value products differ: {self.product_1:.12g} vs {self.product_2:.12g}"
        )


class ConvergenceError(PncError, RuntimeError):
    pass


class EmptyGains(PncError, ValueError):
    pass


class AlphaOutOfRange(PncError, ValueError):
    pass


class EmptyGrid(PncError, ValueError):
    pass


class NotNormalized(PncError, ValueError):
    pass


class BadOrders(PncError, ValueError):
    pass


class IndexOutOfRange(PncError, ValueError):
    pass
