"""Exception types raised across the package."""


class FbmcBerError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedFilterOrder(FbmcBerError):
    """Requested overlap factor has no known frequency-sampling design."""


class UnsupportedSpreading(FbmcBerError):
    """EGF spreading factor outside the supported range."""


class DegenerateFilter(FbmcBerError):
    """Filter has no energy and cannot be normalized."""


class ConstellationError(FbmcBerError):
    """Invalid constellation order (not a power of two / not square)."""


class EnumerationBudgetExceeded(FbmcBerError):
    """Offset enumeration would exceed the configured term budget."""

    def __init__(self, required, budget):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            f"enumeration needs {self.required} offsets, budget is {self.budget}"
        )


class ShapeError(FbmcBerError):
    """Array dimensions incompatible with the requested operation."""


class RangeError(FbmcBerError):
    """Index or support range outside the available signal."""


class GridError(FbmcBerError):
    """SNR grids of two result sets do not line up."""
