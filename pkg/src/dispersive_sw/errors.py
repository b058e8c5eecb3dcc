"""Exception taxonomy shared across the package.

The hierarchy mirrors how failures are reported on the command line:
configuration problems exit with code 1, runtime/solver problems with
code 2, threshold violations in check mode with code 3.
"""


class DispersiveSwError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DispersiveSwError):
    """Inconsistent or unsupported setup (grids, orders, variants, configs)."""


class DimensionError(DispersiveSwError):
    """Array shapes do not match the owning grid or each other."""


class DomainError(DispersiveSwError):
    """State outside the admissible set (dry states, non-positive depth)."""


class NumericsError(DispersiveSwError):
    """Runtime numerical failure (NaN/Inf states, step-size underflow)."""


class FactorizationError(DispersiveSwError):
    """Matrix factorization failed (singular to working precision)."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class IngestionError(DispersiveSwError):
    """Malformed external data file."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number
