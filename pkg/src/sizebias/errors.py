"""Exception types shared across the package."""

from __future__ import annotations


class SizeBiasError(Exception):
    """Base class for all package errors."""


class InvalidPmf(SizeBiasError, ValueError):
    pass


class DegenerateCoordinate(SizeBiasError, ValueError):
    """A coordinate has zero mean or zero variance (1-based ``index``)."""

    def __init__(self, index: int, what: str = "mean or variance"):
        self.index = index
        super().__init__(f"coordinate {index} has zero {what}")


class NonPositiveInput(SizeBiasError, ValueError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"{field} must be strictly positive")


class NegativeT(SizeBiasError, ValueError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"threshold vector must be componentwise >= 0, got {t!r}")


class InvalidPatternDims(SizeBiasError, ValueError):
    pass


class NeighborhoodTooLarge(SizeBiasError, ValueError):
    def __init__(self, index: int, size: int, cap: int):
        self.index, self.size, self.cap = index, size, cap
        super().__init__(
            f"neighborhood {index} spans {size} product-space atoms (cap {cap})"
        )


class StateSpaceTooLarge(SizeBiasError, ValueError):
    def __init__(self, size: int, cap: int):
        self.size, self.cap = size, cap
        super().__init__(f"state space has {size} outcomes, cap is {cap}")


class ModelSpecError(SizeBiasError, ValueError):
    """Malformed JSON model specification."""
