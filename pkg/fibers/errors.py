"""
Exception types for the fiber toolkit.
The CLI maps ValueError subclasses to exit code 2 and
DegenerateSystemError to exit code 3.
"""

from typing import Optional, Sequence


class LayoutMismatchError(ValueError):
    """Two fields, vectors or operators do not share a layout or shape"""


class EmptyModelError(ValueError):
    """Every (sigma, j) slot of a layout is masked"""


class UnsupportedGroupError(ValueError):
    """The requested operation is not available for this group preset"""


class FieldFileError(ValueError):
    """A SIZF1 field file could not be parsed or does not match the run config"""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class DegenerateSystemError(ArithmeticError):
    """
    A translate system is mathematically degenerate at some torus point:
    rank-deficient Gramian in Riesz mode, or no orthonormal fiber construction.
    """

    def __init__(self, message: str, sigma: Optional[Sequence[float]] = None):
        self.sigma = tuple(sigma) if sigma is not None else None
        if self.sigma is not None:
            message = f"{message} at sigma={list(self.sigma)}"
        super().__init__(message)
