"""
Fiberization toolkit for shift-invariant spaces on SI/Z nilpotent groups.
"""

from .errors import (
    DegenerateSystemError,
    EmptyModelError,
    FieldFileError,
    LayoutMismatchError,
    UnsupportedGroupError,
)
from .group import GroupElement, GroupSpec, LatticePoint, preset
from .space import GridSpace

__all__ = [
    "DegenerateSystemError",
    "EmptyModelError",
    "FieldFileError",
    "GridSpace",
    "GroupElement",
    "GroupSpec",
    "LatticePoint",
    "LayoutMismatchError",
    "UnsupportedGroupError",
    "preset",
]
