"""Numerical laboratory for the chevron-pattern amplitude/director equations."""

from chevron.core import (
    ChevronParams,
    Field,
    Grid2D,
    SimState,
    inner_product,
    l2_norm_sq,
    l4_norm_4,
)

__all__ = [
    "ChevronParams",
    "Field",
    "Grid2D",
    "SimState",
    "inner_product",
    "l2_norm_sq",
    "l4_norm_4",
]

__version__ = "0.1.0"
