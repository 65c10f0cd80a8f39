from .field import (
    BandSpec,
    Rank,
    SpectralField,
    anti_divergence,
    apply_derivative,
    compute_norm,
    dealiased_product,
    fractional_laplacian,
    project,
    require_resolved,
)
from .grid import Grid2D

__all__ = [
    "BandSpec",
    "Grid2D",
    "Rank",
    "SpectralField",
    "anti_divergence",
    "apply_derivative",
    "compute_norm",
    "dealiased_product",
    "fractional_laplacian",
    "project",
    "require_resolved",
]
