"""SpectralField, the carrier type, and the public operations on it."""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from ..exceptions import ContractViolation, ParameterError, ResolutionError
from . import operators as ops
from .grid import Grid2D


class Rank(str, Enum):
    SCALAR = "scalar"
    VECTOR = "vector2"
    TENSOR = "symtensor2x2"


_LEAD = {Rank.SCALAR: (), Rank.VECTOR: (2,), Rank.TENSOR: (2, 2)}


def _infer_rank(values):
    lead = values.shape[:-2]
    for rank, shape in _LEAD.items():
        if lead == shape:
            return rank
    raise ContractViolation(f"cannot infer rank from shape {values.shape}")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A real field sampled on ``grid``; ``modes`` is its rfft2 half-spectrum."""

    grid: Grid2D
    values: np.ndarray
    rank: Rank = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[-2:] != self.grid.shape:
            raise ContractViolation(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        rank = _infer_rank(values) if self.rank is None else Rank(self.rank)
        if values.shape[:-2] != _LEAD[rank]:
            raise ContractViolation(f"rank {rank.value} does not match shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "rank", rank)

    @classmethod
    def from_modes(cls, grid, modes, rank=None):
        return cls(grid, ops.ifft(np.asarray(modes), grid.Ng), rank)

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(x1, x2)``; a tuple/list result becomes a vector field."""
        out = func(grid.x[0], grid.x[1])
        if isinstance(out, (tuple, list)):
            out = np.stack([np.broadcast_to(np.asarray(c, float), grid.shape) for c in out])
        return cls(grid, np.broadcast_to(np.asarray(out, float), np.shape(out)).copy())

    @cached_property
    def modes(self):
        return ops.fft(self.values)

    def mean(self):
        return self.values.mean(axis=(-2, -1))

    def is_symmetric(self, tol=1e-12):
        if self.rank is not Rank.TENSOR:
            return False
        return bool(np.abs(self.values[0, 1] - self.values[1, 0]).max() <= tol)

    def is_trace_free(self, tol=1e-12):
        if self.rank is not Rank.TENSOR:
            return False
        return bool(np.abs(self.values[0, 0] + self.values[1, 1]).max() <= tol)

    def max_frequency(self):
        return ops.max_axis_frequency(self.values, self.grid)

    def __add__(self, other):
        return SpectralField(self.grid, self.values + _vals(other), self.rank)

    def __sub__(self, other):
        return SpectralField(self.grid, self.values - _vals(other), self.rank)

    def __mul__(self, c):
        return SpectralField(self.grid, self.values * c, self.rank)

    __rmul__ = __mul__


def _vals(f):
    return f.values if isinstance(f, SpectralField) else f


@dataclass(frozen=True)
class BandSpec:
    """Closed annulus low <= |k| <= high on the integer lattice."""

    low: float
    high: float = np.inf

    def __post_init__(self):
        if self.low < 0 or not self.low < self.high:
            raise ParameterError(f"band needs 0 <= low < high, got [{self.low}, {self.high}]")


def require_resolved(bandwidth, grid, what="field"):
    """Nyquist rule for anything that will enter a quadratic product."""
    if bandwidth > grid.Ng / 3:
        raise ResolutionError(
            f"{what} has per-axis bandwidth {bandwidth} > Ng/3 = {grid.Ng / 3:.1f}"
        )


_DERIVATIVES = {
    "d1": (Rank.SCALAR, Rank.VECTOR, Rank.TENSOR),
    "d2": (Rank.SCALAR, Rank.VECTOR, Rank.TENSOR),
    "grad": (Rank.SCALAR,),
    "perp_grad": (Rank.SCALAR,),
    "div": (Rank.VECTOR, Rank.TENSOR),
    "laplacian": (Rank.SCALAR, Rank.VECTOR, Rank.TENSOR),
}


def apply_derivative(f, op):
    """op in {'d1', 'd2', 'grad', 'perp_grad', 'div', 'laplacian'}."""
    if op not in _DERIVATIVES:
        raise ParameterError(f"unknown derivative {op!r}")
    if f.rank not in _DERIVATIVES[op]:
        raise ContractViolation(f"{op} is not defined on a {f.rank.value} field")
    g = f.grid
    fn = {
        "d1": ops.d1,
        "d2": ops.d2,
        "grad": ops.grad,
        "perp_grad": ops.perp_grad,
        "div": ops.div,
        "laplacian": ops.laplacian,
    }[op]
    out = fn(f.values, g)
    if op == "div" and f.rank is Rank.TENSOR:
        return SpectralField(g, out, Rank.VECTOR)
    return SpectralField(g, out)


def fractional_laplacian(f, alpha):
    return SpectralField(f.grid, ops.frac_lap(f.values, alpha, f.grid), f.rank)


def project(f, which, band=None):
    """which in {'mean_free', 'leray', 'band'}."""
    g = f.grid
    if which == "mean_free":
        return SpectralField(g, ops.mean_free(f.values, g), f.rank)
    if which == "leray":
        if f.rank is not Rank.VECTOR:
            raise ContractViolation("leray projection needs a vector field")
        return SpectralField(g, ops.leray(f.values, g), f.rank)
    if which == "band":
        if not isinstance(band, BandSpec):
            raise ParameterError("band projection needs a BandSpec")
        return SpectralField(g, ops.band(f.values, g, band.low, band.high), f.rank)
    raise ParameterError(f"unknown projection {which!r}")


def anti_divergence(v):
    if v.rank is not Rank.VECTOR:
        raise ContractViolation("anti_divergence needs a vector field")
    return SpectralField(v.grid, ops.anti_div(v.values, v.grid), Rank.TENSOR)


def compute_norm(f, kind, p=None, L=None):
    """kind: 'Lp' (needs p > 1 or inf), 'L1', 'CL' (needs L), 'W1p' (needs p)."""
    vals = f.values
    if kind == "L1":
        return ops.lp_norm(vals, 1.0)
    if kind == "Lp":
        if p is None or p <= 1:
            raise ParameterError(f"Lp norm needs p > 1, got {p}")
        return ops.lp_norm(vals, p)
    if kind == "CL":
        if L is None or L < 0 or int(L) != L:
            raise ParameterError(f"C^L norm needs a nonnegative integer L, got {L}")
        return ops.c_norm(vals, f.grid, int(L))
    if kind == "W1p":
        if p is None or p < 1:
            raise ParameterError(f"W1p norm needs p >= 1, got {p}")
        gradient = ops.grad(vals, f.grid)
        return ops.lp_norm(vals, p) + ops.lp_norm(gradient, p)
    raise ParameterError(f"unknown norm kind {kind!r}")


def dealiased_product(f, g):
    """scalar*scalar, scalar*vector, or vector (x) vector (outer)."""
    if f.grid != g.grid:
        raise ContractViolation("fields live on different grids")
    pair = (f.rank, g.rank)
    if pair == (Rank.VECTOR, Rank.VECTOR):
        return SpectralField(f.grid, ops.dealiased_product(f.values, g.values, f.grid, "outer"))
    if Rank.SCALAR in pair:
        out = ops.dealiased_product(f.values, g.values, f.grid, "broadcast")
        return SpectralField(f.grid, out)
    raise ContractViolation(f"no product rule for {pair}")
