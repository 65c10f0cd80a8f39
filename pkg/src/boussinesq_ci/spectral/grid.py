"""Uniform periodic grid on the 2-torus and its dual lattice."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..exceptions import ParameterError


@dataclass(frozen=True)
class Grid2D:
    """Ng points per axis on [0, 2pi)^2.

    Arrays use ``indexing='ij'``: axis -2 is x1, axis -1 is x2. Spectral
    arrays are half-spectra from ``rfft2`` with ``norm='forward'``, so
    ``modes[0, 0]`` is the mean.
    """

    Ng: int

    def __post_init__(self):
        if int(self.Ng) != self.Ng or self.Ng < 4 or self.Ng % 2:
            raise ParameterError(f"Ng must be an even integer >= 4, got {self.Ng}")

    @property
    def spacing(self):
        return 2 * np.pi / self.Ng

    @property
    def shape(self):
        return (self.Ng, self.Ng)

    @cached_property
    def x(self):
        """Coordinates, shape (2, Ng, Ng)."""
        x1d = self.spacing * np.arange(self.Ng)
        return np.stack(np.meshgrid(x1d, x1d, indexing="ij"))

    @cached_property
    def k1(self):
        return (np.fft.fftfreq(self.Ng) * self.Ng)[:, None]

    @cached_property
    def k2(self):
        return (np.fft.rfftfreq(self.Ng) * self.Ng)[None, :]

    @cached_property
    def k1_odd(self):
        # first-derivative multiplier; the Nyquist row carries no odd derivative
        k = self.k1.copy()
        k[self.Ng // 2, 0] = 0.0
        return k

    @cached_property
    def k2_odd(self):
        k = self.k2.copy()
        k[0, -1] = 0.0
        return k

    @cached_property
    def ksq(self):
        return self.k1**2 + self.k2**2

    @cached_property
    def kabs(self):
        return np.sqrt(self.ksq)

    @cached_property
    def ksq_safe(self):
        k = self.ksq.copy()
        k[0, 0] = 1.0
        return k

    @cached_property
    def kmax_axis(self):
        """max(|k1|, |k2|) per half-spectrum entry."""
        return np.maximum(np.abs(self.k1), np.abs(self.k2))

    @cached_property
    def weights(self):
        """Half-spectrum multiplicity: Parseval weights for rfft coefficients."""
        w = np.full((self.Ng, self.Ng // 2 + 1), 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w
