"""Dirichlet kernels, intermittent densities, plane waves, support checks."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import NonIntegerLattice, ParameterError
from .geometry import compute_c0
from .spectral import SpectralField, require_resolved
from .spectral import operators as ops

N_GEOM = 5


def as_exact(xi):
    """Exact rational copy of a direction given as floats or Fractions."""
    return tuple(Fraction(c).limit_denominator(1000) for c in xi)


def perp(xi):
    return (-xi[1], xi[0])


@dataclass(frozen=True)
class WaveParams:
    lam: int
    sigma: Fraction
    r: int
    mu: float
    N: int = N_GEOM

    def __post_init__(self):
        sigma = Fraction(self.sigma)
        object.__setattr__(self, "sigma", sigma)
        if self.lam <= 0 or int(self.lam) != self.lam:
            raise ParameterError(f"lambda must be a positive integer, got {self.lam}")
        if self.r < 0 or self.mu <= 0 or self.N <= 0 or sigma <= 0:
            raise ParameterError("r >= 0, mu > 0, N > 0, sigma > 0 required")
        if (self.lam * sigma).denominator != 1:
            raise NonIntegerLattice(f"lambda*sigma = {self.lam * sigma} is not an integer")

    @property
    def lam_sigma(self):
        return int(self.lam * self.sigma)

    @property
    def freq(self):
        """lambda sigma N, the integer frequency of the density."""
        return self.lam_sigma * self.N

    @property
    def strict_ok(self):
        return float(self.sigma) * self.r <= compute_c0() / (50 * self.N)

    @property
    def violation_factor(self):
        return float(self.sigma) * self.r / (compute_c0() / (50 * self.N))


def _harmonics(c1, s1, r):
    """cos(j y), sin(j y) for j = 1..r by angle addition from cos y, sin y."""
    cs, ss = [c1], [s1]
    for _ in range(1, r):
        c, s = cs[-1], ss[-1]
        cs.append(c * c1 - s * s1)
        ss.append(s * c1 + c * s1)
    return cs, ss


def _kernel_sum(y, r):
    """1 + 2 sum_j cos(j y)."""
    return _kernel_from_trig(np.cos(y), np.sin(y), r)[0]


def _kernel_sum_dy(y, r):
    return _kernel_from_trig(np.cos(y), np.sin(y), r)[1]


def _kernel_from_trig(c1, s1, r):
    """(F, F') at y given cos y and sin y."""
    F = np.ones_like(c1)
    dF = np.zeros_like(c1)
    if r == 0:
        return F, dF
    cs, ss = _harmonics(c1, s1, r)
    for j in range(1, r + 1):
        F += 2 * cs[j - 1]
        dF -= 2 * j * ss[j - 1]
    return F, dF


def plane_trig(p, q, shift, grid):
    """cos and sin of p x1 + q x2 + shift on the grid, via separable products."""
    x = grid.spacing * np.arange(grid.Ng)
    c1, s1 = np.cos(p * x)[:, None], np.sin(p * x)[:, None]
    c2, s2 = np.cos(q * x + shift)[None, :], np.sin(q * x + shift)[None, :]
    return c1 * c2 - s1 * s2, s1 * c2 + c1 * s2


def dirichlet_kernel_2d(r, grid):
    require_resolved(r, grid, "Dirichlet kernel")
    x1, x2 = grid.x
    return SpectralField(grid, _kernel_sum(x1, r) * _kernel_sum(x2, r) / (2 * r + 1))


def density_bandwidth(xi, params):
    """Per-axis bandwidth of eta for direction xi."""
    return params.r * params.freq * (abs(float(xi[0])) + abs(float(xi[1])))


def wave_bandwidth(xi, lam):
    return lam * max(abs(float(xi[0])), abs(float(xi[1])))


def _density_factors(xi, params, t, grid):
    """(F, F') along xi and (F, F') along xi_perp, each on the grid."""
    a, b = float(xi[0]), float(xi[1])
    f, r = params.freq, params.r
    c1, s1 = plane_trig(f * a, f * b, f * params.mu * t, grid)
    c2, s2 = plane_trig(-f * b, f * a, 0.0, grid)
    return _kernel_from_trig(c1, s1, r), _kernel_from_trig(c2, s2, r)


def eta_values(xi, params, t, grid):
    (F1, _), (F2, _) = _density_factors(xi, params, t, grid)
    return F1 * F2 / (2 * params.r + 1)


def eta_dt_values(xi, params, t, grid):
    (_, dF1), (F2, _) = _density_factors(xi, params, t, grid)
    return params.freq * params.mu / (2 * params.r + 1) * dF1 * F2


def eta_and_dt(xi, params, t, grid):
    (F1, dF1), (F2, _) = _density_factors(xi, params, t, grid)
    n = 2 * params.r + 1
    return F1 * F2 / n, params.freq * params.mu / n * dF1 * F2


def eta_all(xi, params, t, grid):
    """eta, d_t eta and grad eta together (one trig evaluation)."""
    (F1, dF1), (F2, dF2) = _density_factors(xi, params, t, grid)
    n, f = 2 * params.r + 1, params.freq
    a, b = float(xi[0]), float(xi[1])
    eta_ = F1 * F2 / n
    eta_t = f * params.mu / n * dF1 * F2
    grad = np.stack([f * (a * dF1 * F2 - b * F1 * dF2) / n, f * (b * dF1 * F2 + a * F1 * dF2) / n])
    return eta_, eta_t, grad


def eta_dx_values(xi, params, t, grid):
    """Analytic spatial gradient of eta, shape (2, Ng, Ng)."""
    return eta_all(xi, params, t, grid)[2]


def eta(xi, params, t, grid):
    require_resolved(density_bandwidth(xi, params), grid, "eta")
    return SpectralField(grid, eta_values(xi, params, t, grid))


def eta_dt(xi, params, t, grid):
    require_resolved(density_bandwidth(xi, params), grid, "eta_dt")
    return SpectralField(grid, eta_dt_values(xi, params, t, grid))


def check_lattice(xi, lam):
    ex = as_exact(xi)
    if any((lam * c).denominator != 1 for c in ex):
        raise NonIntegerLattice(f"lambda*xi = {[str(lam * c) for c in ex]} is not in Z^2")


def phase_pair_values(xi, lam, grid):
    """cos and sin of lambda xi_perp . x."""
    check_lattice(xi, lam)
    return plane_trig(-lam * float(xi[1]), lam * float(xi[0]), 0.0, grid)


def plane_wave_pair(xi, lam, grid):
    """Real combination -2 xi sin(lambda xi_perp . x) and the (cos, sin) phase pair."""
    require_resolved(wave_bandwidth(xi, lam), grid, "plane wave")
    c, s = phase_pair_values(xi, lam, grid)
    w = -2 * np.array([float(xi[0]), float(xi[1])])[:, None, None] * s
    return SpectralField(grid, w), (SpectralField(grid, c), SpectralField(grid, s))


def check_frequency_support(field, band):
    """Fraction of L^2 mass outside the closed annulus ``band``."""
    grid = field.grid
    power = np.abs(field.modes) ** 2 * grid.weights
    if power.ndim > 2:
        power = power.reshape(-1, *power.shape[-2:]).sum(axis=0)
    total = power.sum()
    inside = (grid.kabs >= band.low) & (grid.kabs <= band.high)
    leaked = float(power[~inside].sum() / total) if total > 0 else 0.0
    return {"pass": leaked <= 1e-12, "leaked_mass": leaked}


def intermittent_wave(xi, params, t, grid):
    """eta_xi times the real plane-wave combination (vector field)."""
    w, _ = plane_wave_pair(xi, params.lam, grid)
    return SpectralField(grid, eta_values(xi, params, t, grid) * w.values)


def lp_slope(rs, norms):
    """Least-squares slope of log(norm) against log(r)."""
    return float(np.polyfit(np.log(rs), np.log(norms), 1)[0])


def eta_transport_residual(xi, params, t, grid):
    """sup |(1/mu) d_t eta - xi . grad eta| using the spectral gradient."""
    e = eta_values(xi, params, t, grid)
    g = ops.grad(e, grid)
    lhs = eta_dt_values(xi, params, t, grid) / params.mu
    return float(np.abs(lhs - (float(xi[0]) * g[0] + float(xi[1]) * g[1])).max())
