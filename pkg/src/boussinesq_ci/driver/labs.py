"""Small self-contained experiments shared by the CLI and the acceptance tests."""

from fractions import Fraction

import numpy as np

from ..building_blocks import (
    WaveParams,
    dirichlet_kernel_2d,
    eta,
    eta_transport_residual,
    lp_slope,
)
from ..geometry import (
    compute_c0,
    default_eps0,
    direction_set,
    eps0_closed_form,
    estimate_eps0,
    gamma_squared,
)
from ..inequalities import commutator_ratio, holder_product_gap, oscillatory_mean
from ..spectral import Grid2D, SpectralField
from ..spectral import operators as ops
from ..stress import residual_at


def dirichlet_slope(rs, p, Ng=256):
    grid = Grid2D(Ng)
    norms = [ops.lp_norm(dirichlet_kernel_2d(r, grid).values, p) for r in rs]
    return lp_slope(rs, norms), norms


def eta_slope(rs, p, Ng=1024, xi=(1.0, 0.0), lam_sigma=1, t=0.0):
    """Slope of ||eta||_p against r at fixed lambda sigma (lambda = 5, mu = 1)."""
    grid = Grid2D(Ng)
    norms = []
    for r in rs:
        params = WaveParams(5, Fraction(lam_sigma, 5), r, 1.0)
        norms.append(ops.lp_norm(eta(xi, params, t, grid).values, p))
    return lp_slope(rs, norms), norms


def blocks_lab(Ng=256):
    """Building-block summary: kernel slopes and the transport identity."""
    grid = Grid2D(Ng)
    params = WaveParams(20, Fraction(2, 20), 3, 6.0)
    transport = max(
        eta_transport_residual(xi, params, 0.3, grid) for j in (0, 1) for xi in direction_set(j).plus
    )
    e2 = ops.lp_norm(eta((0.6, 0.8), params, 0.3, grid).values, 2) ** 2
    return {
        "dirichlet_L4_slope": dirichlet_slope([2, 4, 8, 16, 32], 4, Ng)[0],
        "eta_L2_squared_minus_1": e2 - 1.0,
        "transport_residual": transport,
    }


def geometry_lab(samples=10000, seed=0):
    """c0, eps0, gamma^2(Id) and the trace identity over random trace-free perturbations."""
    rng = np.random.default_rng(seed)
    eps0 = default_eps0()
    S = rng.normal(size=(samples, 3))
    S /= np.linalg.norm(S, axis=1, keepdims=True)
    rad = eps0 * rng.uniform(size=(samples, 1)) ** 0.5
    R = np.zeros((samples, 2, 2))
    # (S11, S22, sqrt2 S12) unit directions, trace-free part only
    s11 = (S[:, 0] - S[:, 1]) / 2
    s12 = S[:, 2] / np.sqrt(2)
    norm = np.sqrt(2 * s11**2 + 2 * s12**2)
    R[:, 0, 0] = 1 + rad[:, 0] * s11 / norm
    R[:, 1, 1] = 1 - rad[:, 0] * s11 / norm
    R[:, 0, 1] = R[:, 1, 0] = rad[:, 0] * s12 / norm
    trace_err = 0.0
    min_gamma = np.inf
    for j in (0, 1):
        g = gamma_squared(R, direction_set(j))
        trace_err = max(trace_err, float(np.abs(g.sum(axis=-1) - 2).max()))
        min_gamma = min(min_gamma, float(g.min()))
    return {
        "c0": compute_c0(),
        "c0_expected": np.sqrt(2) / 10,
        "eps0_star_bisection": estimate_eps0(),
        "eps0_star_closed_form": eps0_closed_form(),
        "eps0": eps0,
        "gamma_sq_identity": [float(v) for v in gamma_squared(np.eye(2), direction_set(0))],
        "gamma_sq_identity_rotated": [float(v) for v in gamma_squared(np.eye(2), direction_set(1))],
        "trace_identity_max_error": trace_err,
        "min_gamma_sq_in_ball": min_gamma,
        "samples": samples,
    }


# ---------------------------------------------------------------- inequality corpus


def _corpus_f(grid):
    x1, x2 = grid.x
    return [
        SpectralField(grid, np.exp(np.cos(x1) + 0.5 * np.sin(x2))),
        SpectralField(grid, 1.0 / (1.5 + np.sin(x1 + x2))),
        SpectralField(grid, np.cos(x1) ** 2 + np.sin(2 * x2) * np.cos(x1)),
    ]


def _corpus_g(grid):
    x1, x2 = grid.x
    d = dirichlet_kernel_2d(3, grid).values
    return [
        SpectralField(grid, np.cos(x1)),
        SpectralField(grid, np.sin(x1 + 2 * x2)),
        SpectralField(grid, d**2 - float(np.mean(d**2))),
    ]


def oscillatory_mean_lab(lams=(2, 4, 8, 16), Ng=256):
    """Largest ratio |int f g_lam| lam / (C1 norm of f, L1 norm of g) over the corpus."""
    grid = Grid2D(Ng)
    worst = 0.0
    for f in _corpus_f(grid):
        for g in _corpus_g(grid):
            for lam in lams:
                worst = max(worst, oscillatory_mean(f, g, lam)["ratio"])
    return worst


def product_gap_lab(lams=(2, 4, 8, 16), p=1.5, Ng=256):
    """gap_scaled per lambda (max over the corpus)."""
    grid = Grid2D(Ng)
    out = []
    for lam in lams:
        out.append(max(abs(holder_product_gap(f, g, lam, p)["gap_scaled"])
                       for f in _corpus_f(grid) for g in _corpus_g(grid)))
    return out


def commutator_lab(ks=(4, 8, 16, 32), p=1.5, Ng=256, seed=0):
    """Commutator ratio per k for a smooth a and a random band-limited f."""
    grid = Grid2D(Ng)
    rng = np.random.default_rng(seed)
    x1, x2 = grid.x
    a = SpectralField(grid, np.exp(0.5 * np.cos(x1 - x2)))
    spec = np.zeros(grid.ksq.shape, dtype=complex)
    mask = (grid.kabs >= 1) & (grid.kabs <= Ng / 4)
    spec[mask] = (rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())) / grid.kabs[mask]
    f = SpectralField(grid, ops.ifft(spec, Ng))
    return [commutator_ratio(a, f, k, p)["ratio"] for k in ks]


# ---------------------------------------------------------------- manufactured check


def manufactured_check(Ng=64, alpha=0.5, times=(0.0, 0.37, 1.0)):
    """Residual of a state built to satisfy the velocity equation exactly.

    v is a time-dependent divergence-free field, theta a mean-free field; the
    forcing they leave behind is split into a gradient (pressure) and a
    solenoidal part (stress), so the residual must vanish to roundoff.
    """
    grid = Grid2D(Ng)
    x1, x2 = grid.x
    worst = 0.0
    for t in times:
        amp, damp = np.cos(t), -np.sin(t)
        psi = np.sin(x1) * np.cos(2 * x2) + 0.3 * np.cos(3 * x1 + x2)
        base = ops.perp_grad(psi, grid)
        v, v_t = amp * base, damp * base
        theta = np.exp(-t) * (np.cos(x2) + 0.2 * np.sin(x1 - x2))
        buoy = np.zeros_like(v)
        buoy[1] = theta
        forcing = (
            v_t
            + ops.div(ops.dealiased_product(v, v, grid, "outer"), grid)
            + ops.frac_lap(v, alpha, grid)
            - buoy
        )
        p = -ops.inv_lap(ops.div(forcing, grid), grid)
        R = ops.anti_div(ops.leray(forcing, grid), grid)
        worst = max(worst, residual_at(v, v_t, p, theta, R, alpha, grid)[1])
    return worst
