"""Numerical labs for the product, mean-value and commutator inequalities."""

import numpy as np

from .exceptions import NonZeroMean, ParameterError, ResolutionError
from .spectral import operators as ops


def rescale(g, lam):
    """Samples of g(lam x): exact on the grid since lam x_i is again a node."""
    lam = int(lam)
    grid = g.grid
    bw = ops.max_axis_frequency(g.values, grid)
    if lam * bw >= grid.Ng / 2:
        raise ResolutionError(f"g(lam x) has bandwidth {lam * bw} >= Ng/2 = {grid.Ng // 2}")
    idx = (lam * np.arange(grid.Ng)) % grid.Ng
    return g.values[..., idx[:, None], idx[None, :]]


def _c1(f):
    return ops.c_norm(f.values, f.grid, 1)


def holder_product_gap(f, g, lam, p):
    """Scaled gap of ||f g_lam||_p over the decoupled product ||f||_p ||g||_p."""
    g_lam = rescale(g, lam)
    lhs = ops.lp_norm(f.values * g_lam, p)
    decoupled = ops.lp_norm(f.values, p) * ops.lp_norm(g.values, p)
    denom = _c1(f) * ops.lp_norm(g.values, p)
    gap = (lhs - decoupled) * lam ** (1.0 / p) / denom if denom > 0 else 0.0
    return {"lhs": lhs, "decoupled": decoupled, "gap_scaled": gap}


def oscillatory_mean(f, g, lam):
    """Mean of f g_lam against the sqrt(2) C^1 L^1 / lam bound."""
    mean_g = float(g.values.mean())
    if abs(mean_g) > 1e-10:
        raise NonZeroMean(f"g must have zero mean, got {mean_g:.3e}")
    value = float(np.mean(f.values * rescale(g, lam)))
    scale = _c1(f) * ops.lp_norm(g.values, 1.0)
    bound = np.sqrt(2) * scale / lam
    ratio = abs(value) * lam / scale if scale > 0 else 0.0
    return {"value": value, "bound": bound, "ratio": ratio}


def commutator_ratio(a, f, k, p):
    """k || |grad|^-1 P_{!=0}(a P_{>=k} f) ||_p / ((||a||_inf + ||grad^2 a||_inf) ||f||_p)."""
    if k < 1 or not 1 < p < np.inf:
        raise ParameterError(f"need k >= 1 and 1 < p < inf, got k={k}, p={p}")
    grid = f.grid
    high = ops.band(f.values, grid, k, np.inf)
    out = ops.inv_abs_grad(ops.mean_free(a.values * high, grid), grid)
    hess = max(float(np.abs(d).max()) for d in ops.derivative_tower(a.values, grid, 2))
    denom = (float(np.abs(a.values).max()) + hess) * ops.lp_norm(f.values, p)
    ratio = k * ops.lp_norm(out, p) / denom if denom > 0 else 0.0
    return {"ratio": ratio, "field": out}
