"""Energy-error decomposition of int |v1|^2 - e(t)(1 - delta/2)."""

from math import gcd

import numpy as np

from ..perturbation import AREA
from ..spectral import operators as ops
from ..stress import block_pairs

TERMS = ("cross", "corrector", "eta_mean", "double_phase", "upper_levels")


def _integral(f):
    return AREA * float(np.mean(f))


def energy_decomposition(v0, samples, pert, params, grid):
    """The five error terms at one time (unnormalized integrals).

    cross         2 int v0.w1
    corrector     int 2 w^p.(w^c+w^t) + |w^c+w^t|^2 plus distinct-block products of w^p
    eta_mean      sum over level-0 blocks of int a^2 (eta^2 - 1)
    double_phase  -sum over level-0 blocks of int a^2 eta^2 cos(2 lam xi_perp.x)
    upper_levels  sum over level >= 1 blocks of int 2 a^2 eta^2 sin^2(lam xi_perp.x)
    """
    rest = pert.wc + pert.wt
    interaction = 0.0
    for i, k, _ in block_pairs(samples):
        b1, b2 = samples[i], samples[k]
        A = b1.a * b2.a * b1.eta * b2.eta
        interaction += _integral(A * 4 * float(np.dot(b1.xi, b2.xi)) * b1.s * b2.s)
    terms = {
        "cross": 2 * _integral(np.sum(v0 * pert.w1, axis=0)),
        "corrector": _integral(np.sum(2 * pert.wp * rest + rest**2, axis=0)) + interaction,
        "eta_mean": 0.0,
        "double_phase": 0.0,
        "upper_levels": 0.0,
    }
    bounds = {"eta_mean": 0.0, "double_phase": 0.0}
    g_eta = params.lam_sigma
    g_phase = gcd(params.lam_sigma, 2 * params.lam // 5)
    for bs in samples:
        a2, e2 = bs.a**2, bs.eta**2
        if bs.block.j == 0:
            terms["eta_mean"] += _integral(a2 * (e2 - 1))
            osc = e2 * (bs.c**2 - bs.s**2)
            terms["double_phase"] -= _integral(a2 * osc)
            c1 = ops.c_norm(a2, grid, 1)
            bounds["eta_mean"] += AREA * np.sqrt(2) * c1 * ops.lp_norm(e2 - 1, 1) / g_eta
            # the oscillating factor need not be mean free once supports overlap
            m = float(osc.mean())
            bounds["double_phase"] += AREA * (
                abs(m) * float(np.abs(a2).max())
                + np.sqrt(2) * c1 * ops.lp_norm(osc - m, 1) / g_phase
            )
        else:
            terms["upper_levels"] += _integral(2 * a2 * e2 * bs.s**2)
    return terms, bounds
