"""New pressure, oscillatory term, Reynolds stress groups, and the residual check."""

from dataclasses import dataclass

import numpy as np

from .building_blocks import check_lattice, phase_pair_values
from .spectral import SpectralField
from .spectral import operators as ops

P_REPORT = (6 / 5, 5 / 4, 3 / 2)


def _vec(xi, f):
    return xi[:, None, None] * f


def _dot(xi, v):
    return xi[0] * v[0] + xi[1] * v[1]


def interaction_pressure_values(xi, xi2, c, s, c2, s2):
    return 2 * c * c2 + 2 * float(np.dot(xi, xi2)) * s * s2


def interaction_pressure(xi, xi2, lam, grid):
    """2 cos cos' + 2 (xi.xi') sin sin' of the phases lam xi_perp.x."""
    check_lattice(xi2, lam)
    c, s = phase_pair_values(xi, lam, grid)
    c2, s2 = phase_pair_values(xi2, lam, grid)
    a = np.array([float(v) for v in xi])
    b = np.array([float(v) for v in xi2])
    return SpectralField(grid, interaction_pressure_values(a, b, c, s, c2, s2))


def interaction_identity_residual(xi, xi2, lam, grid):
    """max |div(W (x) W) - 2 grad P| for the four-wave real sum W."""
    c, s = phase_pair_values(xi, lam, grid)
    c2, s2 = phase_pair_values(xi2, lam, grid)
    a = np.array([float(v) for v in xi])
    b = np.array([float(v) for v in xi2])
    W = _vec(a, -2 * s) + _vec(b, -2 * s2)
    lhs = ops.div(W[:, None] * W[None, :], grid)
    P = interaction_pressure_values(a, b, c, s, c2, s2)
    return float(np.abs(lhs - 2 * ops.grad(P, grid)).max())


def block_pairs(samples):
    """Unordered pairs of distinct blocks whose levels differ by at most one."""
    out = []
    for i in range(len(samples)):
        for k in range(i + 1, len(samples)):
            dj = abs(samples[i].block.j - samples[k].block.j)
            if dj <= 1:
                out.append((i, k, "inter" if dj == 1 else "same"))
    return out


@dataclass
class OscillationParts:
    groups: dict  # name -> vector field (each mean free)
    T_osc: np.ndarray
    p_diff: np.ndarray  # p1 - p0
    p_parts: dict
    temporal_source: np.ndarray  # sum (d_t(a^2) eta^2 + a^2 d_t eta^2) xi


def oscillation_parts(samples, params, grid, level):
    """T_osc in five groups and p1 - p0; ``level`` is sum_j rho_j chi_j^2."""
    mu, lam = params.mu, params.lam
    zero = np.zeros((2,) + grid.shape)
    g = {name: zero.copy() for name in ("eta_mean", "temporal", "double_phase", "inter", "same")}
    source = zero.copy()
    for bs in samples:
        xi = bs.xi
        a2, e2 = bs.a**2, bs.eta**2
        g["eta_mean"] += _vec(xi, (e2 - 1) * _dot(xi, ops.grad(a2, grid)))
        g["temporal"] -= _vec(xi, bs.dasq * e2) / mu
        cos2 = bs.c**2 - bs.s**2
        g["double_phase"] -= _vec(xi, cos2 * _dot(xi, ops.grad(a2 * e2, grid)))
        source += _vec(xi, bs.dasq * e2 + 2 * a2 * bs.eta * bs.eta_t)
    pair_pressure = np.zeros(grid.shape)
    for i, k, kind in block_pairs(samples):
        b1, b2 = samples[i], samples[k]
        A = b1.a * b2.a * b1.eta * b2.eta
        if not A.any():
            continue
        gA = ops.grad(A, grid)
        X = _vec(b1.xi, -2 * b1.s)
        Y = _vec(b2.xi, -2 * b2.s)
        P = interaction_pressure_values(b1.xi, b2.xi, b1.c, b1.s, b2.c, b2.s)
        g[kind] += 0.5 * (X * _dot(Y, gA) + Y * _dot(X, gA)) - P * gA
        pair_pressure -= A * P
    g = {name: ops.mean_free(v, grid) for name, v in g.items()}
    T_osc = sum(g.values())
    temporal_p = -ops.inv_lap(ops.div(source, grid), grid) / mu
    p_parts = {"level": -level, "temporal": temporal_p, "interaction": pair_pressure}
    return OscillationParts(g, T_osc, sum(p_parts.values()), p_parts, source)


def temporal_corrector_dt(source, mu, grid):
    """d_t w^t as built: -(1/mu) P_H P_{!=0} source."""
    return -ops.leray(ops.mean_free(source, grid), grid) / mu


def outer_div(u, v, grid):
    """div of the dealiased u (x) v."""
    return ops.div(ops.dealiased_product(u, v, grid, "outer"), grid)


@dataclass
class StressSample:
    linear: np.ndarray
    cor: np.ndarray
    osc: np.ndarray
    tem: np.ndarray

    @property
    def R1(self):
        return self.linear + self.cor + self.osc - self.tem


def stress_groups(pert, dphi, osc, v0, theta1, theta0, alpha, grid):
    """Anti-divergence of each group; dphi is d_t Phi (so d_t(w^p+w^c) = perp_grad dphi)."""
    w1 = pert.w1
    lin = ops.perp_grad(dphi, grid) + outer_div(v0, w1, grid) + outer_div(w1, v0, grid)
    lin = lin + ops.frac_lap(w1, alpha, grid)
    rest = pert.wc + pert.wt
    cor = outer_div(pert.wp, rest, grid) + outer_div(rest, w1, grid)
    tem = np.zeros((2,) + grid.shape)
    tem[1] = theta1 - theta0
    return StressSample(
        ops.anti_div(lin, grid),
        ops.anti_div(cor, grid),
        ops.anti_div(osc.T_osc, grid),
        ops.anti_div(tem, grid),
    )


def residual_terms(v, v_t, p, theta, R, alpha, grid):
    """Terms of d_t v + div(v (x) v) + grad p + (-Delta)^alpha v - theta e2 - div R."""
    buoy = np.zeros_like(v)
    buoy[1] = theta
    terms = {
        "dt": v_t,
        "advection": outer_div(v, v, grid),
        "pressure": ops.grad(p, grid),
        "dissipation": ops.frac_lap(v, alpha, grid),
        "buoyancy": -buoy,
        "stress": -ops.div(R, grid),
    }
    res = sum(terms.values())
    scale = sum(ops.lp_norm(t, 2) for t in terms.values())
    return res, scale


def residual_at(v, v_t, p, theta, R, alpha, grid):
    res, scale = residual_terms(v, v_t, p, theta, R, alpha, grid)
    l2 = ops.lp_norm(res, 2)
    return l2, (l2 / scale if scale > 0 else 0.0)


def verify_residual(state):
    """Residual of the Boussinesq-Reynolds velocity equation at every stored sample."""
    grid = state.grid
    l2, rel = [], []
    for m in range(len(state.times)):
        a, b = residual_at(state.v[m], state.v_t[m], state.p[m], state.theta[m], state.R[m],
                           state.alpha, grid)
        l2.append(a)
        rel.append(b)
    return {"residual_L2": np.array(l2), "relative": np.array(rel)}


def theta_equation_residual(theta_prev, theta_next, h, theta, v, grid):
    """d_t theta + div(v theta) - Delta theta with a centered time difference."""
    dt = (theta_next - theta_prev) / (2 * h)
    adv = ops.div(ops.dealiased_product(v, theta, grid, "broadcast"), grid)
    res = dt + adv - ops.laplacian(theta, grid)
    scale = ops.lp_norm(dt, 2) + ops.lp_norm(adv, 2) + ops.lp_norm(ops.laplacian(theta, grid), 2)
    return ops.lp_norm(res, 2) / scale if scale > 0 else 0.0


def group_norms(stress, ps=P_REPORT):
    out = {}
    for name in ("linear", "cor", "osc", "tem"):
        field = getattr(stress, name)
        out[f"{name}_L1"] = ops.lp_norm(field, 1)
        for p in ps:
            out[f"{name}_L{p:.4g}"] = ops.lp_norm(field, p)
    R1 = stress.R1
    out["R1_L1"] = ops.lp_norm(R1, 1)
    for p in ps:
        out[f"R1_L{p:.4g}"] = ops.lp_norm(R1, p)
    return out
