from fractions import Fraction

import numpy as np
import pytest

from boussinesq_ci.building_blocks import WaveParams
from boussinesq_ci.driver.config import EnergyProfile
from boussinesq_ci.driver.labs import manufactured_check
from boussinesq_ci.driver.state import IterationState, uniform_times
from boussinesq_ci.exceptions import NonIntegerLattice
from boussinesq_ci.perturbation import BlockSample, blocks_for, perturbation_at
from boussinesq_ci.building_blocks import eta_and_dt, phase_pair_values
from boussinesq_ci.spectral import Grid2D
from boussinesq_ci.spectral import operators as ops
from boussinesq_ci.stress import (
    block_pairs,
    group_norms,
    interaction_identity_residual,
    interaction_pressure,
    interaction_pressure_values,
    oscillation_parts,
    residual_at,
    stress_groups,
    temporal_corrector_dt,
    verify_residual,
)

G = Grid2D(128)
E1 = (Fraction(1), Fraction(0))
XI_A = (Fraction(3, 5), Fraction(4, 5))
XI_B = (Fraction(3, 5), Fraction(-4, 5))


def test_interaction_pressure_at_origin():
    P = interaction_pressure(E1, XI_A, 20, G).values
    assert P[0, 0] == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("pair", [(E1, XI_A), (E1, XI_B), (XI_A, XI_B)])
def test_interaction_identity(pair):
    assert interaction_identity_residual(pair[0], pair[1], 20, G) <= 1e-10


def test_interaction_pressure_antipodal():
    # the phase of -xi flips sign, so cos cos' + (xi.xi') sin sin' = cos^2 + sin^2
    minus = (-E1[0], -E1[1])
    P = interaction_pressure(E1, minus, 20, G).values
    assert np.abs(P - 2).max() <= 1e-12


def test_interaction_pressure_values_double_angle():
    c, s = phase_pair_values(E1, 20, G)
    c2, _ = phase_pair_values(E1, 40, G)
    xi = np.array([1.0, 0.0])
    P = interaction_pressure_values(xi, -xi, c, s, c, s)
    assert np.abs(P - 2 * c2).max() <= 1e-12


def test_interaction_pressure_lattice():
    with pytest.raises(NonIntegerLattice):
        interaction_pressure(E1, XI_A, 21, G)


# ---------------------------------------------------------------- oscillation term


def _samples(a_fn, params, t, grid, J=0):
    out = []
    for i, b in enumerate(blocks_for(J)):
        a = a_fn(i)
        c, s = phase_pair_values(b.xi_exact, params.lam, grid)
        e, e_t = eta_and_dt(b.xi, params, t, grid)
        z = np.zeros(grid.shape)
        out.append(BlockSample(b, a, z, z, e, e_t, c, s))
    return out


P_SMALL = WaveParams(10, Fraction(1, 10), 2, 3.0)


def test_block_pairs_levels():
    samples = _samples(lambda i: np.ones(G.shape), P_SMALL, 0.0, G, J=2)
    pairs = block_pairs(samples)
    assert len(pairs) == 3 + 3 + 3 + 9 + 9
    assert all(abs(samples[i].block.j - samples[k].block.j) <= 1 for i, k, _ in pairs)


def test_constant_amplitude_groups():
    x1, x2 = G.x
    samples = _samples(lambda i: np.full(G.shape, 0.3 + 0.1 * i), P_SMALL, 0.2, G)
    osc = oscillation_parts(samples, P_SMALL, G, np.zeros(G.shape))
    # constant a: gradients of a^2 vanish and d_t(a^2) = 0
    assert np.abs(osc.groups["eta_mean"]).max() == 0
    assert np.abs(osc.groups["temporal"]).max() == 0
    for name, g in osc.groups.items():
        assert np.abs(g.mean(axis=(-2, -1))).max() <= 1e-10, name
    assert np.abs(osc.T_osc.mean(axis=(-2, -1))).max() <= 1e-10


def test_oscillation_identity_constant_amplitudes():
    """div(sum a^2 eta^2 W W) + d_t w^t + grad(p1 - p0) = T_osc for constant a, R0 = 0."""
    g = Grid2D(256)
    t = 0.13
    rho = 0.05
    gam = np.sqrt([7 / 16, 25 / 32, 25 / 32])
    samples = _samples(lambda i: np.full(g.shape, np.sqrt(rho) * gam[i]), P_SMALL, t, g)
    level = np.full(g.shape, rho)
    osc = oscillation_parts(samples, P_SMALL, g, level)
    wp = perturbation_at(samples, P_SMALL, g).wp
    quad = ops.div(ops.dealiased_product(wp, wp, g, "outer"), g)
    lhs = quad + temporal_corrector_dt(osc.temporal_source, P_SMALL.mu, g) + ops.grad(osc.p_diff, g)
    scale = ops.lp_norm(quad, 2)
    assert ops.lp_norm(lhs - osc.T_osc, 2) <= 1e-8 * scale


# ---------------------------------------------------------------- stress groups


def _zero_pert():
    class Z:
        wp = wc = wt = np.zeros((2,) + G.shape)
        w1 = wp

    return Z()


def test_zero_perturbation_groups_vanish():
    x1, x2 = G.x
    theta = np.cos(x1)
    v0 = ops.perp_grad(np.sin(x1 + x2), G)
    samples = _samples(lambda i: np.zeros(G.shape), P_SMALL, 0.0, G)
    osc = oscillation_parts(samples, P_SMALL, G, np.zeros(G.shape))
    st = stress_groups(_zero_pert(), np.zeros(G.shape), osc, v0, theta, theta, 0.5, G)
    for name in ("linear", "cor", "osc", "tem"):
        assert np.abs(getattr(st, name)).max() == 0


def test_stress_groups_symmetric_trace_free():
    x1, x2 = G.x
    samples = _samples(lambda i: np.full(G.shape, 0.2), P_SMALL, 0.3, G)
    pert = perturbation_at(samples, P_SMALL, G)
    osc = oscillation_parts(samples, P_SMALL, G, np.full(G.shape, 0.04))
    th0 = np.cos(x1)
    st = stress_groups(pert, np.sin(x2) * 0.1, osc, np.zeros((2,) + G.shape), th0 + 0.1 * np.sin(x2), th0, 0.5, G)
    for name in ("linear", "cor", "osc", "tem"):
        R = getattr(st, name)
        assert np.abs(R[0, 0] + R[1, 1]).max() <= 1e-10
        assert np.abs(R[0, 1] - R[1, 0]).max() <= 1e-10
    norms = group_norms(st)
    assert set(norms) >= {"R1_L1", "R1_L1.2", "R1_L1.25", "R1_L1.5", "tem_L1"}


def test_zero_velocity_background_has_no_cross_term():
    samples = _samples(lambda i: np.full(G.shape, 0.2), P_SMALL, 0.3, G)
    pert = perturbation_at(samples, P_SMALL, G)
    osc = oscillation_parts(samples, P_SMALL, G, np.zeros(G.shape))
    th = np.zeros(G.shape)
    zero_v = np.zeros((2,) + G.shape)
    a = stress_groups(pert, np.zeros(G.shape), osc, zero_v, th, th, 0.5, G).linear
    dissipation = ops.anti_div(ops.frac_lap(pert.w1, 0.5, G), G)
    assert np.abs(a - dissipation).max() <= 1e-12


# ---------------------------------------------------------------- residual


def test_zero_state_residual():
    z = np.zeros((2,) + G.shape)
    l2, rel = residual_at(z, z, np.zeros(G.shape), np.zeros(G.shape), np.zeros((2, 2) + G.shape), 0.5, G)
    assert l2 == 0 and rel == 0


def test_verify_residual_zero_state():
    M = 3
    g = Grid2D(16)
    state = IterationState(
        g, uniform_times(M), 1.0, EnergyProfile("constant", 2.0, 0.0, 0.0), 0.5, np.zeros(g.shape),
        v=np.zeros((M, 2) + g.shape), v_t=np.zeros((M, 2) + g.shape), p=np.zeros((M,) + g.shape),
        theta=np.zeros((M,) + g.shape), R=np.zeros((M, 2, 2) + g.shape),
    )
    out = verify_residual(state)
    assert np.all(out["residual_L2"] == 0)


@pytest.mark.parametrize("Ng", [32, 64])
def test_manufactured_solution(Ng):
    assert manufactured_check(Ng) <= 1e-10
