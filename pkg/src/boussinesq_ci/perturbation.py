"""Cutoffs, energy schedule, amplitudes, and the three velocity perturbations."""

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .building_blocks import (
    N_GEOM,
    WaveParams,
    density_bandwidth,
    eta_and_dt,
    phase_pair_values,
    wave_bandwidth,
)
from .exceptions import (
    GammaDomainError,
    NonPositiveRho0,
    ParameterError,
    StrictInfeasible,
)
from .geometry import compute_c0, direction_set, gamma_squared
from .spectral import operators as ops

J_CAP = 12
AREA = 4 * np.pi**2


# ---------------------------------------------------------------- cutoffs


def bump(u):
    """exp(-1/(1-u^2)) on |u| < 1, zero outside."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1
    out = np.zeros_like(u)
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def cutoff_argument(R0, delta, eps0):
    """<50 |R0| / (eps0 delta)> with <z> = sqrt(1 + z^2); |.| is Frobenius."""
    mag = np.sqrt(np.sum(R0**2, axis=(0, 1)))
    return np.sqrt(1.0 + (50.0 * mag / (eps0 * delta)) ** 2)


def cutoffs_at(R0, delta, eps0):
    """chi_j at one time, shape (J+1, Ng, Ng), trailing all-zero levels dropped.

    chi_j is nonzero exactly where 4^(j-1) < y < 4^(j+1) (chi_0: y < 4).
    """
    y = cutoff_argument(R0, delta, eps0)
    s = np.log(y) / np.log(4.0)
    top = int(np.floor(s.max())) + 1
    raw = np.stack([bump(s - j) for j in range(top + 1)])
    chi = raw / np.sqrt(np.sum(raw**2, axis=0))
    while chi.shape[0] > 1 and not chi[-1].any():
        chi = chi[:-1]
    if chi.shape[0] - 1 > J_CAP:
        raise ParameterError(f"j_max = {chi.shape[0] - 1} exceeds cap {J_CAP}; R0 too large")
    return chi


@dataclass
class CutoffPartition:
    chi: np.ndarray  # (M, J+1, Ng, Ng)
    delta: float
    eps0: float
    max_R0: float = 0.0

    @property
    def j_max(self):
        return self.chi.shape[1] - 1

    def jmax_bound_holds(self):
        if self.j_max == 0:
            return True
        return 4.0**self.j_max <= 800 * self.max_R0 / (self.eps0 * self.delta)


def build_cutoffs(R0, delta, eps0):
    """R0 has shape (M, 2, 2, Ng, Ng)."""
    if not 0 < delta <= 1:
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    levels = [cutoffs_at(R, delta, eps0) for R in R0]
    J = max(c.shape[0] for c in levels)
    chi = np.zeros((len(levels), J) + R0.shape[-2:])
    for m, c in enumerate(levels):
        chi[m, : c.shape[0]] = c
    max_R0 = float(np.sqrt(np.sum(R0**2, axis=(1, 2))).max())
    return CutoffPartition(chi, delta, eps0, max_R0)


# ---------------------------------------------------------------- energy


def window_bounds(e, delta):
    return 0.75 * delta * e, 1.25 * delta * e


def window_holds(e, v0_energy, delta):
    lo, hi = window_bounds(e, delta)
    gap = e - v0_energy
    return bool(np.all((lo <= gap) & (gap <= hi)))


def rho0_value(e, v0_energy, chi0_integral, delta):
    """rho_0 = (e (1 - delta/2) - int |v0|^2) / (2 int chi_0^2), unnormalized integrals."""
    bracket = np.asarray(e * (1 - delta / 2) - v0_energy, dtype=float)
    if np.any(bracket <= 0):
        raise NonPositiveRho0(f"energy bracket is nonpositive (min {bracket.min():.3e})")
    return bracket / (2 * np.asarray(chi0_integral))


def rho0_of_t(e_t, v0, chi0, delta, mode="demo"):
    """e_t (M,), v0 (M, 2, Ng, Ng), chi0 (M, Ng, Ng)."""
    v0_energy = AREA * np.mean(np.sum(v0**2, axis=1), axis=(-2, -1))
    ok = window_holds(e_t, v0_energy, delta)
    if not ok:
        if mode == "strict":
            raise ParameterError("input energy window violated")
        warnings.warn("input energy window violated", stacklevel=2)
    chi0_int = AREA * np.mean(chi0**2, axis=(-2, -1))
    return rho0_value(e_t, v0_energy, chi0_int, delta), ok


def rho_levels(rho0, delta, J):
    return np.array([rho0] + [4.0**j * delta for j in range(1, J + 1)])


# ---------------------------------------------------------------- amplitudes


@dataclass(frozen=True)
class Block:
    j: int
    k: int  # index into direction_set(j).plus

    @property
    def xi_exact(self):
        return direction_set(self.j).plus[self.k]

    @property
    def xi(self):
        a, b = self.xi_exact
        return np.array([float(a), float(b)])


def blocks_for(J):
    return [Block(j, k) for j in range(J + 1) for k in range(3)]


def amplitudes_at(chi, R0, rhos):
    """a_(xi,j) at one time; returns array (3 (J+1), Ng, Ng) ordered like blocks_for."""
    J = chi.shape[0] - 1
    out = np.zeros((3 * (J + 1),) + chi.shape[1:])
    R = np.moveaxis(R0, (0, 1), (-2, -1))
    eye = np.eye(2)
    for j in range(J + 1):
        on = chi[j] != 0
        if not on.any():
            continue
        g2 = gamma_squared(eye - R[on] / rhos[j], direction_set(j))
        if np.any(g2 <= 0):
            raise GammaDomainError(
                f"gamma^2 <= 0 on supp chi_{j} (min {g2.min():.3e}, "
                f"max |R0|/rho_{j} = {np.sqrt((R[on] ** 2).sum(axis=(-2, -1))).max() / rhos[j]:.3e})"
            )
        for k in range(3):
            out[3 * j + k][on] = np.sqrt(rhos[j]) * chi[j][on] * np.sqrt(g2[:, k])
    return out


@dataclass
class AmplitudeSet:
    blocks: list
    values: np.ndarray  # (M, nblocks, Ng, Ng)
    rho: np.ndarray  # (M, J+1)


def build_amplitudes(cutoffs, R0, rho0):
    J = cutoffs.j_max
    vals, rhos = [], []
    for m in range(R0.shape[0]):
        r = rho_levels(rho0[m], cutoffs.delta, J)
        rhos.append(r)
        vals.append(amplitudes_at(cutoffs.chi[m], R0[m], r))
    return AmplitudeSet(blocks_for(J), np.stack(vals), np.stack(rhos))


def cancellation_defect(amps, R0, chi, rhos):
    """R0 + sum a^2 xi (x) xi - (sum rho_j chi_j^2) Id at one time."""
    J = chi.shape[0] - 1
    total = R0.copy()
    for b, a in zip(blocks_for(J), amps):
        xi = b.xi
        total += a**2 * np.outer(xi, xi)[:, :, None, None]
    level = np.einsum("j,j...->...", rhos, chi**2)
    total[0, 0] -= level
    total[1, 1] -= level
    return total


# ---------------------------------------------------------------- time FD


def fd_stencil(m, M, h):
    """Fourth-order first-derivative stencil at sample m of M (indices, weights)."""
    if M < 5:
        raise ParameterError("time finite differences need at least 5 samples")
    if 2 <= m <= M - 3:
        idx = [m - 2, m - 1, m + 1, m + 2]
        w = [1, -8, 8, -1]
    elif m == 0:
        idx, w = [0, 1, 2, 3, 4], [-25, 48, -36, 16, -3]
    elif m == 1:
        idx, w = [0, 1, 2, 3, 4], [-3, -10, 18, -6, 1]
    elif m == M - 1:
        idx, w = [M - 1, M - 2, M - 3, M - 4, M - 5], [25, -48, 36, -16, 3]
    else:
        idx, w = [M - 1, M - 2, M - 3, M - 4, M - 5], [3, 10, -18, 6, -1]
    return idx, np.array(w, dtype=float) / (12 * h)


# ---------------------------------------------------------------- parameters


def choose_params(alpha, lam, mode="demo", r_override=None, lam_sigma_override=None,
                  mu_override=None, N=N_GEOM):
    """Parameter relation r = [lam^alpha], sigma = lam^(-(1+alpha)/2), mu = [lam^((3 alpha+1)/4)].

    sigma is rounded so that lam*sigma is a positive integer.
    """
    if not 0.5 <= alpha < 1:
        raise ParameterError(f"alpha must lie in [0.5, 1), got {alpha}")
    if lam <= 0 or lam % 5:
        raise ParameterError(f"lambda must be a positive multiple of 5, got {lam}")
    r = int(np.floor(lam**alpha + 1e-12)) if r_override is None else int(r_override)
    target = lam ** ((1 - alpha) / 2)
    ls = max(1, int(np.rint(target))) if lam_sigma_override is None else int(lam_sigma_override)
    mu = int(np.floor(lam ** ((3 * alpha + 1) / 4) + 1e-12)) if mu_override is None else mu_override
    params = WaveParams(lam, Fraction(ls, lam), r, mu, N)
    c0 = compute_c0()
    min_lam = (50 * N / c0) ** (2 / (1 - alpha))
    info = {
        "lam_sigma_target": target,
        "lam_sigma": ls,
        "sigma_rounding": ls / target,
        "strict_ok": params.strict_ok,
        "violation_factor": params.violation_factor,
        "strict_min_lambda": min_lam,
    }
    if mode == "strict" and not params.strict_ok:
        raise StrictInfeasible(
            f"sigma r = {float(params.sigma) * r:.3e} > c0/(50N) = {c0 / (50 * N):.3e}; "
            f"strict mode needs lambda >= {min_lam:.3e}",
            min_lambda=min_lam,
        )
    return params, info


def bandwidth_budget(params, J):
    """Per-axis bandwidth of the principal perturbation (slow amplitudes excluded)."""
    worst = 0.0
    for j in range(min(J, 1) + 1):
        for xi in direction_set(j).plus:
            worst = max(worst, density_bandwidth(xi, params) + wave_bandwidth(xi, params.lam))
    return worst


# ---------------------------------------------------------------- perturbations


@dataclass
class BlockSample:
    """Everything about one block at one time."""

    block: Block
    a: np.ndarray
    da: np.ndarray
    dasq: np.ndarray  # finite difference of a^2
    eta: np.ndarray
    eta_t: np.ndarray
    c: np.ndarray
    s: np.ndarray

    @property
    def xi(self):
        return self.block.xi


def block_samples(blocks, a, da, dasq, params, t, grid):
    out = []
    for i, b in enumerate(blocks):
        if not (a[i].any() or da[i].any() or dasq[i].any()):
            continue
        c, s = phase_pair_values(b.xi_exact, params.lam, grid)
        e, e_t = eta_and_dt(b.xi, params, t, grid)
        out.append(BlockSample(b, a[i], da[i], dasq[i], e, e_t, c, s))
    return out


def _vec(xi, f):
    return xi[:, None, None] * f


def principal(samples):
    """w^p = -sqrt2 sum a eta sin(lam xi_perp.x) xi."""
    return sum(-np.sqrt(2) * _vec(bs.xi, bs.a * bs.eta * bs.s) for bs in samples)


def stream_function(samples, lam):
    """Phi with w^p + w^c = perp_grad Phi."""
    return sum(-np.sqrt(2) / lam * bs.a * bs.eta * bs.c for bs in samples)


def corrector(samples, lam, grid):
    """w^c = -(sqrt2/lam) sum cos(lam xi_perp.x) perp_grad(a eta)."""
    out = 0.0
    for bs in samples:
        out = out + bs.c * ops.perp_grad(bs.a * bs.eta, grid)
    return -np.sqrt(2) / lam * out


def temporal(samples, mu, grid):
    """w^t = -(1/mu) P_H P_{!=0} sum a^2 eta^2 xi."""
    acc = sum(_vec(bs.xi, bs.a**2 * bs.eta**2) for bs in samples)
    return -ops.leray(ops.mean_free(acc, grid), grid) / mu


@dataclass
class PerturbationSample:
    wp: np.ndarray
    wc: np.ndarray
    wt: np.ndarray
    phi: np.ndarray

    @property
    def w1(self):
        return self.wp + self.wc + self.wt


def perturbation_at(samples, params, grid):
    zero = np.zeros((2,) + grid.shape)
    if not samples:
        return PerturbationSample(zero, zero.copy(), zero.copy(), np.zeros(grid.shape))
    return PerturbationSample(
        principal(samples),
        corrector(samples, params.lam, grid),
        temporal(samples, params.mu, grid),
        stream_function(samples, params.lam),
    )


@dataclass
class PerturbationBundle:
    times: np.ndarray
    wp: np.ndarray
    wc: np.ndarray
    wt: np.ndarray
    phi: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def w1(self):
        return self.wp + self.wc + self.wt


def amplitude_derivatives(values, times):
    """Fourth-order d/dt of a and of a^2 at every sample; values (M, nb, Ng, Ng)."""
    M = len(times)
    h = times[1] - times[0]
    da = np.zeros_like(values)
    dasq = np.zeros_like(values)
    for m in range(M):
        idx, w = fd_stencil(m, M, h)
        da[m] = np.tensordot(w, values[idx], axes=1)
        dasq[m] = np.tensordot(w, values[idx] ** 2, axes=1)
    return da, dasq


def assemble_wp_wc_wt(amps, params, grid, times):
    """Time-sampled perturbation pieces for a (small) AmplitudeSet."""
    da, dasq = amplitude_derivatives(amps.values, times)
    parts = []
    for m, t in enumerate(times):
        samples = block_samples(amps.blocks, amps.values[m], da[m], dasq[m], params, t, grid)
        parts.append(perturbation_at(samples, params, grid))
    bundle = PerturbationBundle(
        np.asarray(times),
        np.stack([p.wp for p in parts]),
        np.stack([p.wc for p in parts]),
        np.stack([p.wt for p in parts]),
        np.stack([p.phi for p in parts]),
    )
    w1 = bundle.w1
    bundle.diagnostics = {
        "max_div_w1": float(max(np.abs(ops.div(w, grid)).max() for w in w1)),
        "max_mean_w1": float(np.abs(w1.mean(axis=(-2, -1))).max()),
        "L2_wp": [ops.lp_norm(w, 2) for w in bundle.wp],
        "L2_wc": [ops.lp_norm(w, 2) for w in bundle.wc],
        "L2_wt": [ops.lp_norm(w, 2) for w in bundle.wt],
    }
    return bundle
