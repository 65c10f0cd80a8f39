"""One step of the iteration: (v0, p0, theta0, R0) -> (v1, p1, theta1, R1) plus diagnostics."""

import warnings
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import BoussinesqCIError, ResolutionError, StageError
from ..geometry import default_eps0
from ..perturbation import (
    AREA,
    block_samples,
    blocks_for,
    bandwidth_budget,
    cancellation_defect,
    choose_params,
    cutoffs_at,
    fd_stencil,
    perturbation_at,
    rho0_value,
    rho_levels,
    amplitudes_at,
    window_bounds,
    window_holds,
)
from ..spectral import operators as ops
from ..stress import (
    P_REPORT,
    group_norms,
    oscillation_parts,
    outer_div,
    residual_at,
    stress_groups,
    temporal_corrector_dt,
    theta_equation_residual,
)
from ..temperature import CFL, ThetaStepper
from .config import theta0_values
from .energy import TERMS, energy_decomposition
from .state import IterationState


@dataclass
class DiagnosticsReport:
    header: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)

    def check(self, name, measured, threshold, passed=None, asserted=True):
        """Record an invariant; ``passed`` defaults to measured <= threshold.

        Checks with ``asserted=False`` are reported only and never fail a run.
        """
        measured = float(measured)
        if passed is None:
            passed = measured <= threshold
        self.checks.append(
            {"name": name, "measured": measured, "threshold": threshold,
             "passed": bool(passed), "asserted": bool(asserted)}
        )

    def failed(self):
        return [c["name"] for c in self.checks if c["asserted"] and not c["passed"]]

    def add(self, name, value):
        self.series.setdefault(name, []).append(float(value))

    def get_check(self, name):
        for c in self.checks:
            if c["name"] == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "header": self.header,
            "checks": self.checks,
            "series": self.series,
            "scalars": self.scalars,
        }


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, BoussinesqCIError) and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


class AmplitudeSource:
    """Amplitudes per time sample, computed on demand with a small cache."""

    def __init__(self, state0, J, rho0, delta, eps0, size=8):
        self.state0, self.J, self.rho0 = state0, J, rho0
        self.delta, self.eps0 = delta, eps0
        self.h = state0.times[1] - state0.times[0]
        self._cache = OrderedDict()
        self.size = size

    def at(self, m):
        if m in self._cache:
            self._cache.move_to_end(m)
            return self._cache[m]
        R0 = self.state0.sample(m)["R"]
        chi = cutoffs_at(R0, self.delta, self.eps0)
        full = np.zeros((self.J + 1,) + chi.shape[1:])
        full[: chi.shape[0]] = chi
        rhos = rho_levels(self.rho0[m], self.delta, self.J)
        entry = (amplitudes_at(full, R0, rhos), full, rhos)
        self._cache[m] = entry
        if len(self._cache) > self.size:
            self._cache.popitem(last=False)
        return entry

    def derivatives(self, m):
        idx, w = fd_stencil(m, self.state0.M, self.h)
        vals = [self.at(i)[0] for i in idx]
        da = sum(wi * v for wi, v in zip(w, vals))
        dasq = sum(wi * v**2 for wi, v in zip(w, vals))
        return da, dasq

    def interpolated(self, t):
        times = self.state0.times
        m = min(int(np.floor(t / self.h + 1e-12)), len(times) - 2)
        w = (t - times[m]) / self.h
        a0 = self.at(m)[0]
        if abs(w) < 1e-14:
            return a0
        return (1 - w) * a0 + w * self.at(m + 1)[0]


def _dphi(samples, lam):
    return sum(-np.sqrt(2) / lam * bs.c * (bs.da * bs.eta + bs.a * bs.eta_t) for bs in samples)


def _velocity_time_derivative(samples, lam, mu, grid):
    """Residual-route d_t w1: analytic in eta and phase, finite differences in a."""
    zero = np.zeros((2,) + grid.shape)
    if not samples:
        return zero
    dwp, dwc, src = zero.copy(), zero.copy(), zero.copy()
    for bs in samples:
        xi = bs.xi[:, None, None]
        q = bs.da * bs.eta + bs.a * bs.eta_t
        dwp += -np.sqrt(2) * xi * q * bs.s
        dwc += bs.c * ops.perp_grad(q, grid)
        src += xi * (2 * bs.a * bs.da * bs.eta**2 + 2 * bs.a**2 * bs.eta * bs.eta_t)
    dwc *= -np.sqrt(2) / lam
    dwt = -ops.leray(ops.mean_free(src, grid), grid) / mu
    return dwp + dwc + dwt


def run_iteration(state0, config, lam=None, store=True, every_norm=1, progress=None):
    """Build state1 from state0; returns (state1, report).

    With ``store=False`` state1 carries no field arrays (the report is complete).
    """
    grid = state0.grid
    times = state0.times
    M = len(times)
    h = times[1] - times[0]
    lam = config.lambda1 if lam is None else lam
    delta = state0.delta
    e_t = state0.energy(times)
    report = DiagnosticsReport()

    with _Stage("choose_params"):
        params, pinfo = choose_params(
            state0.alpha, lam, config.mode, config.r_override,
            None if config.sigma_override is None else int(config.sigma_override * lam),
            config.mu_override,
        )
        if config.sigma_override is not None:
            pinfo["lam_sigma"] = params.lam_sigma
        eps0 = config.eps0_override if config.eps0_override is not None else default_eps0()
    report.header.update(
        {
            "eps0": eps0,
            "eps0_source": "override" if config.eps0_override is not None else "bisection x 0.9",
            "lambda": params.lam,
            "r": params.r,
            "lam_sigma": params.lam_sigma,
            "sigma": str(params.sigma),
            "mu": params.mu,
            "N": params.N,
            "alpha": state0.alpha,
            "delta": delta,
            "Ng": grid.Ng,
            "M_time": M,
            "mode": config.mode,
            **{k: v for k, v in pinfo.items()},
        }
    )

    with _Stage("build_cutoffs"):
        J = 0
        chi0_int = np.zeros(M)
        v0_energy = np.zeros(M)
        max_R0 = 0.0
        partition_err = overlap = 0.0
        for m in range(M):
            s0 = state0.sample(m)
            chi = cutoffs_at(s0["R"], delta, eps0)
            J = max(J, chi.shape[0] - 1)
            chi0_int[m] = AREA * float(np.mean(chi[0] ** 2))
            v0_energy[m] = AREA * float(np.mean(np.sum(s0["v"] ** 2, axis=0)))
            max_R0 = max(max_R0, float(np.sqrt((s0["R"] ** 2).sum(axis=(0, 1))).max()))
            partition_err = max(partition_err, float(np.abs((chi**2).sum(axis=0) - 1).max()))
            for j in range(chi.shape[0] - 2):
                overlap = max(overlap, float(np.abs(chi[j] * chi[j + 2 :]).max()))
        report.header["j_max"] = J
        report.check("partition_of_unity", partition_err, 1e-10)
        report.check("cutoff_overlap", overlap, 1e-12)
        report.check("chi0_integral_positive", -chi0_int.min(), 0.0, passed=bool(chi0_int.min() > 0))
        bound_ok = J == 0 or 4.0**J <= 800 * max_R0 / (eps0 * delta)
        report.check("jmax_bound", 4.0**J, 800 * max_R0 / (eps0 * delta) if J else 1.0, passed=bound_ok)

    with _Stage("rho0_of_t"):
        win = window_holds(e_t, v0_energy, delta)
        report.check("input_window", 0.0, 0.0, passed=win, asserted=config.mode == "strict")
        if not win:
            if config.mode == "strict":
                raise StageError("rho0_of_t", BoussinesqCIError("input energy window violated"))
            warnings.warn("input energy window violated (demo mode continues)", stacklevel=2)
        rho0 = rho0_value(e_t, v0_energy, chi0_int, delta)
        report.series["rho0"] = [float(r) for r in rho0]

    blocks = blocks_for(J)
    amps = AmplitudeSource(state0, J, rho0, delta, eps0)

    budget = bandwidth_budget(params, J)
    report.header["perturbation_bandwidth"] = budget
    if budget > grid.Ng / 3:
        raise StageError(
            "assemble_wp_wc_wt",
            ResolutionError(f"perturbation bandwidth {budget} exceeds Ng/3 = {grid.Ng / 3:.1f}"),
        )

    theta0 = state0.theta0

    def velocity(t):
        a = amps.interpolated(t)
        z = np.zeros_like(a)
        samples = block_samples(blocks, a, z, z, params, t, grid)
        return state0.velocity_at(t) + perturbation_at(samples, params, grid).w1

    stepper = ThetaStepper(theta0, velocity, grid)

    stored = {k: [] for k in ("v", "v_t", "p", "theta", "R")} if store else None
    theta_buffer = []  # (m, theta1, v1) for the centered theta residual
    gamma_ratio_max = 0.0

    for m in range(M):
        t = times[m]
        with _Stage("build_amplitudes"):
            a, chi, rhos = amps.at(m)
            da, dasq = amps.derivatives(m)
            s0 = state0.sample(m)
            on0 = chi[0] != 0
            if on0.any():
                Rmag = np.sqrt((s0["R"] ** 2).sum(axis=(0, 1)))
                gamma_ratio_max = max(gamma_ratio_max, float(Rmag[on0].max() / rhos[0]))
            report.add("cancellation_defect", np.abs(cancellation_defect(a, s0["R"], chi, rhos)).max())
        with _Stage("assemble_wp_wc_wt"):
            samples = block_samples(blocks, a, da, dasq, params, t, grid)
            pert = perturbation_at(samples, params, grid)
            w1 = pert.w1
            v1 = s0["v"] + w1
            report.add("div_w1", np.abs(ops.div(w1, grid)).max())
            report.add("mean_w1", np.abs(w1.mean(axis=(-2, -1))).max())
            report.add("stream_identity", np.abs(ops.perp_grad(pert.phi, grid) - pert.wp - pert.wc).max())
        with _Stage("advance_theta"):
            if m == 0:
                theta1 = stepper.theta
            else:
                speed = max(float(np.sqrt((v1**2).sum(axis=0)).max()), stepper.max_speed, 1e-12)
                dt = min(config.theta_dt, 0.6 * CFL * grid.spacing / speed)
                theta1 = stepper.advance_to(t, dt)
            report.add("theta1_mean", abs(float(theta1.mean())))
            theta_buffer.append((theta1, v1))
            if len(theta_buffer) == 3:
                (tp, _), (tc, vc), (tn, _) = theta_buffer
                report.add("theta_residual", theta_equation_residual(tp, tn, h, tc, vc, grid))
                theta_buffer.pop(0)
        with _Stage("assemble_stress"):
            level = np.einsum("j,j...->...", rhos, chi**2)
            osc = oscillation_parts(samples, params, grid, level)
            dphi = _dphi(samples, params.lam) if samples else np.zeros(grid.shape)
            stress = stress_groups(pert, dphi, osc, s0["v"], theta1, s0["theta"], state0.alpha, grid)
            R1 = stress.R1
            p1 = s0["p"] + osc.p_diff
            report.add("R1_asym", np.abs(R1[0, 1] - R1[1, 0]).max())
            report.add("R1_trace", np.abs(R1[0, 0] + R1[1, 1]).max())
            report.add("Tosc_mean", np.abs(osc.T_osc.mean(axis=(-2, -1))).max())
            for name, g in osc.groups.items():
                report.add(f"Tosc_group_mean_{name}", np.abs(g.mean(axis=(-2, -1))).max())
            # the oscillation identity with the construction's own d_t w^t
            ident = (
                outer_div(pert.wp, pert.wp, grid)
                + ops.div(s0["R"], grid)
                + temporal_corrector_dt(osc.temporal_source, params.mu, grid)
                + ops.grad(osc.p_diff, grid)
                - osc.T_osc
            )
            scale = ops.lp_norm(outer_div(pert.wp, pert.wp, grid), 2) + ops.lp_norm(osc.T_osc, 2)
            report.add("oscillation_identity_rel", ops.lp_norm(ident, 2) / scale if scale else 0.0)
        with _Stage("verify_residual"):
            v1_t = s0["v_t"] + _velocity_time_derivative(samples, params.lam, params.mu, grid)
            l2, rel = residual_at(v1, v1_t, p1, theta1, R1, state0.alpha, grid)
            report.add("residual_L2", l2)
            report.add("residual_rel", rel)
        with _Stage("energy_decomposition"):
            terms, bounds = energy_decomposition(s0["v"], samples, pert, params, grid)
            energy1 = AREA * float(np.mean(np.sum(v1**2, axis=0)))
            target = float(e_t[m] * (1 - delta / 2))
            err = energy1 - target
            report.add("energy_v1", energy1)
            report.add("energy_target", target)
            report.add("E_err", err)
            report.add("E_err_rel", abs(err) / e_t[m])
            for k in TERMS:
                report.add(f"E_{k}", terms[k])
            for k, b in bounds.items():
                report.add(f"E_{k}_bound", b)
            report.add("energy_bookkeeping_defect", abs(err - sum(terms.values())) / e_t[m])
        if m % every_norm == 0 or m == M - 1:
            report.add("norm_time", t)
            for k, v in group_norms(stress).items():
                report.add(k, v)
            report.add("wp_L2", ops.lp_norm(pert.wp, 2))
            report.add("wc_L2", ops.lp_norm(pert.wc, 2))
            report.add("wt_L2", ops.lp_norm(pert.wt, 2))
            report.add("w1_minus_wp_L2", ops.lp_norm(pert.wc + pert.wt, 2))
            report.add("wp_L6/5", ops.lp_norm(pert.wp, 1.2))
            report.add(f"wp_L{config.p_report:.4g}", ops.lp_norm(pert.wp, config.p_report))
            report.add(f"R1_Lpreport", ops.lp_norm(R1, config.p_report))
            report.add("theta_diff_L2sq", float(np.mean((theta1 - s0["theta"]) ** 2)))
        if store:
            for k, v in (("v", v1), ("v_t", v1_t), ("p", p1), ("theta", theta1), ("R", R1)):
                stored[k].append(v)
        if progress is not None:
            progress(m, M)

    report.series.setdefault("theta_residual", [])
    report.header["theta_steps"] = stepper.steps
    report.header["theta_max_speed"] = stepper.max_speed
    report.scalars["R0_over_rho0_on_chi0"] = gamma_ratio_max
    report.check("R0_over_rho0_within_eps0", gamma_ratio_max, eps0)
    _summarize(report, e_t, delta)

    state1 = IterationState(
        grid, times, delta / 2, state0.energy, state0.alpha, theta0,
        provenance={"lambda": params.lam, "r": params.r, "lam_sigma": params.lam_sigma,
                    "mu": params.mu, "parent_delta": delta},
    )
    if store:
        for k, v in stored.items():
            setattr(state1, k, np.stack(v))
    return state1, report


def _summarize(report, e_t, delta):
    s = report.series
    mx = lambda k: float(np.max(np.abs(s[k])))
    report.check("div_w1", mx("div_w1"), 1e-10)
    report.check("mean_w1", mx("mean_w1"), 1e-12)
    report.check("stream_function_identity", mx("stream_identity"), 1e-10)
    report.check("cancellation_identity", mx("cancellation_defect"), 1e-9)
    report.check("Tosc_mean", mx("Tosc_mean"), 1e-10)
    report.check("R1_symmetric", mx("R1_asym"), 1e-10)
    report.check("R1_trace_free", mx("R1_trace"), 1e-10)
    report.check("theta1_mean", mx("theta1_mean"), 1e-10)
    report.check("oscillation_identity", mx("oscillation_identity_rel"), 1e-6)
    report.check("residual_relative", mx("residual_rel"), 1e-3)
    report.check("energy_bookkeeping", mx("energy_bookkeeping_defect"), 1e-9)
    # reported, not required at desk scale
    report.check("E_err_within_delta_e_over_8", mx("E_err_rel"), delta / 8, asserted=False)
    lo, hi = window_bounds(e_t, delta / 2)
    gap = e_t - np.asarray(s["energy_v1"])
    report.check("output_window", 0.0, 0.0, passed=bool(np.all((lo <= gap) & (gap <= hi))),
                 asserted=False)
    report.scalars["R1_L1_sup"] = mx("R1_L1")
    report.scalars["R1_Lpreport_sup"] = mx("R1_Lpreport")
    report.scalars["residual_rel_max"] = mx("residual_rel")
    report.scalars["E_err_rel_max"] = mx("E_err_rel")
    for k in TERMS:
        report.scalars[f"E_{k}_max"] = mx(f"E_{k}")


def initial_state(config, grid=None):
    from ..spectral import Grid2D
    from .state import bootstrap_state

    grid = Grid2D(config.Ng) if grid is None else grid
    theta0 = theta0_values(config.theta0_modes, grid)
    return bootstrap_state(grid, config.M_time, config.delta, config.energy, config.alpha, theta0)


def run_chain(config, lambdas=None, store_last=True, progress=None):
    """k chained steps with the given lambda schedule; returns states and reports."""
    lambdas = config.lambda_schedule() if lambdas is None else list(lambdas)
    state = initial_state(config)
    states, reports = [state], []
    for i, lam in enumerate(lambdas):
        store = store_last or i < len(lambdas) - 1
        state, rep = run_iteration(state, config, lam=lam, store=store, progress=progress)
        rep.header["step"] = i + 1
        states.append(state)
        reports.append(rep)
    return states, reports
