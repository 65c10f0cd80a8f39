import numpy as np
import pytest

from boussinesq_ci.exceptions import CFLViolation, NonZeroMean, SamplingMismatch
from boussinesq_ci.spectral import Grid2D
from boussinesq_ci.spectral import operators as ops
from boussinesq_ci.temperature import (
    ThetaStepper,
    advance_theta,
    theta_difference_report,
    theta_energy_report,
    theta_max_principle,
)

G = Grid2D(32)
X1, X2 = G.x
THETA0 = np.cos(X1) + 0.5 * np.sin(X1 + 2 * X2)
PSI = np.sin(X1) * np.cos(X2) + 0.3 * np.cos(2 * X2)


def zero_velocity(t):
    return np.zeros((2,) + G.shape)


def shear(t):
    return 2 * (1 + np.sin(3 * t)) * ops.perp_grad(PSI, G)


def uniform(t):
    return np.stack([np.ones(G.shape), np.zeros(G.shape)])


def test_heat_exact():
    run = advance_theta(np.cos(X1), zero_velocity, 1e-3, 1.0, G, sample_times=[0.0, 0.5, 1.0])
    for t, th in zip(run.times, run.theta):
        exact = np.exp(-t) * np.cos(X1)
        assert np.abs(th - exact).max() <= 1e-6 * np.abs(exact).max()


def test_initial_sample_is_exact():
    run = advance_theta(THETA0, shear, 0.01, 0.1, G)
    assert np.array_equal(run.theta[0], THETA0)


def _galilean_error(dt):
    def exact(x1, x2, t):
        return np.exp(-t) * np.cos(x1) + 0.5 * np.exp(-5 * t) * np.sin(x1 + 2 * x2)

    run = advance_theta(exact(X1, X2, 0.0), uniform, dt, 1.0, G, sample_times=[0.0, 1.0])
    return np.abs(run.theta[-1] - exact(X1 - 1.0, X2, 1.0)).max()


def test_galilean_shift_second_order():
    errs = [_galilean_error(dt) for dt in (0.02, 0.01, 0.005)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders > 1.8) & (orders < 2.3))


def test_energy_drift_heat():
    run = advance_theta(np.cos(X1), zero_velocity, 1e-3, 1.0, G)
    rep = theta_energy_report(run, G)
    assert rep["drift"][0] == 0
    assert rep["max_drift"] <= 1e-6


def test_energy_drift_second_order():
    drifts = [theta_energy_report(advance_theta(THETA0, shear, dt, 1.0, G), G)["max_drift"] for dt in (0.01, 0.005)]
    assert 3 <= drifts[0] / drifts[1] <= 5


def test_mean_and_max_principle():
    th0 = THETA0 + 0.8 * np.cos(3 * X1 - X2)
    run = advance_theta(th0, shear, 0.005, 1.0, G)
    assert np.abs(run.theta.mean(axis=(-2, -1))).max() <= 1e-10
    assert theta_max_principle(run) <= 1e-3


def test_energy_nonincreasing():
    run = advance_theta(THETA0, shear, 0.005, 1.0, G)
    e = np.mean(run.theta**2, axis=(-2, -1))
    assert np.all(np.diff(e) <= 1e-8)


def test_nonzero_mean_rejected():
    with pytest.raises(NonZeroMean):
        ThetaStepper(1 + np.cos(X1), zero_velocity, G)


def test_cfl_violation():
    fast = lambda t: 100 * uniform(t)  # noqa: E731
    with pytest.raises(CFLViolation):
        advance_theta(np.cos(X1), fast, 0.01, 0.1, G)


def test_divergent_velocity_rejected():
    grad_field = lambda t: ops.grad(np.cos(X1), G)  # noqa: E731
    with pytest.raises(CFLViolation, match="divergence"):
        advance_theta(np.cos(X1), grad_field, 0.01, 0.1, G)


def test_zero_theta_stays_zero():
    stepper = ThetaStepper(np.zeros(G.shape), lambda t: 1 / 0, G)
    assert np.array_equal(stepper.advance_to(1.0, 0.1), np.zeros(G.shape))


# ---------------------------------------------------------------- difference report

TIMES = np.linspace(0, 0.5, 11)


def _velocity_samples(fn):
    return np.stack([fn(t) for t in TIMES])


def test_difference_identical_dynamics():
    a = advance_theta(THETA0, shear, 0.005, 0.5, G, TIMES)
    b = advance_theta(THETA0, shear, 0.005, 0.5, G, TIMES)
    v = _velocity_samples(shear)
    rep = theta_difference_report(a, b, v, v, 1.5, G)
    assert rep["sup_L2_diff"] <= 1e-24
    assert np.abs(rep["Lp_diff"]).max() <= 1e-12
    assert rep["holds"]


def test_difference_zero_reference():
    zero = advance_theta(np.zeros(G.shape), zero_velocity, 0.005, 0.5, G, TIMES)
    other = advance_theta(np.zeros(G.shape), shear, 0.005, 0.5, G, TIMES)
    rep = theta_difference_report(other, zero, _velocity_samples(shear), _velocity_samples(zero_velocity), 1.5, G)
    assert np.abs(rep["rhs"]).max() == 0
    assert np.abs(rep["Lp_diff"]).max() <= 1e-12
    assert rep["holds"]


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0])
def test_difference_inequality(p):
    th0 = advance_theta(THETA0, zero_velocity, 0.005, 0.5, G, TIMES)
    th1 = advance_theta(THETA0, shear, 0.005, 0.5, G, TIMES)
    rep = theta_difference_report(th1, th0, _velocity_samples(shear), _velocity_samples(zero_velocity), p, G)
    assert rep["holds"]
    assert rep["Lp_diff"][-1] > 0


def test_difference_sampling_mismatch():
    a = advance_theta(THETA0, shear, 0.01, 0.5, G, TIMES)
    b = advance_theta(THETA0, shear, 0.01, 0.5, G, TIMES[:-1])
    with pytest.raises(SamplingMismatch):
        theta_difference_report(a, b, None, None, 1.5, G)
