import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ttqpo import (
    eigenfunction,
    integrate,
    make_constant_schedule,
    oracle_probabilities,
    probability_table,
    propagator_kernel,
    q_tt_simple,
    spectrum_validity_intervals,
)
from ttqpo.errors import PreconditionError, SingularKernelError, UndefinedSpectrumError
from ttqpo.oracle import PositionGrid, default_grid, eigenfunction_table, hermite_table, kernel_matrix

from conftest import cubic

INTERIOR = (0.1, 0.2, 0.25, 0.3, 0.4)


def zeta_at(s, t):
    return 1.0 + float(s.omega_dot(t) / s.omega(t)) / (2j * math.sqrt(float(s.big_omega_sq(t))))


def test_grid_shape():
    g = PositionGrid(5.0, 21)
    assert g.spacing == 0.5
    assert g.points[10] == 0.0
    assert g.coarsened() == PositionGrid(5.0, 11)


def test_grid_validation():
    with pytest.raises(ValueError):
        PositionGrid(5.0, 10)
    with pytest.raises(ValueError):
        PositionGrid(0.0, 11)


def test_default_grid_width():
    s = cubic(0.5)
    g = default_grid(s, 0.5)
    # Omega at both ends is omega itself (flat ends), so the narrower one is Omega = 2
    assert g.half_width == pytest.approx(10.0 / math.sqrt(2.0), rel=1e-14)
    assert g.n_points == 1201


# eigenfunctions ---------------------------------------------------------------------


def test_hermite_values():
    h = hermite_table(4, np.array([0.5]))[:, 0]
    np.testing.assert_allclose(h, [1.0, 1.0, -1.0, -5.0, 1.0], rtol=1e-14)


def test_ground_state_at_origin():
    assert eigenfunction(0, 1.0, 1.0, 0.0) == pytest.approx(math.pi**-0.25, rel=1e-15)


def test_second_level_at_unit_position():
    expected = (4 - 2) / math.sqrt(8) * math.pi**-0.25 * math.exp(-0.5)
    assert eigenfunction(2, 1.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-14)


def test_orthonormal_with_complex_zeta():
    s = cubic(0.5)
    t = 0.2
    big = math.sqrt(float(s.big_omega_sq(t)))
    zeta = zeta_at(s, t)
    assert abs(zeta.imag) > 0.1
    x = np.linspace(-12, 12, 4001)
    phi = eigenfunction_table(6, big, zeta, x)
    gram = (phi.conj() @ phi.T) * (x[1] - x[0])
    assert np.max(np.abs(gram - np.eye(7))) < 1e-12


def test_eigenfunction_level_limits():
    with pytest.raises(ValueError):
        eigenfunction(13, 1.0, 1.0, 0.0)
    with pytest.raises(UndefinedSpectrumError):
        eigenfunction(0, -1.0, 1.0, 0.0)


# kernel ----------------------------------------------------------------------------------


def test_quarter_period_kernel_constant_frequency():
    s = make_constant_schedule(0.0, math.pi, 1.0)
    traj = integrate(s, "tt", rel_tol=1e-12)
    x = np.array([-1.0, 0.3, 2.0])
    x0 = np.array([0.5, -0.7])
    k = propagator_kernel(traj, s, math.pi / 2, x, x0)
    expected = np.sqrt(1 / (2j * math.pi)) * np.exp(-1j * np.outer(x, x0))
    np.testing.assert_allclose(k, expected, atol=1e-9)


def test_kernel_singular_at_start():
    s = cubic(0.5)
    traj = integrate(s, "tt")
    with pytest.raises(SingularKernelError):
        propagator_kernel(traj, s, 0.0, 0.0, 0.0)


def test_kernel_needs_tt_trajectory():
    s = cubic(0.5)
    with pytest.raises(PreconditionError):
        propagator_kernel(integrate(s, "adiabatic"), s, 0.3, 0.0, 0.0)


def test_propagated_eigenstates_stay_orthonormal(tt_trajectories, schedules):
    # unitarity of the kernel on the subspace the oracle uses
    s, traj = schedules[0.5], tt_trajectories[0.5]
    g = default_grid(s, 0.3)
    x = g.points
    phi0 = eigenfunction_table(6, 2.0, 1.0, x)
    psi = propagator_kernel(traj, s, 0.3, x, x) @ phi0.T * g.spacing
    gram = psi.conj().T @ psi * g.spacing
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-3
    np.testing.assert_allclose(np.diag(gram).real, 1.0, atol=1e-3)


def test_kernel_composition_through_intermediate_time(tt_trajectories, schedules):
    s, traj = schedules[0.5], tt_trajectories[0.5]
    t1, t2 = 0.2, 0.4
    # classical data for the second leg, started afresh at t1
    leg = solve_ivp(
        lambda t, y: [y[1], -s.tilde_omega_sq(t) * y[0], y[3], -s.tilde_omega_sq(t) * y[2]],
        (t1, t2),
        [0.0, 1.0, 1.0, 0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
    )
    mu, mu_dot, nu = leg.y[0, -1], leg.y[1, -1], leg.y[2, -1]
    rate = lambda t: float(s.omega_dot(t) / s.omega(t))
    g = default_grid(s, t2)
    x, dx = g.points, g.spacing
    phi0 = eigenfunction(0, 2.0, 1.0, x)
    mid = propagator_kernel(traj, s, t1, x, x) @ phi0 * dx
    composed = kernel_matrix(mu, mu_dot, nu, rate(t2), rate(t1), x, x) @ mid * dx
    direct = propagator_kernel(traj, s, t2, x, x) @ phi0 * dx
    target = eigenfunction(0, math.sqrt(float(s.big_omega_sq(t2))), zeta_at(s, t2), x)
    a = np.vdot(target, composed) * dx
    b = np.vdot(target, direct) * dx
    assert abs(a - b) < 1e-4


# probabilities ----------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def traj05():
    return integrate(cubic(0.5), "tt", rel_tol=1e-12)


def test_identity_at_final_time(traj05):
    result = oracle_probabilities(traj05, cubic(0.5), 0.5)
    assert np.max(np.abs(result.probs - np.eye(5))) < 1e-3


@pytest.mark.parametrize("t", INTERIOR)
def test_matches_closed_form(traj05, t):
    s = cubic(0.5)
    assert abs(traj05.state(t)[0]) > 0.05
    result = oracle_probabilities(traj05, s, t)
    closed = probability_table(q_tt_simple(s, t), 4).probs
    assert np.max(np.abs(result.probs - closed)) < 1e-4
    assert result.est_error < 1e-8


def test_parity_selection(traj05):
    result = oracle_probabilities(traj05, cubic(0.5), 0.2)
    assert result.probs[1, 0] < 1e-6
    assert result.probs[3, 2] < 1e-6


def test_grid_refinement_is_at_least_second_order(traj05):
    s, t = cubic(0.5), 0.3
    closed = probability_table(q_tt_simple(s, t), 4).probs
    width = default_grid(s, t).half_width
    errors = [
        np.max(np.abs(oracle_probabilities(traj05, s, t, grid=PositionGrid(width, n)).probs - closed))
        for n in (41, 81)
    ]
    # the 41-point grid is still resolving the integrand; 81 points reach the ODE floor
    assert errors[0] > 1e-6
    assert errors[1] <= errors[0] / 4


def test_column_sums_with_six_levels(traj05):
    s, t = cubic(0.5), 0.25
    assert q_tt_simple(s, t) <= 1.5
    sums = oracle_probabilities(traj05, s, t, n_oracle_max=6).probs.sum(axis=0)
    assert np.all(sums[:3] >= 0.999)


def test_oracle_errors(tt_trajectories, schedules):
    s = schedules[0.2]
    (a, b), = spectrum_validity_intervals(s, 1001)
    with pytest.raises(UndefinedSpectrumError):
        oracle_probabilities(tt_trajectories[0.2], s, 0.5 * (a + b))
    with pytest.raises(ValueError):
        oracle_probabilities(tt_trajectories[0.5], schedules[0.5], 0.3, n_oracle_max=7)
    with pytest.raises(PreconditionError):
        oracle_probabilities(integrate(schedules[0.5], "adiabatic"), schedules[0.5], 0.3)
