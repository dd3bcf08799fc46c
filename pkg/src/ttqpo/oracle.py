"""Brute-force transition probabilities from the propagator.

Independent of the generating function and of ``Q``: the Gaussian kernel is
assembled from a classical TT trajectory, the instantaneous eigenfunctions
are tabulated on a uniform position grid, and every amplitude is a double
trapezoidal sum

    U[m, n] = sum_{x, x0} conj(phi_m(x; t)) K(x | x0) phi_n(x0; t0) dx dx0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpo import CpoTrajectory, OscillatorVariant
from .errors import PreconditionError, SingularKernelError, UndefinedSpectrumError
from .schedule import FrequencySchedule, check_time

__all__ = [
    "PositionGrid",
    "OracleResult",
    "default_grid",
    "hermite_table",
    "eigenfunction",
    "eigenfunction_table",
    "kernel_matrix",
    "propagator_kernel",
    "oracle_probabilities",
]

MAX_EIGEN_LEVEL = 12
MAX_ORACLE_LEVEL = 6
MU_SINGULAR = 1e-6


@dataclass(frozen=True)
class PositionGrid:
    half_width: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be odd and at least 3 so that x = 0 is a node")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    def coarsened(self) -> "PositionGrid":
        """Every other node of this grid (spacing doubled)."""
        return PositionGrid(self.half_width, (self.n_points - 1) // 2 + 1)


@dataclass(frozen=True)
class OracleResult:
    probs: np.ndarray
    grid: PositionGrid
    est_error: float


def default_grid(s: FrequencySchedule, t: float, n_points: int = 1201) -> PositionGrid:
    """``half_width = 10 / sqrt(min(Omega(t0), Omega(t)))``; wide enough for levels up to 6."""
    big_sq = min(float(s.big_omega_sq(s.t0)), float(s.big_omega_sq(t)))
    if big_sq <= 0:
        raise UndefinedSpectrumError("Omega^2 <= 0 at t0 or t")
    return PositionGrid(10.0 / big_sq**0.25, n_points)


def hermite_table(n_max: int, x) -> np.ndarray:
    """Physicists' Hermite polynomials ``H_0 .. H_{n_max}`` at ``x``, by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * x
    for n in range(1, n_max):
        out[n + 1] = 2.0 * x * out[n] - 2.0 * n * out[n - 1]
    return out


def _check_level(n: int, limit: int) -> None:
    if not 0 <= n <= limit:
        raise ValueError(f"level must lie in [0, {limit}], got {n}")


def eigenfunction_table(n_max: int, big_omega: float, zeta: complex, x) -> np.ndarray:
    """Rows ``phi_0 .. phi_{n_max}`` of the TT eigenfunctions on ``x``.

    ``phi_n = (Omega/pi)**(1/4) / sqrt(2**n n!) H_n(sqrt(Omega) x) exp(-zeta Omega x**2 / 2)``.
    """
    if not big_omega > 0:
        raise UndefinedSpectrumError("eigenfunctions need Omega > 0")
    _check_level(n_max, MAX_EIGEN_LEVEL)
    x = np.asarray(x, dtype=float)
    h = hermite_table(n_max, math.sqrt(big_omega) * x)
    norms = np.array([1.0 / math.sqrt(2.0**n * math.factorial(n)) for n in range(n_max + 1)])
    envelope = (big_omega / math.pi) ** 0.25 * np.exp(-0.5 * zeta * big_omega * x * x)
    return norms.reshape((-1,) + (1,) * x.ndim) * h * envelope


def eigenfunction(n: int, big_omega: float, zeta: complex, x):
    _check_level(n, MAX_EIGEN_LEVEL)
    return eigenfunction_table(n, big_omega, zeta, x)[n]


def kernel_matrix(mu: float, mu_dot: float, nu: float, rate_t: float, rate_t0: float, x, x0) -> np.ndarray:
    """Gaussian propagator ``K(x | x0)`` for given classical data, broadcast over ``x[:, None], x0[None, :]``.

    ``rate`` is ``omega_dot / omega`` at the final (``rate_t``) and initial
    (``rate_t0``) time.
    """
    if abs(mu) <= MU_SINGULAR:
        raise SingularKernelError(f"|mu| = {abs(mu):.2e} is too small; the kernel is singular")
    x = np.asarray(x, dtype=float)[:, None]
    x0 = np.asarray(x0, dtype=float)[None, :]
    pref = np.sqrt(1.0 / (2j * math.pi * mu))
    phase = (mu_dot / mu + 0.5 * rate_t) * x * x - 2.0 * x * x0 / mu + (nu / mu - 0.5 * rate_t0) * x0 * x0
    return pref * np.exp(0.5j * phase)


def _classical_data(traj: CpoTrajectory, s: FrequencySchedule, t: float):
    if traj.variant is not OscillatorVariant.TT:
        raise PreconditionError("the TT propagator needs a TT trajectory")
    check_time(s, t)
    mu, mu_dot, nu, _ = traj.state(t)
    rate_t = float(s.omega_dot(t) / s.omega(t))
    rate_t0 = float(s.omega_dot(s.t0) / s.omega(s.t0))
    return mu, mu_dot, nu, rate_t, rate_t0


def propagator_kernel(traj: CpoTrajectory, s: FrequencySchedule, t: float, x, x0):
    """``K(x | x0)`` from ``t0`` to ``t`` on the outer product of ``x`` and ``x0``."""
    return kernel_matrix(*_classical_data(traj, s, t), np.atleast_1d(x), np.atleast_1d(x0))


def _amplitudes(kernel_args, grid: PositionGrid, phi_t: np.ndarray, phi_0: np.ndarray) -> np.ndarray:
    x = grid.points
    k = kernel_matrix(*kernel_args, x, x)
    dx = grid.spacing
    return (phi_t.conj() @ k @ phi_0.T) * dx * dx


def oracle_probabilities(
    traj: CpoTrajectory,
    s: FrequencySchedule,
    t: float,
    n_oracle_max: int = 4,
    grid: PositionGrid | None = None,
) -> OracleResult:
    """``P[m, n] = |U[m, n]|**2`` for ``m, n <= n_oracle_max`` by double quadrature.

    ``est_error`` is the largest change of any entry between this grid and
    one with half as many intervals, divided by 3 (Richardson, second order).
    """
    _check_level(n_oracle_max, MAX_ORACLE_LEVEL)
    big0_sq, big_sq = float(s.big_omega_sq(s.t0)), float(s.big_omega_sq(t))
    if big0_sq <= 0 or big_sq <= 0:
        raise UndefinedSpectrumError("Omega^2 <= 0 at t0 or t")
    args = _classical_data(traj, s, t)
    if abs(args[0]) <= MU_SINGULAR:
        raise SingularKernelError(f"|mu(t)| = {abs(args[0]):.2e}; the kernel is singular")
    grid = default_grid(s, t) if grid is None else grid

    zeta_t = 1.0 + args[3] / (2j * math.sqrt(big_sq))
    zeta_0 = 1.0 + args[4] / (2j * math.sqrt(big0_sq))

    def probs_on(g: PositionGrid) -> np.ndarray:
        phi_t = eigenfunction_table(n_oracle_max, math.sqrt(big_sq), zeta_t, g.points)
        phi_0 = eigenfunction_table(n_oracle_max, math.sqrt(big0_sq), zeta_0, g.points)
        return np.abs(_amplitudes(args, g, phi_t, phi_0)) ** 2

    fine = probs_on(grid)
    coarse = probs_on(grid.coarsened())
    est = float(np.max(np.abs(fine - coarse))) / 3.0
    return OracleResult(fine, grid, est)
