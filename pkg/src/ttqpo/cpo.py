"""Classical parametric oscillators behind the propagator.

Two fundamental solutions are integrated together,

    mu'' + c(t) mu = 0,   mu(t0) = 0,  mu'(t0) = 1
    nu'' + c(t) nu = 0,   nu(t0) = 1,  nu'(t0) = 0

with ``c = tilde_omega_sq`` for the transitionless (TT) oscillator and
``c = omega**2`` for the plain one.  Their Wronskian ``mu' nu - mu nu'`` is
exactly 1, and its numerical drift is reported with every trajectory.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    IntegrationError,
    OutOfRangeError,
    StepSizeUnderflowError,
    WronskianBlowupError,
)
from .schedule import FrequencySchedule

__all__ = ["OscillatorVariant", "CpoTrajectory", "integrate", "wronskian", "TRAJECTORY_COLUMNS"]

TRAJECTORY_COLUMNS = ("t", "mu", "mu_dot", "nu", "nu_dot", "wronskian")


class OscillatorVariant(str, enum.Enum):
    TT = "tt"
    ADIABATIC = "adiabatic"


@dataclass(frozen=True, eq=False)
class CpoTrajectory:
    variant: OscillatorVariant
    schedule: FrequencySchedule
    times: np.ndarray
    mu: np.ndarray
    mu_dot: np.ndarray
    nu: np.ndarray
    nu_dot: np.ndarray
    wronskian_max_drift: float
    rel_tol: float
    _dense: Any = field(default=None, repr=False)

    @property
    def wronskian_values(self) -> np.ndarray:
        return self.mu_dot * self.nu - self.mu * self.nu_dot

    def state(self, t):
        """``(mu, mu_dot, nu, nu_dot)`` at ``t`` from the dense-output interpolant."""
        t_arr = np.asarray(t, dtype=float)
        slack = 1e-12 * self.schedule.duration
        if np.any(t_arr < self.times[0] - slack) or np.any(t_arr > self.times[-1] + slack):
            raise OutOfRangeError(f"time outside trajectory range [{self.times[0]}, {self.times[-1]}]")
        y = self._dense(np.clip(t_arr, self.times[0], self.times[-1]))
        if t_arr.ndim == 0:
            return tuple(float(v) for v in y)
        return y[0], y[1], y[2], y[3]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_COLUMNS)
            for row in zip(self.times, self.mu, self.mu_dot, self.nu, self.nu_dot, self.wronskian_values):
                writer.writerow([repr(float(v)) for v in row])


def _coefficient(s: FrequencySchedule, variant: OscillatorVariant):
    if variant is OscillatorVariant.TT:
        return s.tilde_omega_sq
    return lambda t: s.omega(t) ** 2


def integrate(
    s: FrequencySchedule,
    variant: OscillatorVariant | str = OscillatorVariant.TT,
    rel_tol: float = 1e-10,
    n_output: int = 1001,
) -> CpoTrajectory:
    """Integrate both fundamental solutions over ``[s.t0, s.tf]``.

    Uses the Dormand-Prince 5(4) pair with dense output; samples are
    returned on ``n_output`` equally spaced times.  A signed (possibly
    negative) TT coefficient is integrated as is.

    Raises
    ------
    StepSizeUnderflowError
        The adaptive step collapsed.
    WronskianBlowupError
        ``max |W - 1|`` reached ``100 * rel_tol``.
    """
    variant = OscillatorVariant(variant)
    if not 1e-13 <= rel_tol <= 1e-3:
        raise ValueError(f"rel_tol must lie in [1e-13, 1e-3], got {rel_tol!r}")
    if n_output < 2:
        raise ValueError("n_output must be at least 2")

    coef = _coefficient(s, variant)

    def rhs(t, y):
        c = coef(t)
        return np.array([y[1], -c * y[0], y[3], -c * y[2]])

    times = np.linspace(s.t0, s.tf, int(n_output))
    sol = solve_ivp(
        rhs,
        (s.t0, s.tf),
        np.array([0.0, 1.0, 1.0, 0.0]),
        method="RK45",
        rtol=rel_tol,
        atol=1e-2 * rel_tol,
        dense_output=True,
    )
    if sol.status != 0:
        if "step size" in sol.message.lower():
            raise StepSizeUnderflowError(sol.message)
        raise IntegrationError(sol.message)

    mu, mu_dot, nu, nu_dot = sol.sol(times)
    drift = float(np.max(np.abs(mu_dot * nu - mu * nu_dot - 1.0)))
    if not drift < 100.0 * rel_tol:
        raise WronskianBlowupError(f"Wronskian drift {drift:.3e} exceeds 100*rel_tol={100 * rel_tol:.1e}")
    return CpoTrajectory(
        variant=variant,
        schedule=s,
        times=times,
        mu=mu,
        mu_dot=mu_dot,
        nu=nu,
        nu_dot=nu_dot,
        wronskian_max_drift=drift,
        rel_tol=rel_tol,
        _dense=sol.sol,
    )


def wronskian(traj: CpoTrajectory, t):
    """``mu' nu - mu nu'`` interpolated at ``t``."""
    mu, mu_dot, nu, nu_dot = traj.state(t)
    return mu_dot * nu - mu * nu_dot
