"""Phase-amplitude solutions of the transitionless oscillator.

For a schedule with ``omega_dot(t0) = 0`` the amplitude ``rho = omega**-0.5``
solves the Ermakov equation ``rho'' + tilde_omega_sq rho = 1 / rho**3`` and
the phase is ``theta(t) = int_{t0}^{t} omega``.  The two fundamental
solutions then follow without integrating any ODE:

    mu = sin(theta) / sqrt(omega(t0) omega(t))
    nu = sqrt(omega(t0) / omega(t)) cos(theta)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import NonPositiveAmplitudeError, PreconditionError
from .schedule import FrequencySchedule, check_time

__all__ = [
    "PhaseAmplitude",
    "phase",
    "phase_amplitude",
    "mu_closed",
    "nu_closed",
    "closed_form_state",
    "rho_closed",
    "rho_dot_closed",
    "ermakov_residual",
    "phase_amplitude_reconstruct",
    "fd_step",
]

START_SLOPE_TOL = 1e-10
DEFAULT_QUAD_TOL = 1e-12


def fd_step(s: FrequencySchedule) -> float:
    """Central-difference step used for numerical derivatives of rho and theta."""
    return 1e-5 * s.duration


def _require_flat_start(s: FrequencySchedule) -> None:
    slope = float(s.omega_dot(s.t0))
    if abs(slope) > START_SLOPE_TOL:
        raise PreconditionError(f"closed forms need omega_dot(t0) = 0, got {slope:.3e}")


def phase(s: FrequencySchedule, t, quad_tol: float = DEFAULT_QUAD_TOL):
    """``theta(t) = int_{t0}^{t} omega(t') dt'`` by adaptive Gauss-Kronrod quadrature.

    For an array of times the integral is accumulated over consecutive
    sorted times, each piece to absolute tolerance ``quad_tol``.
    """
    _require_flat_start(s)
    check_time(s, t)
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim == 0:
        return quad(s.omega, s.t0, float(t_arr), epsabs=quad_tol, epsrel=0.0, limit=200)[0]

    flat = t_arr.ravel()
    order = np.argsort(flat, kind="stable")
    knots = np.concatenate(([s.t0], flat[order]))
    pieces = [
        quad(s.omega, a, b, epsabs=quad_tol, epsrel=0.0, limit=200)[0] if b > a else 0.0
        for a, b in zip(knots[:-1], knots[1:])
    ]
    out = np.empty_like(flat)
    out[order] = np.cumsum(pieces)
    return out.reshape(t_arr.shape)


def rho_closed(s: FrequencySchedule) -> Callable:
    """Amplitude ``rho(t) = omega(t)**-0.5`` as a vectorised callable."""
    return lambda t: 1.0 / np.sqrt(s.omega(t))


def rho_dot_closed(s: FrequencySchedule) -> Callable:
    return lambda t: -0.5 * s.omega_dot(t) / s.omega(t) ** 1.5


def closed_form_state(s: FrequencySchedule, t, quad_tol: float = DEFAULT_QUAD_TOL):
    """``(mu, mu_dot, nu, nu_dot)`` of the TT oscillator from the closed forms."""
    theta = phase(s, t, quad_tol)
    w0 = s.omega_initial
    w = s.omega(t)
    half_rate = 0.5 * s.omega_dot(t) / w
    sin, cos = np.sin(theta), np.cos(theta)
    mu = sin / np.sqrt(w0 * w)
    nu = np.sqrt(w0 / w) * cos
    mu_dot = w * cos / np.sqrt(w0 * w) - half_rate * mu
    nu_dot = -np.sqrt(w0 / w) * w * sin - half_rate * nu
    return mu, mu_dot, nu, nu_dot


def mu_closed(s: FrequencySchedule, t, quad_tol: float = DEFAULT_QUAD_TOL):
    """``mu(t) = sin(theta) / sqrt(omega(t0) omega(t))``."""
    return closed_form_state(s, t, quad_tol)[0]


def nu_closed(s: FrequencySchedule, t, quad_tol: float = DEFAULT_QUAD_TOL):
    """``nu(t) = sqrt(omega(t0) / omega(t)) cos(theta)``."""
    return closed_form_state(s, t, quad_tol)[2]


@dataclass(frozen=True)
class PhaseAmplitude:
    """Phase, amplitude and the frequency ``f`` recovered from the phase.

    ``f_sq`` uses the phase rate ``theta_dot = W / rho**2`` and central
    differences of it, so comparing it to ``tilde_omega_sq`` is a check of
    the amplitude, not a restatement of the schedule.
    """

    theta: Callable
    theta_dot: Callable
    rho: Callable
    f_sq: Callable


def phase_amplitude(s: FrequencySchedule, quad_tol: float = DEFAULT_QUAD_TOL, h: float | None = None) -> PhaseAmplitude:
    """Phase-amplitude representation of the TT solutions of ``s``.

    ``h`` is the central-difference step used by ``f_sq`` (default
    :func:`fd_step`).  Its second difference carries roundoff of order
    ``eps * omega / h**2``, so steps much below ``1e-3 * (tf - t0)`` trade
    truncation error for noise.
    """
    _require_flat_start(s)
    rho = rho_closed(s)
    h = fd_step(s) if h is None else h

    def theta_dot(t):
        return 1.0 / rho(t) ** 2

    def f_sq(t):
        d0 = theta_dot(t)
        dp, dm = theta_dot(np.asarray(t) + h), theta_dot(np.asarray(t) - h)
        d1 = (dp - dm) / (2 * h)
        d2 = (dp - 2 * d0 + dm) / (h * h)
        return d0**2 - 0.75 * d1**2 / d0**2 + 0.5 * d2 / d0

    return PhaseAmplitude(
        theta=lambda t: phase(s, t, quad_tol),
        theta_dot=theta_dot,
        rho=rho,
        f_sq=f_sq,
    )


def ermakov_residual(s: FrequencySchedule, rho: Callable, t, h: float | None = None, W: float = 1.0):
    """``rho'' + tilde_omega_sq rho - W**2 / rho**3`` with ``rho''`` by central differences.

    The step defaults to :func:`fd_step`; the result carries an ``O(h**2)``
    truncation error plus roundoff of order ``eps * rho / h**2``.
    """
    if h is None:
        h = fd_step(s)
    t = np.asarray(t, dtype=float)
    r0 = rho(t)
    rdd = (rho(t + h) - 2.0 * r0 + rho(t - h)) / (h * h)
    return rdd + s.tilde_omega_sq(t) * r0 - W * W / r0**3


def phase_amplitude_reconstruct(
    rho: Callable,
    W: float,
    omega_t0: float,
    t: float,
    t0: float = 0.0,
    quad_tol: float = DEFAULT_QUAD_TOL,
) -> tuple[float, float]:
    """Rebuild ``(mu, nu)`` at ``t`` from an amplitude ``rho``.

    ``theta = int_{t0}^{t} W / rho**2``, ``mu = rho sin(theta) / sqrt(omega_t0)``
    and ``nu = sqrt(omega_t0) rho cos(theta)``.
    """
    probe = np.asarray(rho(np.linspace(t0, t, 65)), dtype=float)
    if not np.all(probe > 0):
        raise NonPositiveAmplitudeError("rho must be positive on [t0, t]")
    theta = quad(lambda x: W / rho(x) ** 2, t0, t, epsabs=quad_tol, epsrel=0.0, limit=200)[0]
    r = float(rho(t))
    return r * np.sin(theta) / np.sqrt(omega_t0), np.sqrt(omega_t0) * r * np.cos(theta)
