"""Classical energies, invariants and the adiabaticity parameters.

``Q`` equals 1 exactly when no transitions occur.  For the transitionless
oscillator it is available in three equivalent forms:

* :func:`q_tt_general` from the classical trajectory (valid for any schedule),
* :func:`q_tt_simple`, the frequency ratio ``omega / Omega``,
* :func:`q_tt_rho_form`, from the Ermakov amplitude ``rho = omega**-0.5``.

The last two need ``omega_dot(t0) = 0``.  Husimi's ``Q*`` for the plain
oscillator is :func:`q_husimi`.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cpo import CpoTrajectory, OscillatorVariant
from .errors import PreconditionError, UndefinedSpectrumError
from .schedule import FrequencySchedule, check_time

__all__ = [
    "EnergyPair",
    "AdiabaticityCurve",
    "energies",
    "q_tt_general",
    "q_energy_form",
    "q_tt_simple",
    "q_tt_rho_form",
    "q_husimi",
    "ermakov_lewis_invariant",
    "wronskian_energy_forms",
    "adiabaticity_curve",
    "CURVE_COLUMNS",
]

CURVE_COLUMNS = ("t", "q", "e_mu", "e_nu", "j_mu", "j_nu", "defined")


@dataclass(frozen=True)
class EnergyPair:
    """Classical energies of ``mu`` and ``nu`` and the same divided by the frequency."""

    e_mu: np.ndarray | float
    e_nu: np.ndarray | float
    j_mu: np.ndarray | float
    j_nu: np.ndarray | float


def _big_omega(s: FrequencySchedule, t, strict: bool):
    big_sq = s.big_omega_sq(t)
    if strict and np.any(big_sq <= 0):
        raise UndefinedSpectrumError("Omega^2 <= 0: the TT Hamiltonian has no discrete spectrum here")
    with np.errstate(invalid="ignore"):
        return np.sqrt(np.where(big_sq > 0, big_sq, np.nan))


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


def _energies(traj: CpoTrajectory, s: FrequencySchedule, t, strict: bool) -> EnergyPair:
    mu, mu_dot, nu, nu_dot = (np.asarray(v) for v in traj.state(t))
    freq = _big_omega(s, t, strict) if traj.variant is OscillatorVariant.TT else s.omega(t)
    e_mu = 0.5 * (mu_dot**2 + freq**2 * mu**2)
    e_nu = 0.5 * (nu_dot**2 + freq**2 * nu**2)
    return EnergyPair(*(_scalarize(v) for v in (e_mu, e_nu, e_mu / freq, e_nu / freq)))


def energies(traj: CpoTrajectory, s: FrequencySchedule, t) -> EnergyPair:
    """Energies of the classical solutions at ``t``.

    ``e = (x_dot**2 + c**2 x**2) / 2`` with ``c = Omega`` on TT trajectories
    and ``c = omega`` on adiabatic ones; ``j = e / c``.
    """
    check_time(s, t)
    return _energies(traj, s, t, strict=True)


def _q_general(traj: CpoTrajectory, s: FrequencySchedule, t, strict: bool):
    if s.big_omega_sq(s.t0) <= 0:
        raise UndefinedSpectrumError("Omega^2 <= 0 at t0")
    big0 = float(np.sqrt(s.big_omega_sq(s.t0)))
    big = _big_omega(s, t, strict)
    mu, mu_dot, nu, nu_dot = (np.asarray(v) for v in traj.state(t))
    rate = s.omega_dot(t) / s.omega(t)
    e_mu = 0.5 * (mu_dot**2 + big**2 * mu**2)
    e_nu = 0.5 * (nu_dot**2 + big**2 * nu**2)
    cross = big0**2 * mu_dot * mu + nu_dot * nu + 0.5 * rate * (big0**2 * mu**2 + nu**2)
    return big0 * e_mu / big + e_nu / (big0 * big) + rate * cross / (big * big0)


def q_tt_general(traj: CpoTrajectory, s: FrequencySchedule, t):
    """``Q^TT`` from a TT trajectory, including the term proportional to ``omega_dot``."""
    if traj.variant is not OscillatorVariant.TT:
        raise PreconditionError("q_tt_general needs a TT trajectory")
    check_time(s, t)
    return _scalarize(_q_general(traj, s, t, strict=True))


def q_energy_form(traj: CpoTrajectory, s: FrequencySchedule, t):
    """``Omega0 e_mu / Omega + e_nu / (Omega0 Omega)`` from a TT trajectory.

    This is the parameter that enters the generating function for any
    schedule; :func:`q_tt_general` adds a term that is zero when
    ``omega_dot(t0) = 0``.
    """
    if traj.variant is not OscillatorVariant.TT:
        raise PreconditionError("q_energy_form needs a TT trajectory")
    check_time(s, t)
    if s.big_omega_sq(s.t0) <= 0:
        raise UndefinedSpectrumError("Omega^2 <= 0 at t0")
    big0 = float(np.sqrt(s.big_omega_sq(s.t0)))
    en = _energies(traj, s, t, strict=True)
    big = _big_omega(s, t, strict=True)
    return _scalarize(big0 * np.asarray(en.e_mu) / big + np.asarray(en.e_nu) / (big0 * big))


def _require_flat_start(s: FrequencySchedule) -> None:
    if abs(float(s.omega_dot(s.t0))) > 1e-10:
        raise PreconditionError("this form of Q^TT needs omega_dot(t0) = 0")


def q_tt_simple(s: FrequencySchedule, t):
    """``Q^TT = omega / Omega``: frequency without over frequency with the counterdiabatic term."""
    _require_flat_start(s)
    check_time(s, t)
    return _scalarize(s.omega(t) / _big_omega(s, t, strict=True))


def q_tt_rho_form(s: FrequencySchedule, t):
    """``Q^TT = (rho_dot**2 + Omega**2 rho**2 + 1 / rho**2) / (2 Omega)`` with ``rho = omega**-0.5``."""
    _require_flat_start(s)
    check_time(s, t)
    big = _big_omega(s, t, strict=True)
    w = s.omega(t)
    rho = 1.0 / np.sqrt(w)
    rho_dot = -0.5 * s.omega_dot(t) / w**1.5
    return _scalarize((rho_dot**2 + big**2 * rho**2 + 1.0 / rho**2) / (2.0 * big))


def _q_husimi(traj: CpoTrajectory, s: FrequencySchedule, t):
    w0 = s.omega_initial
    w = s.omega(t)
    mu, mu_dot, nu, nu_dot = (np.asarray(v) for v in traj.state(t))
    e_mu = 0.5 * (mu_dot**2 + w**2 * mu**2)
    e_nu = 0.5 * (nu_dot**2 + w**2 * nu**2)
    return w0 * e_mu / w + e_nu / (w0 * w)


def q_husimi(traj: CpoTrajectory, s: FrequencySchedule, t):
    """Husimi's ``Q*`` from a trajectory of the plain oscillator (coefficient ``omega**2``)."""
    if traj.variant is not OscillatorVariant.ADIABATIC:
        raise PreconditionError("q_husimi needs an ADIABATIC trajectory")
    check_time(s, t)
    return _scalarize(_q_husimi(traj, s, t))


def ermakov_lewis_invariant(
    traj: CpoTrajectory,
    rho: Callable,
    branch: str,
    t,
    rho_dot: Callable | None = None,
    W: float = 1.0,
    h: float | None = None,
):
    """Ermakov-Lewis invariant of one fundamental solution.

    For ``branch="mu"``::

        I = Omega0 / 2 * ((rho_dot mu - rho mu_dot)**2 + W**2 mu**2 / rho**2)

    and for ``branch="nu"`` the same with ``nu`` and prefactor ``1 / (2 Omega0)``.
    ``W`` is the constant Wronskian, so a consistent ``(rho, trajectory)``
    pair gives ``W**2 / 2``.  ``rho_dot`` falls back to central differences.
    """
    s = traj.schedule
    check_time(s, t)
    big0 = float(np.sqrt(s.big_omega_sq(s.t0)))
    if rho_dot is None:
        step = 1e-5 * s.duration if h is None else h
        rho_dot = lambda x: (rho(np.asarray(x) + step) - rho(np.asarray(x) - step)) / (2 * step)  # noqa: E731
    mu, mu_dot, nu, nu_dot = (np.asarray(v) for v in traj.state(t))
    r, rd = rho(t), rho_dot(t)
    if branch == "mu":
        value = 0.5 * big0 * ((rd * mu - r * mu_dot) ** 2 + W * W * mu**2 / r**2)
    elif branch == "nu":
        value = 0.5 / big0 * ((rd * nu - r * nu_dot) ** 2 + W * W * nu**2 / r**2)
    else:
        raise ValueError(f"branch must be 'mu' or 'nu', got {branch!r}")
    return _scalarize(value)


def wronskian_energy_forms(traj: CpoTrajectory, s: FrequencySchedule, t):
    """The Wronskian rewritten through the TT energies, one value per solution.

    ``W_mu = 2 omega0 / omega * (E_mu + (mu_dot + mu r) mu r)`` and
    ``W_nu = 2 / (omega omega0) * (E_nu + (nu_dot + nu r) nu r)`` with
    ``r = omega_dot / (2 omega)``.  Both equal 1 along a TT trajectory when
    ``omega_dot(t0) = 0``.
    """
    _require_flat_start(s)
    check_time(s, t)
    en = energies(traj, s, t)
    mu, mu_dot, nu, nu_dot = (np.asarray(v) for v in traj.state(t))
    w0 = s.omega_initial
    w = s.omega(t)
    r = 0.5 * s.omega_dot(t) / w
    w_mu = 2.0 * w0 / w * (en.e_mu + (mu_dot + mu * r) * mu * r)
    w_nu = 2.0 / (w * w0) * (en.e_nu + (nu_dot + nu * r) * nu * r)
    return _scalarize(w_mu), _scalarize(w_nu)


@dataclass(frozen=True)
class AdiabaticityCurve:
    times: np.ndarray
    q: np.ndarray
    energies: EnergyPair
    variant: OscillatorVariant
    defined_mask: np.ndarray

    def to_csv(self, path) -> None:
        e = self.energies
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CURVE_COLUMNS)
            for i, t in enumerate(self.times):
                ok = bool(self.defined_mask[i])
                vals = [t, self.q[i], e.e_mu[i], e.e_nu[i], e.j_mu[i], e.j_nu[i]]
                writer.writerow([repr(float(v)) for v in vals] + [str(ok).lower()])


def adiabaticity_curve(traj: CpoTrajectory, s: FrequencySchedule | None = None) -> AdiabaticityCurve:
    """``Q`` and energies on the trajectory's output grid.

    TT trajectories give ``Q^TT`` from the general trajectory form and are
    masked (NaN) where ``Omega^2 <= 0``; adiabatic trajectories give ``Q*``.
    """
    s = traj.schedule if s is None else s
    t = traj.times
    en = _energies(traj, s, t, strict=False)
    if traj.variant is OscillatorVariant.TT:
        q = np.asarray(_q_general(traj, s, t, strict=False), dtype=float)
        defined = s.big_omega_sq(t) > 0
    else:
        q = np.asarray(_q_husimi(traj, s, t), dtype=float)
        defined = np.ones_like(t, dtype=bool)
    return AdiabaticityCurve(t, q, en, traj.variant, defined)
