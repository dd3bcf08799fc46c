"""Frequency protocols and the effective frequencies they induce.

A schedule is a positive frequency ``omega(t)`` on ``[t0, tf]`` together with
its first two time derivatives.  Everything downstream (the classical
oscillators, the adiabaticity parameters, the transition probabilities) is a
function of these three quantities.

Units: mass and hbar are both 1.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidFrequencyError, InvalidIntervalError, OutOfRangeError, ScheduleError

__all__ = [
    "ScheduleKind",
    "FrequencySchedule",
    "EffectiveFrequencies",
    "make_cubic_schedule",
    "make_constant_schedule",
    "make_tabulated_schedule",
    "effective_frequencies",
    "spectrum_validity_intervals",
    "check_time",
]

# relative slack used when deciding whether a time lies inside [t0, tf]
_RANGE_SLACK = 1e-12


class ScheduleKind(str, enum.Enum):
    CONSTANT = "constant"
    CUBIC = "cubic"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class FrequencySchedule:
    """Frequency protocol ``omega(t)`` on ``[t0, tf]``.

    Use :func:`make_constant_schedule`, :func:`make_cubic_schedule` or
    :func:`make_tabulated_schedule` rather than calling this directly.

    The evaluation methods (``omega``, ``omega_dot``, ``omega_ddot``) are
    vectorised and do not range-check, so finite-difference stencils may
    step slightly outside the interval.  Public operations that take a time
    argument check it with :func:`check_time`.
    """

    kind: ScheduleKind
    t0: float
    tf: float
    omega0: float | None = None
    omegaf: float | None = None
    samples: tuple[tuple[float, float], ...] | None = None
    _spline: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if not np.isfinite(self.t0) or not np.isfinite(self.tf) or self.tf <= self.t0:
            raise InvalidIntervalError(f"need tf > t0, got t0={self.t0!r}, tf={self.tf!r}")

        if self.kind is ScheduleKind.TABULATED:
            if self.samples is None or len(self.samples) < 2:
                raise ScheduleError("a tabulated schedule needs at least two samples")
            ts = np.array([p[0] for p in self.samples], dtype=float)
            ws = np.array([p[1] for p in self.samples], dtype=float)
            if np.any(np.diff(ts) <= 0):
                raise ScheduleError("sample times must be strictly increasing")
            if ts[0] != self.t0 or ts[-1] != self.tf:
                raise InvalidIntervalError("sample times must start at t0 and end at tf")
            if np.any(ws <= 0):
                raise InvalidFrequencyError("tabulated frequencies must be positive")
            spline = CubicSpline(ts, ws, bc_type="clamped")
            object.__setattr__(self, "_spline", (spline, spline.derivative(1), spline.derivative(2)))
            n_check = 10 * len(ts)
        else:
            if self.omega0 is None or not self.omega0 > 0:
                raise InvalidFrequencyError(f"omega0 must be positive, got {self.omega0!r}")
            if self.kind is ScheduleKind.CONSTANT:
                object.__setattr__(self, "omegaf", self.omega0)
            if self.omegaf is None or not self.omegaf > 0:
                raise InvalidFrequencyError(f"omegaf must be positive, got {self.omegaf!r}")
            n_check = 1000

        grid = np.linspace(self.t0, self.tf, max(n_check, 1000))
        if not np.all(self.omega(grid) > 0):
            raise InvalidFrequencyError("omega(t) must stay positive on [t0, tf]")

    @property
    def duration(self) -> float:
        return self.tf - self.t0

    @property
    def omega_initial(self) -> float:
        return float(self.omega(self.t0))

    @property
    def omega_final(self) -> float:
        return float(self.omega(self.tf))

    def _unit_time(self, t):
        return (np.asarray(t, dtype=float) - self.t0) / self.duration

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is ScheduleKind.CONSTANT:
            return np.full_like(t, self.omega0)
        if self.kind is ScheduleKind.CUBIC:
            s = self._unit_time(t)
            return self.omega0 + (self.omegaf - self.omega0) * (3.0 - 2.0 * s) * s * s
        return self._spline[0](t)

    def omega_dot(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is ScheduleKind.CONSTANT:
            return np.zeros_like(t)
        if self.kind is ScheduleKind.CUBIC:
            s = self._unit_time(t)
            return (self.omegaf - self.omega0) * 6.0 * s * (1.0 - s) / self.duration
        return self._spline[1](t)

    def omega_ddot(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is ScheduleKind.CONSTANT:
            return np.zeros_like(t)
        if self.kind is ScheduleKind.CUBIC:
            s = self._unit_time(t)
            return (self.omegaf - self.omega0) * 6.0 * (1.0 - 2.0 * s) / self.duration**2
        return self._spline[2](t)

    def big_omega_sq(self, t):
        """Squared level spacing of the TT Hamiltonian, signed (no clamping)."""
        w = self.omega(t)
        r = self.omega_dot(t) / w
        return w * w - 0.25 * r * r

    def tilde_omega_sq(self, t):
        """Coefficient of the classical oscillator induced by the TT Hamiltonian, signed."""
        w = self.omega(t)
        r = self.omega_dot(t) / w
        return w * w - 0.75 * r * r + 0.5 * self.omega_ddot(t) / w

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        slack = _RANGE_SLACK * self.duration
        return bool(np.all((t >= self.t0 - slack) & (t <= self.tf + slack)))

    # serialisation ---------------------------------------------------------

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"kind": self.kind.value, "t0": self.t0, "tf": self.tf}
        if self.kind is ScheduleKind.TABULATED:
            doc["samples"] = [[float(a), float(b)] for a, b in self.samples]
        else:
            doc["omega0"] = self.omega0
            doc["omegaf"] = self.omegaf
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FrequencySchedule":
        try:
            kind = ScheduleKind(doc["kind"])
            if kind is ScheduleKind.TABULATED:
                samples = doc["samples"]
                return make_tabulated_schedule([p[0] for p in samples], [p[1] for p in samples])
            t0, tf = float(doc["t0"]), float(doc["tf"])
            if kind is ScheduleKind.CONSTANT:
                return make_constant_schedule(t0, tf, float(doc["omega0"]))
            return make_cubic_schedule(t0, tf, float(doc["omega0"]), float(doc["omegaf"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ScheduleError):
                raise
            raise ScheduleError(f"malformed schedule document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FrequencySchedule":
        return cls.from_dict(json.loads(text))


def make_cubic_schedule(t0: float, tf: float, omega0: float, omegaf: float) -> FrequencySchedule:
    """Cubic ramp from ``omega0`` to ``omegaf`` with zero slope at both ends.

    ``omega(t) = omega0 + (omegaf - omega0) * (3 - 2 s) s**2`` with
    ``s = (t - t0) / (tf - t0)``.

    Examples
    --------
    >>> s = make_cubic_schedule(0.0, 0.5, 2.0, 4.0)
    >>> float(s.omega(0.0)), float(s.omega(0.5)), float(s.omega_dot(0.5))
    (2.0, 4.0, 0.0)
    """
    if not tf > t0:
        raise InvalidIntervalError(f"need tf > t0, got t0={t0!r}, tf={tf!r}")
    if not (omega0 > 0 and omegaf > 0):
        raise InvalidFrequencyError("both end frequencies must be positive")
    return FrequencySchedule(ScheduleKind.CUBIC, float(t0), float(tf), float(omega0), float(omegaf))


def make_constant_schedule(t0: float, tf: float, omega0: float) -> FrequencySchedule:
    return FrequencySchedule(ScheduleKind.CONSTANT, float(t0), float(tf), float(omega0), float(omega0))


def make_tabulated_schedule(times, omegas) -> FrequencySchedule:
    """Schedule interpolated through ``(times, omegas)``.

    A cubic spline with clamped (zero) end slopes is used, so
    ``omega_dot`` vanishes at both ends and ``omega_ddot`` is continuous.
    """
    times = [float(t) for t in times]
    omegas = [float(w) for w in omegas]
    if len(times) != len(omegas):
        raise ScheduleError("times and omegas must have equal length")
    if len(times) < 2:
        raise ScheduleError("a tabulated schedule needs at least two samples")
    return FrequencySchedule(
        ScheduleKind.TABULATED, times[0], times[-1], samples=tuple(zip(times, omegas))
    )


def check_time(s: FrequencySchedule, t) -> None:
    if not s.contains(t):
        raise OutOfRangeError(f"time {t!r} outside [{s.t0}, {s.tf}]")


@dataclass(frozen=True)
class EffectiveFrequencies:
    """Frequencies derived from ``omega`` and its derivatives at one or more times.

    ``zeta`` is NaN wherever ``big_omega_sq <= 0``.
    """

    omega: Any
    omega_dot: Any
    omega_ddot: Any
    big_omega_sq: Any
    tilde_omega_sq: Any
    zeta: Any


def effective_frequencies(s: FrequencySchedule, t) -> EffectiveFrequencies:
    check_time(s, t)
    w = s.omega(t)
    wd = s.omega_dot(t)
    wdd = s.omega_ddot(t)
    r = wd / w
    big = w * w - 0.25 * r * r
    tilde = w * w - 0.75 * r * r + 0.5 * wdd / w
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(np.where(big > 0, big, np.nan))
        zeta = 1.0 + r / (2j * root)
    if np.ndim(w) == 0:
        return EffectiveFrequencies(float(w), float(wd), float(wdd), float(big), float(tilde), complex(zeta))
    return EffectiveFrequencies(w, wd, wdd, big, tilde, zeta)


def spectrum_validity_intervals(s: FrequencySchedule, n_samples: int) -> list[tuple[float, float]]:
    """Time intervals on which ``Omega^2 <= 0`` (no discrete TT spectrum).

    ``Omega^2`` is scanned on ``n_samples`` equally spaced times and every
    sign change is located by bisection to ``1e-10 * (tf - t0)``.  Excursions
    narrower than the scan spacing can be missed.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    ts = np.linspace(s.t0, s.tf, int(n_samples))
    bad = s.big_omega_sq(ts) <= 0
    tol = 1e-10 * s.duration

    def crossing(a: float, b: float) -> float:
        # invariant: bad(a) != bad(b)
        bad_a = s.big_omega_sq(a) <= 0
        while b - a > tol:
            mid = 0.5 * (a + b)
            if (s.big_omega_sq(mid) <= 0) == bad_a:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    intervals = []
    start = s.t0 if bad[0] else None
    for i in range(1, len(ts)):
        if bad[i] and not bad[i - 1]:
            start = crossing(ts[i - 1], ts[i])
        elif bad[i - 1] and not bad[i]:
            intervals.append((float(start), float(crossing(ts[i - 1], ts[i]))))
            start = None
    if start is not None:
        intervals.append((float(start), float(s.tf)))
    return intervals
