"""Transition probabilities between instantaneous eigenstates.

Every probability depends on time only through a single parameter
``Q >= 1``.  The generating function is

    sum_{m,n} u**n v**m P[m, n] = sqrt(2 / (Q (1-u^2)(1-v^2) + (1+u^2)(1+v^2) - 4uv))

and the individual entries have closed forms in terms of terminating
Gauss hypergeometric sums with argument ``2 / (1 - Q)``.  That argument is
singular at ``Q = 1``, and the sums alternate in sign, so floating-point
evaluation loses all accuracy at moderate quantum numbers.  Here each sum is
regrouped with its ``((Q-1)/(Q+1))**(k+l)`` prefactor into a polynomial
with non-negative powers of ``Q - 1`` and evaluated exactly in integer
arithmetic (a double ``Q`` is an exact binary rational); only the final
ratio is rounded.
"""
from __future__ import annotations

import csv
import json
import math
from math import comb, factorial
from dataclasses import dataclass

import numpy as np

from .cpo import CpoTrajectory, OscillatorVariant
from .errors import PreconditionError, RadicandError, TableOverflowError, UndefinedQError, UndefinedSpectrumError
from .schedule import FrequencySchedule, check_time

__all__ = [
    "QParameter",
    "TransitionTable",
    "generating_function",
    "mean_quantum_number",
    "hyp2f1_terminating",
    "transition_probability",
    "probability_table",
    "undefined_table",
    "chi_pm",
    "MAX_TABLE_INDEX",
]

# Largest quantum number a table may hold.  Entries are exact up to the final
# rounding at any size; the cap only bounds the cost of big-integer arithmetic.
MAX_TABLE_INDEX = 400

# Q below 1 by at most this much is treated as roundoff and snapped to 1.
_Q_ROUNDOFF = 1e-9


@dataclass(frozen=True)
class QParameter:
    q: float
    defined: bool = True

    def __post_init__(self):
        if not self.defined:
            return
        q = float(self.q)
        if not np.isfinite(q) or q < 1.0 - _Q_ROUNDOFF:
            raise UndefinedQError(f"Q must be a finite number >= 1, got {self.q!r}")
        object.__setattr__(self, "q", max(q, 1.0))

    @classmethod
    def coerce(cls, q) -> "QParameter":
        if isinstance(q, QParameter):
            return q
        if q is None or (isinstance(q, float) and math.isnan(q)):
            return cls(float("nan"), defined=False)
        return cls(float(q))

    def require(self) -> float:
        if not self.defined:
            raise UndefinedQError("Q is undefined (no discrete spectrum)")
        return self.q


def generating_function(q, u: float, v: float) -> float:
    """``sum_{n,m} u**n v**m P[m, n]`` in closed form.

    ``|u|, |v| <= 1`` is required; the boundary is admitted so the
    normalisation limit ``v = 1`` can be taken directly.
    """
    Q = QParameter.coerce(q).require()
    if abs(u) > 1 or abs(v) > 1:
        raise ValueError("need |u| <= 1 and |v| <= 1")
    radicand = Q * (1 - u * u) * (1 - v * v) + (1 + u * u) * (1 + v * v) - 4 * u * v
    if not radicand > 0:
        raise RadicandError(f"radicand {radicand!r} is not positive for Q={Q}, u={u}, v={v}")
    return math.sqrt(2.0 / radicand)


def mean_quantum_number(q, n: int) -> float:
    """Mean final quantum number from initial level ``n``: ``Q (n + 1/2) - 1/2``."""
    return QParameter.coerce(q).require() * (n + 0.5) - 0.5


class _ExactQ:
    """``Q = p/d`` as integers, with cached powers of ``p - d`` and ``p + d``.

    ``d`` is a power of two for any binary float, so multiplying by ``d**s``
    is a shift by ``s * shift`` bits.
    """

    def __init__(self, Q: float):
        p, d = Q.as_integer_ratio()
        self.shift = d.bit_length() - 1
        self._bases = {"y": p - d, "s": p + d}
        self._powers = {key: [1] for key in self._bases}

    def power(self, key: str, n: int) -> int:
        table = self._powers[key]
        base = self._bases[key]
        while len(table) <= n:
            table.append(table[-1] * base)
        return table[n]


def _regrouped_ratio(k: int, l: int, odd: int, Q: float | _ExactQ) -> tuple[int, int]:
    """Exact ``((Q-1)/(Q+1))**(k+l) 2F1(-k,-l;c;2/(1-Q))**2`` as an integer ratio.

    ``c = 1/2`` for ``odd = 0`` and ``c = 3/2`` for ``odd = 1``.  With
    ``Q = p/d`` exactly (binary floats are rationals),

        (Q-1)**k 2F1 = sum_s b_s (p-d)**(k-s) d**s / (d**k (2k+odd)!)

    for ``k <= l``, where the integers ``b_s`` absorb the Pochhammer symbols
    and ``(2k+odd)!``.  The sum is accumulated by Horner's rule in ``p - d``
    and the powers of ``d`` cancel against ``(Q+1)**(k+l)``, so the
    alternating series is formed without any rounding.
    """
    exact = Q if isinstance(Q, _ExactQ) else _ExactQ(Q)
    if k > l:
        k, l = l, k
    py = exact.power("y", 1)
    top = factorial(2 * k + odd)
    b = top // factorial(odd)  # s = 0 term
    acc = b
    for s in range(k):
        # b_{s+1} / b_s = -8 (k-s)(l-s) / ((2s+odd+1)(2s+odd+2))
        b = b * (-8 * (k - s) * (l - s)) // ((2 * s + odd + 1) * (2 * s + odd + 2))
        acc = acc * py + (b << (exact.shift * (s + 1)))
    num = acc * acc * exact.power("y", l - k)
    den = top * top * exact.power("s", k + l)
    return num, den


def hyp2f1_terminating(k: int, l: int, c: float, q) -> float:
    """``((Q-1)/(Q+1))**(k+l) * 2F1(-k, -l; c; 2/(1-Q))**2``, exact up to one final rounding.

    ``c`` must be 1/2 or 3/2 (even and odd parity classes).  The raw
    argument ``2/(1-Q)`` is never formed, so ``Q = 1`` is a regular point.
    """
    Q = QParameter.coerce(q).require()
    if c not in (0.5, 1.5):
        raise ValueError("c must be 1/2 or 3/2")
    if k < 0 or l < 0:
        raise ValueError("k and l must be non-negative")
    num, den = _regrouped_ratio(int(k), int(l), int(c == 1.5), Q)
    return num / den


def _probability(m: int, n: int, Q: float, exact: _ExactQ | None = None) -> float:
    if (m + n) % 2:
        return 0.0
    k, l, odd = m // 2, n // 2, m % 2
    num, den = _regrouped_ratio(k, l, odd, exact or _ExactQ(Q))
    # (2k-1)!!/(2k)!! = C(2k, k) / 4**k, with (-1)!! = 0!! = 1
    num *= comb(2 * k, k) * comb(2 * l, l)
    den *= 4 ** (k + l)
    if odd:
        num *= (2 * k + 1) * (2 * l + 1)
    g = 2.0 / (Q + 1.0)
    root = math.sqrt(g)
    return (num / den) * (g * root if odd else root)


def transition_probability(m: int, n: int, q) -> float:
    """Probability of ending in level ``m`` having started in level ``n``."""
    Q = QParameter.coerce(q).require()
    if m < 0 or n < 0:
        raise ValueError("quantum numbers must be non-negative")
    if max(m, n) > MAX_TABLE_INDEX:
        raise TableOverflowError(f"quantum numbers above {MAX_TABLE_INDEX} are not supported")
    return _probability(m, n, Q)


@dataclass(frozen=True, eq=False)
class TransitionTable:
    """``probs[m, n]`` for ``0 <= m, n <= n_max`` at one value of ``Q``.

    ``mean_m[n]`` is the truncated first moment ``sum_m m probs[m, n]``.
    """

    q: QParameter
    n_max: int
    probs: np.ndarray
    mean_m: np.ndarray

    @property
    def column_sums(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["m"] + [str(n) for n in range(self.n_max + 1)])
            for m in range(self.n_max + 1):
                writer.writerow([str(m)] + [repr(float(p)) for p in self.probs[m]])

    def to_dict(self) -> dict:
        probs = [[None if np.isnan(p) else float(p) for p in row] for row in self.probs]
        return {
            "q": self.q.q if self.q.defined else None,
            "n_max": self.n_max,
            "probs": probs,
            "defined": self.q.defined,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def probability_table(q, n_max: int) -> TransitionTable:
    """All transition probabilities up to level ``n_max``.

    Mixed-parity entries are exactly zero and the table is exactly symmetric.
    """
    Q = QParameter.coerce(q)
    value = Q.require()
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if n_max > MAX_TABLE_INDEX:
        raise TableOverflowError(f"n_max={n_max} exceeds the supported maximum {MAX_TABLE_INDEX}")
    size = n_max + 1
    probs = np.zeros((size, size))
    exact = _ExactQ(value)
    for m in range(size):
        for n in range(m, size, 2):
            probs[m, n] = probs[n, m] = _probability(m, n, value, exact)
    mean_m = np.arange(size) @ probs
    return TransitionTable(Q, n_max, probs, mean_m)


def undefined_table(n_max: int) -> TransitionTable:
    """Placeholder table for times where the spectrum is continuous."""
    nan = np.full((n_max + 1, n_max + 1), np.nan)
    return TransitionTable(QParameter(float("nan"), defined=False), n_max, nan, np.full(n_max + 1, np.nan))


def chi_pm(traj: CpoTrajectory, s: FrequencySchedule, t) -> tuple[complex, complex]:
    """``chi_+`` and ``chi_-`` built from a TT trajectory.

    ``chi_pm = Omega0 (Omega mu - i mu_dot) +- i (Omega nu - i nu_dot)``;
    their moduli satisfy ``|chi_pm|**2 = 2 Omega Omega0 (Q -+ W)`` with the
    Wronskian ``W = 1``.
    """
    if traj.variant is not OscillatorVariant.TT:
        raise PreconditionError("chi_pm needs a TT trajectory")
    check_time(s, t)
    big0_sq, big_sq = float(s.big_omega_sq(s.t0)), float(s.big_omega_sq(t))
    if big0_sq <= 0 or big_sq <= 0:
        raise UndefinedSpectrumError("Omega^2 <= 0 at t0 or t")
    big0, big = math.sqrt(big0_sq), math.sqrt(big_sq)
    mu, mu_dot, nu, nu_dot = traj.state(t)
    a = big0 * (big * mu - 1j * mu_dot)
    b = 1j * (big * nu - 1j * nu_dot)
    return a + b, a - b
