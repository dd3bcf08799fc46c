"""Transitionless quantum parametric oscillator.

Classical solutions, adiabaticity parameters and exact transition
probabilities for a harmonic oscillator whose frequency ``omega(t)`` is
driven along a schedule, with and without the counterdiabatic term.
"""
from .adiabaticity import (
    AdiabaticityCurve,
    EnergyPair,
    adiabaticity_curve,
    energies,
    ermakov_lewis_invariant,
    q_energy_form,
    q_husimi,
    q_tt_general,
    q_tt_rho_form,
    q_tt_simple,
    wronskian_energy_forms,
)
from .closed_form import (
    PhaseAmplitude,
    closed_form_state,
    ermakov_residual,
    mu_closed,
    nu_closed,
    phase,
    phase_amplitude,
    phase_amplitude_reconstruct,
    rho_closed,
)
from .cpo import CpoTrajectory, OscillatorVariant, integrate, wronskian
from .errors import TTQPOError
from .oracle import OracleResult, PositionGrid, eigenfunction, oracle_probabilities, propagator_kernel
from .schedule import (
    EffectiveFrequencies,
    FrequencySchedule,
    ScheduleKind,
    effective_frequencies,
    make_constant_schedule,
    make_cubic_schedule,
    make_tabulated_schedule,
    spectrum_validity_intervals,
)
from .transition import (
    QParameter,
    TransitionTable,
    chi_pm,
    generating_function,
    hyp2f1_terminating,
    mean_quantum_number,
    probability_table,
    transition_probability,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticityCurve",
    "CpoTrajectory",
    "EffectiveFrequencies",
    "EnergyPair",
    "FrequencySchedule",
    "OracleResult",
    "OscillatorVariant",
    "PhaseAmplitude",
    "PositionGrid",
    "QParameter",
    "ScheduleKind",
    "TTQPOError",
    "TransitionTable",
    "adiabaticity_curve",
    "chi_pm",
    "closed_form_state",
    "effective_frequencies",
    "eigenfunction",
    "energies",
    "ermakov_lewis_invariant",
    "ermakov_residual",
    "generating_function",
    "hyp2f1_terminating",
    "integrate",
    "make_constant_schedule",
    "make_cubic_schedule",
    "make_tabulated_schedule",
    "mean_quantum_number",
    "mu_closed",
    "nu_closed",
    "oracle_probabilities",
    "phase",
    "phase_amplitude",
    "phase_amplitude_reconstruct",
    "probability_table",
    "propagator_kernel",
    "q_energy_form",
    "q_husimi",
    "q_tt_general",
    "q_tt_rho_form",
    "q_tt_simple",
    "rho_closed",
    "spectrum_validity_intervals",
    "transition_probability",
    "wronskian",
    "wronskian_energy_forms",
]
