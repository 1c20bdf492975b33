"""Pulse-level simulator of liquid-state NMR Deutsch-Jozsa experiments.

The package builds weakly-coupled spin systems, prepares thermal, pseudopure,
and POPS (two-projector difference) starting states, applies ideal or shaped
multi-frequency Gaussian pulses, and detects spectra the way a spectrometer
would: quadrature FID, exponential decay, Fourier transform.
"""

from .config import ConfigError, RunConfig, parse_config
from .detect import (
    FID,
    Peak,
    Spectrum,
    acquire_fid,
    apply,
    default_dwell,
    extract_peaks,
    line_amplitudes,
    spectrum,
)
from .dj import (
    BooleanFunction,
    Classification,
    ClassifyThresholds,
    ExperimentPlan,
    classify,
    classify_from_spectrum,
    count_functions,
    run_pops_experiment,
    run_sequence_2,
    run_sequence_3,
    select_demo_functions,
    spin_scores,
)
from .presets import (
    PRESETS,
    PresetSpec,
    expand_preset,
    five_spin_system,
    named_system,
    three_spin_system,
)
from .pulses import (
    HardPulse,
    Propagator,
    ShapedPulse,
    calibrate_amplitude,
    envelope_samples,
    fidelity,
    function_to_harmonics,
    gaussian_pulse,
    hard_pulse_propagator,
    ideal_multitransition_pi,
    schedule_rows,
    shaped_pulse_propagator,
)
from .states import (
    DensityState,
    count_accessible_pops,
    pops_state,
    pseudopure_state,
    thermal_state,
)
from .systems import (
    SpinSystem,
    Transition,
    all_transitions,
    build_hamiltonian,
    collective_operator,
    minimum_line_gap,
    single_spin_operator,
    transition_table,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # systems
    "SpinSystem", "Transition", "all_transitions", "build_hamiltonian",
    "collective_operator", "minimum_line_gap", "single_spin_operator",
    "transition_table",
    # states
    "DensityState", "count_accessible_pops", "pops_state",
    "pseudopure_state", "thermal_state",
    # pulses
    "HardPulse", "Propagator", "ShapedPulse", "calibrate_amplitude",
    "envelope_samples", "fidelity", "function_to_harmonics", "gaussian_pulse",
    "hard_pulse_propagator", "ideal_multitransition_pi", "schedule_rows",
    "shaped_pulse_propagator",
    # detection
    "FID", "Peak", "Spectrum", "acquire_fid", "apply", "default_dwell",
    "extract_peaks", "line_amplitudes", "spectrum",
    # experiment
    "BooleanFunction", "Classification", "ClassifyThresholds",
    "ExperimentPlan", "classify", "classify_from_spectrum", "count_functions",
    "run_pops_experiment", "run_sequence_2", "run_sequence_3",
    "select_demo_functions", "spin_scores",
    # presets and config
    "PRESETS", "PresetSpec", "expand_preset", "five_spin_system",
    "named_system", "three_spin_system", "ConfigError", "RunConfig",
    "parse_config",
]
