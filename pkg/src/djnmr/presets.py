"""Shipped spin systems and the named figure presets.

Two systems are built in:

* three_spin: one work spin and two data spins, shifts -20000/0/+15000 Hz,
  couplings AB 6000, AC 2000, BC 500 Hz, work spin A.  All twelve lines are
  multiples of 250 Hz, so Gaussian pulse durations that are multiples of
  8 ms leave every line's free-evolution phase at a multiple of 2 pi, which
  keeps phased displays clean without per-line phase corrections.
* five_spin: two proton shifts (9770, 9647 Hz) and three fluorine shifts
  (-2961, -7815, -13082 Hz), work spin D.  The couplings are synthetic:
  they are chosen so that every spin's 16 lines stay pairwise separated by
  at least 140 Hz (about 9 linewidths) and no work-multiplet spacing
  collides with a two-photon resonance of the drive.  They are not measured
  molecular constants.

Preset registry: fig2/fig3/fig4 are the 3-spin thermal / pseudopure / POPS
experiments over all eight functions with ideal pulses and phased display;
fig5/fig6 are the 5-spin thermal / POPS experiments over both constants and
the four bit projections with ideal pulses in absolute-value display;
fig7sim/fig8sim repeat fig5/fig6 with shaped Gaussian pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detect import DEFAULT_POINTS, DEFAULT_T2, acquire_fid, apply, spectrum
from .dj import BooleanFunction, ExperimentPlan, select_demo_functions
from .pulses import HardPulse, hard_pulse_propagator
from .states import thermal_state
from .systems import SpinSystem

__all__ = [
    "three_spin_system",
    "five_spin_system",
    "named_system",
    "three_spin_functions",
    "absorptive_phase",
    "PresetSpec",
    "PRESETS",
    "expand_preset",
    "THREE_SPIN_GAUSSIAN_DURATION",
    "FIVE_SPIN_FUNCTION_DURATION",
    "FIVE_SPIN_PREP_DURATION",
]

# Gaussian pulse lengths, in seconds.  24 ms on the 3-spin system keeps the
# multiple-of-8-ms phase property while pushing inter-harmonic phase pulls
# below the 5% sign tolerance; the 5-spin system needs 40 ms for a resolved
# 36 Hz line spacing and 80 ms for the single-line POPS inversion, whose
# residual error enters every subtraction experiment directly.
THREE_SPIN_GAUSSIAN_DURATION = 0.024
FIVE_SPIN_FUNCTION_DURATION = 0.040
FIVE_SPIN_PREP_DURATION = 0.080


def three_spin_system() -> SpinSystem:
    return SpinSystem(
        shifts=[-20000.0, 0.0, 15000.0],
        couplings=[6000.0, 2000.0, 500.0],
        labels=("A", "B", "C"),
        work_spin=0,
    )


def five_spin_system() -> SpinSystem:
    # Couplings are synthetic (see module docstring); shifts are the
    # literature values for the two-proton/three-fluorine ring system.
    return SpinSystem(
        shifts=[9770.0, 9647.0, -2961.0, -7815.0, -13082.0],
        couplings=[
            762.0, 311.0, 146.0, 1515.0,   # AB AC AD AE
            1215.0, 302.0, 611.0,          # BC BD BE
            611.0, 153.0,                  # CD CE
            1215.0,                        # DE
        ],
        labels=("A", "B", "C", "D", "E"),
        work_spin=3,
    )


def named_system(name: str) -> SpinSystem:
    if name == "three_spin":
        return three_spin_system()
    if name == "five_spin":
        return five_spin_system()
    raise ValueError(f"unknown system name {name!r} (use three_spin or five_spin)")


def three_spin_functions() -> list[BooleanFunction]:
    """The canonical eight: both constants, then the six balanced tables."""
    out = [BooleanFunction("0000"), BooleanFunction("1111")]
    out.extend(BooleanFunction(t) for t in
               ("0011", "0101", "0110", "1001", "1010", "1100"))
    return out


def absorptive_phase(sys: SpinSystem, points: int = DEFAULT_POINTS,
                     dwell: float | None = None, t2: float = DEFAULT_T2) -> float:
    """Zero-order phase making the no-op thermal spectrum absorptive-positive.

    Computed once per preset from the tallest line of the reference run and
    reused for every function in that preset.
    """
    rho = thermal_state(sys)
    rho = apply(hard_pulse_propagator(sys, HardPulse(math.pi / 2.0, 0.0)), rho)
    fid = acquire_fid(rho, sys, points=points, dwell=dwell, t2=t2)
    spec = spectrum(fid, mode="absolute")
    i = int(np.abs(spec.values).argmax())
    return float(-np.angle(spec.values[i]))


@dataclass(frozen=True)
class PresetSpec:
    """A named batch of experiment plans sharing system, init, and display."""

    name: str
    description: str
    system_name: str
    init: str
    labels: tuple[str, ...]
    pulse: str
    mode: str

    def functions(self) -> list[BooleanFunction]:
        if self.system_name == "three_spin":
            return three_spin_functions()
        return select_demo_functions(4)

    def expand(self) -> list[ExperimentPlan]:
        sys = named_system(self.system_name)
        phase = absorptive_phase(sys) if self.mode == "phased" else 0.0
        if self.system_name == "three_spin":
            duration = THREE_SPIN_GAUSSIAN_DURATION
            prep = THREE_SPIN_GAUSSIAN_DURATION
        else:
            duration = FIVE_SPIN_FUNCTION_DURATION
            prep = FIVE_SPIN_PREP_DURATION
        return [
            ExperimentPlan(
                system=sys,
                function=f,
                init=self.init,
                labels=self.labels,
                pulse=self.pulse,
                duration=duration,
                prep_duration=prep,
                mode=self.mode,
                zero_order_phase=phase,
                name=f"f{f.table}",
            )
            for f in self.functions()
        ]


PRESETS: dict[str, PresetSpec] = {
    "fig2": PresetSpec(
        name="fig2",
        description="3-spin thermal start, all eight functions, ideal pulses, phased",
        system_name="three_spin", init="thermal", labels=(),
        pulse="ideal", mode="phased"),
    "fig3": PresetSpec(
        name="fig3",
        description="3-spin pseudopure |000> start, all eight functions, ideal pulses, phased",
        system_name="three_spin", init="pseudopure", labels=("000",),
        pulse="ideal", mode="phased"),
    "fig4": PresetSpec(
        name="fig4",
        description="3-spin POPS |000>-|100>, all eight functions, ideal pulses, phased",
        system_name="three_spin", init="pops", labels=("000", "100"),
        pulse="ideal", mode="phased"),
    "fig5": PresetSpec(
        name="fig5",
        description="5-spin thermal start, constants plus bit projections, ideal pulses",
        system_name="five_spin", init="thermal", labels=(),
        pulse="ideal", mode="absolute"),
    "fig6": PresetSpec(
        name="fig6",
        description="5-spin POPS |00000>-|00010>, constants plus bit projections, ideal pulses",
        system_name="five_spin", init="pops", labels=("00000", "00010"),
        pulse="ideal", mode="absolute"),
    "fig7sim": PresetSpec(
        name="fig7sim",
        description="5-spin thermal start with shaped Gaussian pulses",
        system_name="five_spin", init="thermal", labels=(),
        pulse="gaussian", mode="absolute"),
    "fig8sim": PresetSpec(
        name="fig8sim",
        description="5-spin POPS with shaped Gaussian pulses (FID subtraction)",
        system_name="five_spin", init="pops", labels=("00000", "00010"),
        pulse="gaussian", mode="absolute"),
}


def expand_preset(name: str) -> tuple[PresetSpec, list[ExperimentPlan]]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    spec = PRESETS[name]
    return spec, spec.expand()
