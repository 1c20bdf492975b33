"""Boolean functions, experiment orchestration, and spectrum classification.

The experiment encodes a function f over the data spins into a
multi-frequency pi pulse on the work-spin multiplet: transition x is driven
iff f(x) = 1.  Two sequences are provided:

  sequence 2:  initial state - hard pi/2 - function pulse - FID
  sequence 3:  single-line inversion - hard pi/2 - function pulse - FID

A POPS experiment subtracts the sequence-3 FID from the sequence-2 FID run
on the thermal state, which by linearity equals the sequence-2 run of the
two-projector difference state directly (up to one scalar).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .detect import (
    DEFAULT_POINTS,
    DEFAULT_T2,
    FID,
    Spectrum,
    acquire_fid,
    apply,
    extract_peaks,
    spectrum,
)
from .pulses import (
    HardPulse,
    Propagator,
    function_to_harmonics,
    gaussian_pulse,
    hard_pulse_propagator,
    ideal_multitransition_pi,
    shaped_pulse_propagator,
    DEFAULT_SAMPLES_PER_CYCLE,
)
from .states import DensityState, pops_state, pseudopure_state, thermal_state
from .systems import SpinSystem, Transition, transition_table

__all__ = [
    "Classification",
    "BooleanFunction",
    "classify",
    "count_functions",
    "ExperimentPlan",
    "run_sequence_2",
    "run_sequence_3",
    "run_pops_experiment",
    "ClassifyThresholds",
    "classify_from_spectrum",
    "select_demo_functions",
    "spin_scores",
]


class Classification(enum.Enum):
    CONSTANT = "constant"
    BALANCED = "balanced"
    NEITHER = "neither"
    # Spectrum-based readout only: the measurement fell between thresholds.
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class BooleanFunction:
    """Truth table over k data qubits, input 00..0 first."""

    table: str

    def __post_init__(self):
        n = len(self.table)
        if n == 0 or (n & (n - 1)) != 0 or any(c not in "01" for c in self.table):
            raise ValueError(f"table must be a 0/1 string of power-of-two length, "
                             f"got {self.table!r}")

    @property
    def arity(self) -> int:
        return len(self.table).bit_length() - 1

    def value(self, x: int) -> int:
        return int(self.table[x])


def classify(f: BooleanFunction) -> Classification:
    ones = f.table.count("1")
    if ones == 0 or ones == len(f.table):
        return Classification.CONSTANT
    if 2 * ones == len(f.table):
        return Classification.BALANCED
    return Classification.NEITHER


def count_functions(k: int) -> tuple[int, int]:
    """(constant count, balanced count) over k data qubits."""
    if k < 1:
        raise ValueError("data qubit count must be at least 1")
    return 2, math.comb(1 << k, 1 << (k - 1))


def select_demo_functions(k: int = 4) -> list[BooleanFunction]:
    """Both constants plus the k bit projections f(x) = x_i.

    Each projection is balanced and erases exactly one data spin's full peak
    group in a thermal-state run; the erased spin is the one whose bit the
    projection reads.
    """
    if k < 1:
        raise ValueError("data qubit count must be at least 1")
    out = [BooleanFunction("0" * (1 << k)), BooleanFunction("1" * (1 << k))]
    for i in range(k):
        bits = "".join(str((x >> (k - 1 - i)) & 1) for x in range(1 << k))
        out.append(BooleanFunction(bits))
    return out


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything needed to run one spectrum: system, state, function, pulse.

    labels: one basis label for pseudopure, two for pops (must differ only in
    the work-spin bit so the pair is preparable by one line inversion).
    duration/prep_duration: Gaussian pulse lengths in seconds (prep covers the
    sequence-3 inversion pulse and defaults to the function-pulse duration).
    """

    system: SpinSystem
    function: BooleanFunction
    init: str = "thermal"
    labels: tuple[str, ...] = ()
    pulse: str = "ideal"
    duration: float = 0.040
    prep_duration: float | None = None
    per_cycle: int = DEFAULT_SAMPLES_PER_CYCLE
    truncation: float = 0.01
    points: int = DEFAULT_POINTS
    dwell: float | None = None
    t2: float = DEFAULT_T2
    mode: str = "absolute"
    zero_order_phase: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.init not in ("thermal", "pseudopure", "pops"):
            raise ValueError(f"unknown init kind {self.init!r}")
        if self.pulse not in ("ideal", "gaussian"):
            raise ValueError(f"unknown pulse model {self.pulse!r}")
        if self.mode not in ("phased", "absolute"):
            raise ValueError(f"unknown display mode {self.mode!r}")
        if self.function.arity != self.system.n - 1:
            raise ValueError(
                f"function arity {self.function.arity} does not match "
                f"{self.system.n - 1} data spins")
        if self.init == "pseudopure":
            if len(self.labels) != 1:
                raise ValueError("pseudopure init needs exactly one label")
            self._check_label(self.labels[0])
        elif self.init == "pops":
            if len(self.labels) != 2:
                raise ValueError("pops init needs exactly two labels")
            a, b = self.labels
            self._check_label(a)
            self._check_label(b)
            diff = [k for k in range(self.system.n) if a[k] != b[k]]
            if diff != [self.system.work_spin]:
                raise ValueError(
                    f"pops labels {a},{b} must differ only in the work-spin bit "
                    f"(spin {self.system.labels[self.system.work_spin]})")
        elif self.labels:
            raise ValueError("thermal init takes no labels")
        if not self.name:
            object.__setattr__(self, "name", f"{self.init}_f{self.function.table}")

    def _check_label(self, label: str):
        if len(label) != self.system.n or any(c not in "01" for c in label):
            raise ValueError(f"label {label!r} must be {self.system.n} bits of 0/1")


def _initial_state(plan: ExperimentPlan) -> DensityState:
    if plan.init == "thermal":
        return thermal_state(plan.system)
    if plan.init == "pseudopure":
        return pseudopure_state(plan.system, plan.labels[0])
    return pops_state(plan.system, plan.labels[0], plan.labels[1])


def _function_propagator(plan: ExperimentPlan) -> Propagator:
    sys = plan.system
    table = transition_table(sys, sys.work_spin)
    if plan.pulse == "ideal":
        chosen = [t for t in table if plan.function.value(int(t.data_pattern, 2))]
        return ideal_multitransition_pi(sys, chosen, phase=0.0)
    harmonics = function_to_harmonics(plan.function, table)
    pulse = gaussian_pulse(sys, harmonics, plan.duration,
                           per_cycle=plan.per_cycle, truncation=plan.truncation)
    return shaped_pulse_propagator(sys, pulse)


def _prep_transition(plan: ExperimentPlan) -> Transition:
    sys = plan.system
    a = plan.labels[0]
    pattern = "".join(a[k] for k in range(sys.n) if k != sys.work_spin)
    for t in transition_table(sys, sys.work_spin):
        if t.data_pattern == pattern:
            return t
    raise ValueError(f"no work-spin transition with spectator pattern {pattern}")


def _prep_propagator(plan: ExperimentPlan) -> Propagator:
    sys = plan.system
    t = _prep_transition(plan)
    if plan.pulse == "ideal":
        return ideal_multitransition_pi(sys, [t], phase=0.0)
    dur = plan.prep_duration if plan.prep_duration is not None else plan.duration
    pulse = gaussian_pulse(sys, [(t.freq, 1.0, 0.0)], dur,
                           per_cycle=plan.per_cycle, truncation=plan.truncation)
    return shaped_pulse_propagator(sys, pulse)


def run_sequence_2(plan: ExperimentPlan,
                   initial: DensityState | None = None) -> FID:
    """initial state - hard pi/2 - function pulse - FID (no readout pulse).

    `initial` overrides the plan's initial state; the direct-POPS path uses
    it to push the projector-difference state through the same pipeline.
    """
    sys = plan.system
    rho = initial if initial is not None else _initial_state(plan)
    u90 = hard_pulse_propagator(sys, HardPulse(math.pi / 2.0, 0.0))
    rho = apply(u90, rho)
    rho = apply(_function_propagator(plan), rho)
    return acquire_fid(rho, sys, points=plan.points, dwell=plan.dwell, t2=plan.t2)


def run_sequence_3(plan: ExperimentPlan) -> FID:
    """Single-line inversion on thermal, then the sequence-2 pipeline.

    For a non-POPS plan there is no inversion target and the sequence
    degenerates to sequence 2 exactly.
    """
    sys = plan.system
    if plan.init != "pops":
        return run_sequence_2(plan)
    rho = thermal_state(sys)
    rho = apply(_prep_propagator(plan), rho)
    u90 = hard_pulse_propagator(sys, HardPulse(math.pi / 2.0, 0.0))
    rho = apply(u90, rho)
    rho = apply(_function_propagator(plan), rho)
    return acquire_fid(rho, sys, points=plan.points, dwell=plan.dwell, t2=plan.t2)


def run_pops_experiment(plan: ExperimentPlan, path: str = "subtract") -> Spectrum:
    """POPS spectrum by FID subtraction (default) or the direct state path."""
    if plan.init != "pops":
        raise ValueError("run_pops_experiment requires a pops plan")
    if path == "direct":
        fid = run_sequence_2(plan, initial=_initial_state(plan))
        return spectrum(fid, mode=plan.mode, zero_order_phase=plan.zero_order_phase)
    if path != "subtract":
        raise ValueError(f"unknown path {path!r}")
    thermal_plan = replace(plan, init="thermal", labels=(), name=plan.name + "_seq2")
    fid2 = run_sequence_2(thermal_plan)
    fid3 = run_sequence_3(plan)
    if fid2.dwell != fid3.dwell or fid2.points != fid3.points:
        raise ValueError("sequence FIDs have mismatched acquisition grids")
    diff = FID(samples=fid2.samples - fid3.samples, dwell=fid2.dwell,
               points=fid2.points, t2=fid2.t2)
    return spectrum(diff, mode=plan.mode, zero_order_phase=plan.zero_order_phase)


@dataclass(frozen=True)
class ClassifyThresholds:
    """Decision levels for spectrum classification.

    extract: local-maximum floor as a fraction of the global maximum.
    absent_below / present_above: per-spin score bounds (scores are medians
    of assigned line heights, normalized to the strongest spin).  Scores in
    between are ambiguous and force an indeterminate verdict.
    """

    extract: float = 0.02
    absent_below: float = 0.35
    present_above: float = 0.65


def _line_heights(spec: Spectrum, tables: list[list[Transition]],
                  extract_threshold: float):
    """Assigned peak height (and signed display value) per predicted line."""
    heights = {(t.spin, t.data_pattern): 0.0 for table in tables for t in table}
    signed = dict(heights)
    for pk in extract_peaks(spec, extract_threshold, tables):
        if pk.assigned_spin is None:
            continue
        key = (pk.assigned_spin, pk.data_pattern)
        if abs(pk.amplitude) > abs(signed[key]):
            signed[key] = pk.amplitude
        heights[key] = max(heights[key], abs(pk.amplitude))
    return heights, signed


def spin_scores(spec: Spectrum, tables: list[list[Transition]],
                extract_threshold: float = 0.02) -> dict[int, float]:
    """Median assigned line height per spin, normalized to the top spin.

    The median is deliberate: a suppressed spin whose positions lie next to
    surviving neighbors picks up a few tail-height assignments, but never a
    majority of them.
    """
    heights, _ = _line_heights(spec, tables, extract_threshold)
    med = {}
    for table in tables:
        spin = table[0].spin
        med[spin] = float(np.median([heights[(spin, t.data_pattern)] for t in table]))
    top = max(med.values())
    if top <= 0.0:
        return {spin: 0.0 for spin in med}
    return {spin: v / top for spin, v in med.items()}


def classify_from_spectrum(spec: Spectrum, init: str, reference: Spectrum,
                           tables: list[list[Transition]], work_spin: int,
                           thresholds: ClassifyThresholds = ClassifyThresholds(),
                           ) -> Classification:
    """Mechanical constant/balanced readout from one spectrum.

    thermal: constant iff every data spin present in the reference is still
    fully present; a fully erased data spin, or a strict subset of its lines
    missing, means balanced.
    pops: constant iff no data spin scores above the absent bound; any data
    spin clearly present means balanced.
    pseudopure: phased mode only; work-line signs against the reference are
    uniform for constants and mixed for balanced functions.
    Ambiguous measurements return INDETERMINATE rather than guessing.
    """
    if len(spec.freqs) != len(reference.freqs) or not np.array_equal(
            spec.freqs, reference.freqs):
        raise ValueError("spectrum and reference must share the frequency axis")
    th = thresholds
    data_spins = [table[0].spin for table in tables if table[0].spin != work_spin]
    scores = spin_scores(spec, tables, th.extract)
    ref_scores = spin_scores(reference, tables, th.extract)

    if init == "thermal":
        heights, _ = _line_heights(spec, tables, th.extract)
        ref_heights, _ = _line_heights(reference, tables, th.extract)
        erased = ambiguous = subset_missing = False
        for table in tables:
            spin = table[0].spin
            if spin == work_spin or ref_scores[spin] < th.present_above:
                continue
            if scores[spin] < th.absent_below:
                erased = True
            elif scores[spin] < th.present_above:
                ambiguous = True
            else:
                for t in table:
                    hr = ref_heights[(spin, t.data_pattern)]
                    if hr > 0.0 and heights[(spin, t.data_pattern)] < th.absent_below * hr:
                        subset_missing = True
        if erased or subset_missing:
            return Classification.BALANCED
        if ambiguous:
            return Classification.INDETERMINATE
        return Classification.CONSTANT

    if init == "pops":
        if all(scores[s] < th.absent_below for s in data_spins):
            return Classification.CONSTANT
        if any(scores[s] > th.present_above for s in data_spins):
            return Classification.BALANCED
        return Classification.INDETERMINATE

    if init == "pseudopure":
        if spec.mode != "phased" or reference.mode != "phased":
            raise ValueError("pseudopure classification is defined in phased mode only")
        _, signed = _line_heights(spec, tables, th.extract)
        _, ref_signed = _line_heights(reference, tables, th.extract)
        work_table = [table for table in tables if table[0].spin == work_spin][0]
        floor = th.extract * max(abs(v) for v in ref_signed.values())
        flips = []
        for t in work_table:
            a = signed[(work_spin, t.data_pattern)]
            r = ref_signed[(work_spin, t.data_pattern)]
            if abs(a) <= floor or abs(r) <= floor:
                return Classification.INDETERMINATE
            flips.append((a < 0) != (r < 0))
        if all(flips) or not any(flips):
            return Classification.CONSTANT
        return Classification.BALANCED

    raise ValueError(f"unknown init kind {init!r}")
