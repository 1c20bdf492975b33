"""Run configuration: YAML schema, validation, and defaults.

Schema (version 1), all lengths in the units the field names carry:

    schema_version: 1
    system: three_spin | five_spin | mapping with
        labels: [A, B, C]
        shifts_hz: [-20000, 0, 15000]
        couplings_hz: upper-triangular list [AB, AC, BC] or full symmetric matrix
        work_spin: 0
    init: thermal | pseudopure:<bits> | pops:<bits>,<bits>
    function: "0110"          # exactly one of function / preset
    preset: fig2
    pulse: ideal | gaussian:<duration_ms> | mapping with
        model: gaussian
        duration_ms: 24
        prep_duration_ms: 24      # POPS inversion pulse; defaults to duration
        per_cycle: 80             # integration samples per fastest period
        truncation: 0.01
    acquisition:
        points: 8192
        t2_s: 0.02
    display: phased | absolute
    output_dir: out
    workers: 4
    plot: false
    deterministic: true           # always on; false is rejected

Validation failures raise ConfigError carrying the offending field path.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .detect import DEFAULT_POINTS, DEFAULT_T2
from .dj import BooleanFunction
from .presets import PRESETS, named_system
from .pulses import DEFAULT_SAMPLES_PER_CYCLE
from .systems import SpinSystem

__all__ = ["ConfigError", "RunConfig", "parse_config"]

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version", "system", "init", "function", "preset", "pulse",
    "acquisition", "display", "output_dir", "workers", "plot", "deterministic",
}


class ConfigError(ValueError):
    """Schema or invariant violation, with the field path that caused it."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class RunConfig:
    system: SpinSystem
    init: str = "thermal"
    labels: tuple[str, ...] = ()
    function: BooleanFunction | None = None
    preset: str | None = None
    pulse: str = "ideal"
    duration: float = 0.040
    prep_duration: float | None = None
    per_cycle: int = DEFAULT_SAMPLES_PER_CYCLE
    truncation: float = 0.01
    points: int = DEFAULT_POINTS
    t2: float = DEFAULT_T2
    mode: str = "absolute"
    output_dir: str = "out"
    workers: int = 4
    plot: bool = False
    deterministic: bool = True


def parse_config(document) -> RunConfig:
    """Validate a YAML text or pre-parsed mapping into a RunConfig."""
    if isinstance(document, str):
        try:
            doc = yaml.safe_load(document)
        except yaml.YAMLError as e:
            raise ConfigError("<document>", f"not valid YAML: {e}")
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be a mapping")

    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown field")

    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version",
                          f"must be {SCHEMA_VERSION}, got {version!r}")

    system = _parse_system(doc.get("system", "three_spin"))

    has_function = "function" in doc
    has_preset = "preset" in doc
    if has_function == has_preset:
        raise ConfigError("function", "exactly one of function / preset is required")

    preset = None
    function = None
    if has_preset:
        preset = doc["preset"]
        if preset not in PRESETS:
            raise ConfigError(
                "preset", f"unknown preset {preset!r}; "
                f"available: {', '.join(sorted(PRESETS))}")
    else:
        raw = doc["function"]
        if not isinstance(raw, str):
            raise ConfigError("function", "must be a bit string such as \"0110\"")
        try:
            function = BooleanFunction(raw)
        except ValueError as e:
            raise ConfigError("function", str(e))
        if function.arity != system.n - 1:
            raise ConfigError(
                "function", f"arity {function.arity} does not match the system's "
                f"{system.n - 1} data spins")

    init, labels = _parse_init(doc.get("init", "thermal"), system)
    pulse, duration, prep_duration, per_cycle, truncation = _parse_pulse(
        doc.get("pulse", "ideal"))

    acq = doc.get("acquisition", {})
    if not isinstance(acq, dict):
        raise ConfigError("acquisition", "must be a mapping")
    for key in acq:
        if key not in ("points", "t2_s"):
            raise ConfigError(f"acquisition.{key}", "unknown field")
    points = acq.get("points", DEFAULT_POINTS)
    if not isinstance(points, int) or points < 1024 or points & (points - 1):
        raise ConfigError("acquisition.points", "must be a power of two >= 1024")
    t2 = acq.get("t2_s", DEFAULT_T2)
    if not isinstance(t2, (int, float)) or t2 <= 0:
        raise ConfigError("acquisition.t2_s", "must be a positive number")

    mode = doc.get("display", "absolute")
    if mode not in ("phased", "absolute"):
        raise ConfigError("display", f"must be phased or absolute, got {mode!r}")

    workers = doc.get("workers", 4)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers", "must be a positive integer")

    deterministic = doc.get("deterministic", True)
    if deterministic is not True:
        raise ConfigError("deterministic", "stochastic runs are not provided; "
                                           "the flag must stay true")

    plot = doc.get("plot", False)
    if not isinstance(plot, bool):
        raise ConfigError("plot", "must be a boolean")

    output_dir = doc.get("output_dir", "out")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir", "must be a nonempty string")

    return RunConfig(
        system=system, init=init, labels=labels, function=function, preset=preset,
        pulse=pulse, duration=duration, prep_duration=prep_duration,
        per_cycle=per_cycle, truncation=truncation, points=points, t2=float(t2),
        mode=mode, output_dir=output_dir, workers=workers, plot=plot,
        deterministic=True)


def _parse_system(raw) -> SpinSystem:
    if isinstance(raw, str):
        try:
            return named_system(raw)
        except ValueError as e:
            raise ConfigError("system", str(e))
    if not isinstance(raw, dict):
        raise ConfigError("system", "must be a name or a mapping")
    for key in raw:
        if key not in ("labels", "shifts_hz", "couplings_hz", "work_spin"):
            raise ConfigError(f"system.{key}", "unknown field")
    for key in ("labels", "shifts_hz", "couplings_hz", "work_spin"):
        if key not in raw:
            raise ConfigError(f"system.{key}", "required field missing")
    shifts = raw["shifts_hz"]
    if not isinstance(shifts, list) or not all(
            isinstance(v, (int, float)) for v in shifts):
        raise ConfigError("system.shifts_hz", "must be a list of numbers")
    couplings = raw["couplings_hz"]
    n = len(shifts)
    if isinstance(couplings, list) and couplings and isinstance(couplings[0], list):
        # Full matrix form: check the symmetry invariant here so the
        # diagnostic names the exact cell.
        if len(couplings) != n or any(len(row) != n for row in couplings):
            raise ConfigError("system.couplings_hz", f"matrix must be {n}x{n}")
        for i in range(n):
            for j in range(n):
                if couplings[i][j] != couplings[j][i]:
                    raise ConfigError(
                        "system.couplings_hz",
                        f"must be symmetric (Delta[i,j] == Delta[j,i]); "
                        f"entry [{i}][{j}]={couplings[i][j]} != "
                        f"[{j}][{i}]={couplings[j][i]}")
    try:
        return SpinSystem(shifts=shifts, couplings=couplings,
                          labels=raw["labels"], work_spin=raw["work_spin"])
    except ValueError as e:
        raise ConfigError("system", str(e))


def _parse_init(raw, system: SpinSystem):
    if not isinstance(raw, str):
        raise ConfigError("init", "must be a string")
    if raw == "thermal":
        return "thermal", ()
    if raw.startswith("pseudopure:"):
        label = raw.split(":", 1)[1]
        _check_bits("init", label, system.n)
        return "pseudopure", (label,)
    if raw.startswith("pops:"):
        parts = raw.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ConfigError("init", "pops needs two labels: pops:<bits>,<bits>")
        for p in parts:
            _check_bits("init", p, system.n)
        return "pops", tuple(parts)
    raise ConfigError("init", f"must be thermal, pseudopure:<bits>, or "
                              f"pops:<bits>,<bits>, got {raw!r}")


def _check_bits(path: str, label: str, n: int):
    if len(label) != n or any(c not in "01" for c in label):
        raise ConfigError(path, f"label {label!r} must be {n} bits of 0/1")


def _parse_pulse(raw):
    duration = 0.040
    prep_duration = None
    per_cycle = DEFAULT_SAMPLES_PER_CYCLE
    truncation = 0.01
    if isinstance(raw, str):
        if raw == "ideal":
            return "ideal", duration, prep_duration, per_cycle, truncation
        if raw.startswith("gaussian:"):
            try:
                duration = float(raw.split(":", 1)[1]) * 1e-3
            except ValueError:
                raise ConfigError("pulse", f"bad duration in {raw!r}")
            if duration <= 0:
                raise ConfigError("pulse", "duration must be positive")
            return "gaussian", duration, prep_duration, per_cycle, truncation
        raise ConfigError("pulse", f"must be ideal or gaussian:<ms>, got {raw!r}")
    if not isinstance(raw, dict):
        raise ConfigError("pulse", "must be a string or a mapping")
    for key in raw:
        if key not in ("model", "duration_ms", "prep_duration_ms",
                       "per_cycle", "truncation"):
            raise ConfigError(f"pulse.{key}", "unknown field")
    model = raw.get("model", "ideal")
    if model not in ("ideal", "gaussian"):
        raise ConfigError("pulse.model", f"must be ideal or gaussian, got {model!r}")
    if "duration_ms" in raw:
        if not isinstance(raw["duration_ms"], (int, float)) or raw["duration_ms"] <= 0:
            raise ConfigError("pulse.duration_ms", "must be a positive number")
        duration = float(raw["duration_ms"]) * 1e-3
    if "prep_duration_ms" in raw:
        v = raw["prep_duration_ms"]
        if not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError("pulse.prep_duration_ms", "must be a positive number")
        prep_duration = float(v) * 1e-3
    if "per_cycle" in raw:
        v = raw["per_cycle"]
        if not isinstance(v, int) or v < 20:
            raise ConfigError("pulse.per_cycle",
                              "must be an integer >= 20 (time-step resolution bound)")
        per_cycle = v
    if "truncation" in raw:
        v = raw["truncation"]
        if not isinstance(v, (int, float)) or not 0 < v:
            raise ConfigError("pulse.truncation", "must be positive")
        truncation = float(v)
    return model, duration, prep_duration, per_cycle, truncation
