"""Command-line front end.

Subcommands:

    simulate        run one configured experiment (or a preset via config)
    preset          run a named preset batch
    compare         diff two spectrum CSV files
    list-functions  enumerate constant/balanced tables for k data qubits
    counts          state and function counting for an n-spin system

Outputs are deterministic: rerunning a command into the same directory
reproduces every file byte for byte.  Spectra go to CSV (header
freq_hz,real,imag,magnitude, 17 significant digits), run metadata to
manifest.json (sorted keys, no timestamps), optional plots to SVG with a
fixed hash salt.  Files are written to a temporary name and moved into
place, so readers never observe a half-written file.

Exit codes: 0 success, 1 simulation or comparison failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .detect import (
    DEFAULT_POINTS,
    DEFAULT_T2,
    Spectrum,
    default_dwell,
    extract_peaks,
    spectrum,
)
from .dj import (
    BooleanFunction,
    ClassifyThresholds,
    ExperimentPlan,
    classify,
    classify_from_spectrum,
    count_functions,
    run_pops_experiment,
    run_sequence_2,
    select_demo_functions,
)
from .presets import PRESETS, absorptive_phase, expand_preset
from .pulses import function_to_harmonics, gaussian_pulse, schedule_rows
from .states import count_accessible_pops
from .systems import transition_table

CSV_HEADER = "freq_hz,real,imag,magnitude"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else int(e.code)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="djnmr",
        description="Pulse-level simulator of NMR Deutsch-Jozsa experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configured experiment")
    p.add_argument("--config", metavar="FILE", help="YAML run configuration")
    p.add_argument("--system", choices=["three_spin", "five_spin"])
    p.add_argument("--init", metavar="KIND",
                   help="thermal | pseudopure:<bits> | pops:<bits>,<bits>")
    p.add_argument("--function", metavar="TABLE", help="truth table, e.g. 0110")
    p.add_argument("--pulse", metavar="MODEL", help="ideal | gaussian:<ms>")
    p.add_argument("--mode", choices=["phased", "absolute"])
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--plot", action="store_true", help="also render SVG plots")
    p.add_argument("--workers", type=int, metavar="N")
    p.add_argument("--schedule", metavar="FILE",
                   help="export the shaped function pulse as a CSV schedule")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("preset", help="run a named preset batch")
    p.add_argument("name", help=f"one of: {', '.join(sorted(PRESETS))}")
    p.add_argument("--out", metavar="DIR",
                   help="output directory (default: the preset name)")
    p.add_argument("--plot", action="store_true", help="also render SVG plots")
    p.add_argument("--workers", type=int, default=4, metavar="N")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("compare", help="diff two spectrum CSV files")
    p.add_argument("left", metavar="A.csv")
    p.add_argument("right", metavar="B.csv")
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="relative deviation bound for PASS (default 1e-6)")
    p.add_argument("--normalize", action="store_true",
                   help="fit a least-squares scalar before differencing")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("list-functions",
                       help="enumerate function classes for k data qubits")
    p.add_argument("-k", type=int, default=4, metavar="K",
                   help="data qubit count (default 4)")
    p.set_defaults(func=cmd_list_functions)

    p = sub.add_parser("counts", help="state and function counts for n spins")
    p.add_argument("-n", type=int, default=5, metavar="N",
                   help="total spin count (default 5)")
    p.set_defaults(func=cmd_counts)

    return parser


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    inline = [name for name in ("system", "init", "function", "pulse", "mode")
              if getattr(args, name) is not None]
    if args.config:
        if inline:
            print(f"simulate: --config conflicts with --{inline[0]}",
                  file=sys.stderr)
            return 2
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            print(f"simulate: cannot read {args.config}: {e}", file=sys.stderr)
            return 2
        cfg = parse_config(text)
    else:
        if args.function is None:
            print("simulate: --function (or --config) is required",
                  file=sys.stderr)
            return 2
        doc = {"schema_version": 1,
               "system": args.system or "three_spin",
               "init": args.init or "thermal",
               "function": args.function,
               "pulse": args.pulse or "ideal",
               "display": args.mode or "absolute"}
        cfg = parse_config(doc)

    try:
        plans, preset_name, description = _config_plans(cfg)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    if args.schedule:
        if cfg.preset is not None:
            print("simulate: --schedule needs a single-function run, not a preset",
                  file=sys.stderr)
            return 2
        if plans[0].pulse != "gaussian":
            print("simulate: --schedule requires a gaussian pulse model",
                  file=sys.stderr)
            return 2

    out_dir = args.out or cfg.output_dir
    workers = args.workers or cfg.workers
    plot = args.plot or cfg.plot
    code = _run_plans(plans, out_dir, workers, plot,
                      preset_name=preset_name, description=description)
    if code == 0 and args.schedule:
        _write_schedule(plans[0], args.schedule)
        print(f"wrote {args.schedule}")
    return code


def _config_plans(cfg: RunConfig):
    """Expand a RunConfig into experiment plans plus preset metadata."""
    if cfg.preset is not None:
        spec, plans = expand_preset(cfg.preset)
        if cfg.points != DEFAULT_POINTS or cfg.t2 != DEFAULT_T2:
            plans = [replace(p, points=cfg.points, t2=cfg.t2) for p in plans]
            if spec.mode == "phased":
                phase = absorptive_phase(plans[0].system, cfg.points,
                                         None, cfg.t2)
                plans = [replace(p, zero_order_phase=phase) for p in plans]
        return plans, spec.name, spec.description
    phase = 0.0
    if cfg.mode == "phased":
        phase = absorptive_phase(cfg.system, cfg.points, None, cfg.t2)
    plan = ExperimentPlan(
        system=cfg.system, function=cfg.function, init=cfg.init,
        labels=cfg.labels, pulse=cfg.pulse, duration=cfg.duration,
        prep_duration=cfg.prep_duration, per_cycle=cfg.per_cycle,
        truncation=cfg.truncation, points=cfg.points, t2=cfg.t2,
        mode=cfg.mode, zero_order_phase=phase)
    return [plan], None, None


def cmd_preset(args) -> int:
    try:
        spec, plans = expand_preset(args.name)
    except KeyError as e:
        print(f"preset: {e.args[0]}", file=sys.stderr)
        return 2
    out_dir = args.out or args.name
    return _run_plans(plans, out_dir, args.workers, args.plot,
                      preset_name=spec.name, description=spec.description)


# ---------------------------------------------------------------- runner

def _plan_spectrum(plan: ExperimentPlan) -> Spectrum:
    if plan.init == "pops":
        return run_pops_experiment(plan)
    fid = run_sequence_2(plan)
    return spectrum(fid, mode=plan.mode, zero_order_phase=plan.zero_order_phase)


def _reference_spectrum(plan: ExperimentPlan) -> Spectrum:
    """Ideal all-zeros run with the same start: the classification baseline."""
    table = "0" * len(plan.function.table)
    ref = replace(plan, function=BooleanFunction(table), pulse="ideal",
                  name="reference")
    return _plan_spectrum(ref)


def _run_plans(plans, out_dir, workers, plot,
               preset_name=None, description=None) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sys_ = plans[0].system
    tables = [transition_table(sys_, i) for i in range(sys_.n)]
    thresholds = ClassifyThresholds()
    written: list[Path] = []
    entries: list[dict | None] = [None] * len(plans)
    try:
        reference = _reference_spectrum(plans[0])
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = {ex.submit(_plan_spectrum, plan): i
                       for i, plan in enumerate(plans)}
            for fut in as_completed(futures):
                i = futures[fut]
                plan = plans[i]
                spec = fut.result()
                entries[i] = _emit_plan(plan, spec, reference, tables,
                                        thresholds, out, plot, written)
    except (ValueError, ArithmeticError) as e:
        for path in written:
            path.unlink(missing_ok=True)
        print(f"simulation failed: {e}", file=sys.stderr)
        return 1
    manifest = _manifest(plans, entries, preset_name, description,
                         workers, thresholds)
    _write_text_atomic(out / "manifest.json",
                       json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    print(f"wrote {len(written)} files + manifest.json to {out}")
    return 0


def _emit_plan(plan, spec, reference, tables, thresholds, out, plot, written):
    csv_path = out / f"{plan.name}.csv"
    _write_text_atomic(csv_path, _spectrum_csv(spec))
    written.append(csv_path)
    svg_name = None
    if plot:
        svg_path = out / f"{plan.name}.svg"
        _render_plot(spec, svg_path, plan.name)
        written.append(svg_path)
        svg_name = svg_path.name
    try:
        verdict = classify_from_spectrum(
            spec, plan.init, reference, tables,
            plan.system.work_spin, thresholds).value
    except ValueError:
        # No mechanical readout in this display mode (absolute pseudopure).
        verdict = None
    peaks = []
    for pk in extract_peaks(spec, thresholds.extract, tables):
        peaks.append({
            "freq_hz": _sig6(pk.freq),
            "amplitude": _sig6(pk.amplitude),
            "spin": (plan.system.labels[pk.assigned_spin]
                     if pk.assigned_spin is not None else None),
            "pattern": pk.data_pattern,
        })
    return {
        "name": plan.name,
        "function": plan.function.table,
        "expected": classify(plan.function).value,
        "verdict": verdict,
        "csv": csv_path.name,
        "svg": svg_name,
        "peaks": peaks,
    }


def _manifest(plans, entries, preset_name, description, workers, thresholds):
    plan = plans[0]
    sys_ = plan.system
    dwell = plan.dwell if plan.dwell is not None else default_dwell(sys_)
    return {
        "schema_version": 1,
        "preset": preset_name,
        "description": description,
        "system": {
            "labels": list(sys_.labels),
            "shifts_hz": [float(v) for v in sys_.shifts],
            "couplings_hz": [[float(v) for v in row] for row in sys_.couplings],
            "work_spin": sys_.work_spin,
        },
        "init": plan.init,
        "labels": list(plan.labels),
        "pulse": {
            "model": plan.pulse,
            "duration_s": plan.duration,
            "prep_duration_s": (plan.prep_duration
                                if plan.prep_duration is not None
                                else plan.duration),
            "per_cycle": plan.per_cycle,
            "truncation": plan.truncation,
        },
        "acquisition": {
            "points": plan.points,
            "dwell_s": dwell,
            "spectral_width_hz": 1.0 / dwell,
            "t2_s": plan.t2,
        },
        "display": {
            "mode": plan.mode,
            "zero_order_phase_rad": plan.zero_order_phase,
        },
        "thresholds": {
            "extract": thresholds.extract,
            "absent_below": thresholds.absent_below,
            "present_above": thresholds.present_above,
        },
        "workers": workers,
        "deterministic": True,
        "plans": entries,
    }


def _spectrum_csv(spec: Spectrum) -> str:
    mag = np.abs(spec.values)
    lines = [CSV_HEADER]
    for f, v, m in zip(spec.freqs, spec.values, mag):
        lines.append(f"{f:.17g},{v.real:.17g},{v.imag:.17g},{m:.17g}")
    return "\n".join(lines) + "\n"


def _write_text_atomic(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _render_plot(spec: Spectrum, path: Path, name: str):
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    # Fixed hash salt and no Date metadata keep the SVG bytes reproducible.
    matplotlib.rcParams["svg.hashsalt"] = name
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    ax.plot(spec.freqs, spec.display, linewidth=0.6, color="black")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("real part" if spec.mode == "phased" else "magnitude")
    ax.set_title(name)
    fig.tight_layout()
    tmp = path.with_name(path.name + ".tmp")
    try:
        fig.savefig(tmp, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    os.replace(tmp, path)


def _write_schedule(plan: ExperimentPlan, dest: str):
    sys_ = plan.system
    table = transition_table(sys_, sys_.work_spin)
    harmonics = function_to_harmonics(plan.function, table)
    pulse = gaussian_pulse(sys_, harmonics, plan.duration,
                           per_cycle=plan.per_cycle, truncation=plan.truncation)
    header, rows = schedule_rows(pulse)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" for v in row))
    _write_text_atomic(Path(dest), "\n".join(lines) + "\n")


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


# ---------------------------------------------------------------- compare

def _read_spectrum_csv(path: str) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: expected header {CSV_HEADER!r}, "
                             f"got {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns, got {data.shape[1]}")
    return data


def cmd_compare(args) -> int:
    try:
        a = _read_spectrum_csv(args.left)
        b = _read_spectrum_csv(args.right)
    except (OSError, ValueError) as e:
        print(f"compare: {e}", file=sys.stderr)
        return 2
    if a.shape[0] != b.shape[0] or not np.array_equal(a[:, 0], b[:, 0]):
        print("compare: frequency axes differ; the spectra are not on the "
              "same acquisition grid", file=sys.stderr)
        return 1
    va = a[:, 1] + 1j * a[:, 2]
    vb = b[:, 1] + 1j * b[:, 2]
    scale = 1.0 + 0.0j
    if args.normalize:
        denom = np.vdot(va, va).real
        if denom > 0.0:
            scale = np.vdot(va, vb) / denom
    dev = np.abs(vb - scale * va)
    ref = max(float(np.abs(va).max() * abs(scale)), float(np.abs(vb).max()))
    max_abs = float(dev.max())
    max_rel = max_abs / ref if ref > 0.0 else 0.0
    pa = _magnitude_peaks(a)
    pb = _magnitude_peaks(b)
    unmatched = len(pa.symmetric_difference(pb))
    print(f"bins: {a.shape[0]}")
    if args.normalize:
        print(f"scale: {scale.real:.6g}{scale.imag:+.6g}j (least squares)")
    print(f"max abs deviation: {max_abs:.6g}")
    print(f"max relative deviation: {max_rel:.6g}")
    print(f"peaks: {len(pa)} vs {len(pb)}, {unmatched} unmatched")
    if max_rel <= args.tolerance and unmatched == 0:
        print(f"PASS (tolerance {args.tolerance:g})")
        return 0
    print(f"FAIL (tolerance {args.tolerance:g})")
    return 1


def _magnitude_peaks(data: np.ndarray, threshold: float = 0.02) -> set[int]:
    mag = data[:, 3]
    top = mag.max()
    if top <= 0.0:
        return set()
    floor = threshold * top
    out = set()
    for i in range(1, len(mag) - 1):
        if mag[i] >= mag[i - 1] and mag[i] > mag[i + 1] and mag[i] >= floor:
            out.add(i)
    return out


# ---------------------------------------------------------------- listings

def cmd_list_functions(args) -> int:
    k = args.k
    if k < 1:
        print("list-functions: k must be at least 1", file=sys.stderr)
        return 2
    n_const, n_bal = count_functions(k)
    total = 1 << (1 << k)
    print(f"k={k} data qubits: {total} functions, "
          f"{n_const} constant, {n_bal} balanced")
    if k <= 2:
        print("all functions:")
        for x in range(total):
            table = format(x, f"0{1 << k}b")
            f = BooleanFunction(table)
            print(f"  {table}  {classify(f).value}")
        return 0
    print("demo set (constants plus one projection per data bit):")
    for f in select_demo_functions(k):
        print(f"  {f.table}  {classify(f).value}")
    return 0


def cmd_counts(args) -> int:
    n = args.n
    if n < 2:
        print("counts: n must be at least 2", file=sys.stderr)
        return 2
    c = count_accessible_pops(n)
    n_const, n_bal = count_functions(n - 1)
    print(f"n={n} spins ({n - 1} data qubits)")
    print(f"  pseudopure basis states: {c['pseudopure_states']}")
    print(f"  projector pairs: {c['pairs']}")
    print(f"  pops states from one line inversion: {c['accessible_pops']}")
    print(f"  constant functions: {n_const}")
    print(f"  balanced functions: {n_bal}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
