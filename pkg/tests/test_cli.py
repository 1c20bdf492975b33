import json

import pytest

from djnmr import ConfigError, expand_preset, parse_config
from djnmr.cli import CSV_HEADER, main


def read_tree(root):
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


def test_parse_minimal_config():
    cfg = parse_config({"schema_version": 1, "function": "0110"})
    assert cfg.system.n == 3
    assert cfg.init == "thermal"
    assert cfg.pulse == "ideal"
    assert cfg.mode == "absolute"
    assert cfg.points == 8192 and cfg.t2 == 0.02
    assert cfg.workers == 4 and cfg.deterministic is True


def test_parse_full_config_yaml_text():
    text = """
schema_version: 1
system:
  labels: [A, B]
  shifts_hz: [500, -300]
  couplings_hz: [40]
  work_spin: 0
init: pops:00,10
function: "01"
pulse:
  model: gaussian
  duration_ms: 10
  prep_duration_ms: 20
  per_cycle: 40
acquisition: {points: 2048, t2_s: 0.05}
display: absolute
output_dir: somewhere
workers: 2
"""
    cfg = parse_config(text)
    assert cfg.system.labels == ("A", "B")
    assert cfg.init == "pops" and cfg.labels == ("00", "10")
    assert cfg.pulse == "gaussian"
    assert cfg.duration == pytest.approx(0.010)
    assert cfg.prep_duration == pytest.approx(0.020)
    assert cfg.per_cycle == 40
    assert cfg.points == 2048 and cfg.t2 == 0.05


@pytest.mark.parametrize("doc,path", [
    ({"schema_version": 2, "function": "0110"}, "schema_version"),
    ({"schema_version": 1}, "function"),
    ({"schema_version": 1, "function": "0110", "preset": "fig2"}, "function"),
    ({"schema_version": 1, "function": "0110", "bogus": 1}, "bogus"),
    ({"schema_version": 1, "function": "0110", "init": "warm"}, "init"),
    ({"schema_version": 1, "function": "0110", "pulse": "square"}, "pulse"),
    ({"schema_version": 1, "function": "0110",
      "acquisition": {"points": 5000}}, "acquisition.points"),
    ({"schema_version": 1, "function": "0110", "deterministic": False},
     "deterministic"),
    ({"schema_version": 1, "preset": "fig99"}, "preset"),
    ({"schema_version": 1, "function": "0110",
      "pulse": {"model": "gaussian", "per_cycle": 10}}, "pulse.per_cycle"),
])
def test_parse_config_rejections(doc, path):
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    assert err.value.path == path


def test_asymmetric_matrix_rejected_by_name():
    doc = {
        "schema_version": 1,
        "function": "01",
        "system": {"labels": ["A", "B"], "shifts_hz": [0, 100],
                   "couplings_hz": [[0, 5], [6, 0]], "work_spin": 0},
    }
    with pytest.raises(ConfigError, match="symmetric") as err:
        parse_config(doc)
    assert err.value.path == "system.couplings_hz"
    assert "[0][1]" in str(err.value)


def test_preset_expansion():
    spec, plans = expand_preset("fig2")
    assert spec.mode == "phased"
    assert len(plans) == 8
    assert [p.function.table for p in plans[:2]] == ["0000", "1111"]
    assert all(p.name == f"f{p.function.table}" for p in plans)
    with pytest.raises(KeyError):
        expand_preset("fig1")


def test_preset_run_end_to_end(tmp_path):
    out = tmp_path / "fig2"
    assert main(["preset", "fig2", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == [
        "f0000.csv", "f0011.csv", "f0101.csv", "f0110.csv", "f1001.csv",
        "f1010.csv", "f1100.csv", "f1111.csv", "manifest.json"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert manifest["preset"] == "fig2"
    assert manifest["deterministic"] is True
    verdicts = [p["verdict"] for p in manifest["plans"]]
    assert verdicts.count("constant") == 2
    assert verdicts.count("balanced") == 6
    for p in manifest["plans"]:
        assert p["verdict"] == p["expected"]
        assert p["peaks"]
    header = (out / "f0000.csv").read_text().splitlines()[0]
    assert header == CSV_HEADER

    before = read_tree(out)
    assert main(["preset", "fig2", "--out", str(out)]) == 0
    assert read_tree(out) == before  # byte-identical rerun


def test_compare_pass_and_fail(tmp_path, capsys):
    out = tmp_path / "fig2"
    main(["preset", "fig2", "--out", str(out)])
    a = str(out / "f0000.csv")
    b = str(out / "f0110.csv")
    assert main(["compare", a, a]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["compare", a, b]) == 1
    assert "FAIL" in capsys.readouterr().out
    assert main(["compare", a, a, "--normalize"]) == 0
    assert main(["compare", a, str(tmp_path / "missing.csv")]) == 2


def test_compare_rejects_foreign_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("freq,real\n0,1\n")
    assert main(["compare", str(bad), str(bad)]) == 2


def test_simulate_inline_flags(tmp_path):
    out = tmp_path / "run"
    code = main(["simulate", "--system", "three_spin", "--function", "0101",
                 "--out", str(out)])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["preset"] is None
    assert manifest["plans"][0]["name"] == "thermal_f0101"
    assert manifest["plans"][0]["verdict"] == "balanced"
    assert (out / "thermal_f0101.csv").exists()


def test_simulate_config_file_with_schedule(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("""
schema_version: 1
system: three_spin
init: thermal
function: "0110"
pulse: gaussian:24
display: absolute
""")
    out = tmp_path / "out"
    sched = tmp_path / "sched.csv"
    code = main(["simulate", "--config", str(cfg), "--out", str(out),
                 "--schedule", str(sched)])
    assert code == 0
    header = sched.read_text().splitlines()[0].split(",")
    assert header[:2] == ["t_s", "envelope"]
    assert header[2:] == ["phase_0", "phase_1"]


def test_simulate_usage_errors(tmp_path, capsys):
    assert main(["simulate"]) == 2
    assert main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == 2
    cfg = tmp_path / "c.yaml"
    cfg.write_text("schema_version: 1\nfunction: '0110'\n")
    assert main(["simulate", "--config", str(cfg), "--init", "thermal"]) == 2
    assert main(["simulate", "--function", "0110",
                 "--schedule", str(tmp_path / "s.csv")]) == 2  # ideal pulse
    assert main(["simulate", "--function", "01"]) == 2  # arity
    capsys.readouterr()


def test_preset_usage_errors():
    assert main(["preset", "fig99"]) == 2
    assert main(["bogus-subcommand"]) == 2
    assert main([]) == 2


def test_listing_subcommands(capsys):
    assert main(["list-functions", "-k", "2"]) == 0
    out = capsys.readouterr().out
    assert "2 constant, 6 balanced" in out
    assert "0110  balanced" in out
    assert main(["list-functions", "-k", "4"]) == 0
    out = capsys.readouterr().out
    assert "12870 balanced" in out
    assert main(["counts", "-n", "5"]) == 0
    out = capsys.readouterr().out
    assert "pseudopure basis states: 32" in out
    assert "projector pairs: 496" in out
    assert "80" in out
    assert main(["counts", "-n", "1"]) == 2
    assert main(["list-functions", "-k", "0"]) == 2


def test_plot_flag_renders_svg(tmp_path):
    out = tmp_path / "plots"
    code = main(["simulate", "--system", "three_spin", "--function", "0000",
                 "--out", str(out), "--plot"])
    assert code == 0
    svg = out / "thermal_f0000.svg"
    assert svg.exists()
    body = svg.read_text()
    assert body.lstrip().startswith("<?xml")
    first = svg.read_bytes()
    assert main(["simulate", "--system", "three_spin", "--function", "0000",
                 "--out", str(out), "--plot"]) == 0
    assert svg.read_bytes() == first  # SVG reruns are also byte-stable
