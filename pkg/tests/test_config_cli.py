import csv
import subprocess
import sys
from pathlib import Path

import pytest

from mcf_ttdl.cli import (EXIT_INPUT, EXIT_INVALID, EXIT_IO, EXIT_OK, fixture_names,
                          fixture_text, fmt, main, run_job)
from mcf_ttdl.config import ConfigError, parse_config

MINIMAL = """
[job]
kind = simulate-filter
name = three

[grid]
f_start_ghz = 0
f_stop_ghz = 20
n_points = 201

[taps]
delays_ps = 0, 100, 200
amplitudes = 1, 1, 1
"""


def write(tmp_path, text, name="job.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_records(path):
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


def test_parse_minimal():
    cfg = parse_config(MINIMAL)
    assert cfg.kind == "simulate-filter"
    assert cfg.name == "three"
    assert cfg.section("taps")["delays_ps"] == [0.0, 100.0, 200.0]
    assert cfg.section("grid")["n_points"] == 201


def test_unit_suffix_missing_names_key():
    text = "[job]\nkind = validate-inscription\n[device]\nsource = reference\n" \
           "[geometry]\npitch = 35\n"
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.key == "pitch"
    assert e.value.line == 6
    assert "pitch_um" in str(e.value)


def test_wrong_unit_suffix():
    text = MINIMAL.replace("f_stop_ghz", "f_stop_mhz")
    with pytest.raises(ConfigError, match="f_stop_ghz"):
        parse_config(text)


def test_unknown_key():
    with pytest.raises(ConfigError, match="unknown key") as e:
        parse_config(MINIMAL + "colour = red\n")
    assert e.value.key == "colour"


def test_duplicate_section():
    with pytest.raises(ConfigError, match="duplicate section") as e:
        parse_config(MINIMAL + "[grid]\nn_points = 3\n")
    assert e.value.line is not None


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config(MINIMAL.replace("n_points = 201", "n_points = 201\nn_points = 5"))


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing required") as e:
        parse_config(MINIMAL.replace("n_points = 201\n", ""))
    assert e.value.key == "n_points"


def test_missing_section():
    with pytest.raises(ConfigError, match=r"\[taps\] or \[link\] or \[device\]"):
        parse_config(MINIMAL.split("[taps]")[0])


def test_section_not_used_by_kind():
    with pytest.raises(ConfigError, match="not used"):
        parse_config(MINIMAL + "[fit]\nbudget = 3\n")


def test_unknown_kind():
    with pytest.raises(ConfigError, match="unknown job kind"):
        parse_config(MINIMAL.replace("simulate-filter", "simulate"))


def test_bad_number():
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config(MINIMAL.replace("n_points = 201", "n_points = lots"))


def test_fmt_shortest_round_trip():
    assert fmt(0.1) == "0.1"
    assert fmt(1 / 3) == repr(1 / 3)
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(True) == "true"
    assert fmt([1.0, 2.5]) == "1.0,2.5"


def test_run_minimal_outputs(tmp_path):
    code, summary = run_job(parse_config(MINIMAL), tmp_path)
    assert code == EXIT_OK
    assert summary.startswith("ok")
    rows = list(csv.reader((tmp_path / "three.response.csv").open()))
    assert rows[0] == ["schema_version", "kind"]
    assert rows[1] == ["1", "simulate-filter"]
    assert rows[2] == ["freq_ghz", "mag_db", "phase_rad"]
    assert len(rows) == 3 + 201
    assert float(rows[3][1]) == 0.0
    taps = list(csv.reader((tmp_path / "three.taps.csv").open()))
    assert taps[2] == ["tap_index", "delay_ps", "amplitude", "label"]
    assert len(taps) == 6
    rec = read_records(tmp_path / "three.metrics.txt")
    assert rec["schema_version"] == "1"
    assert float(rec["fsr_ghz"]) == pytest.approx(10.0)


def test_fig3c_fixture_fsr(tmp_path):
    code, _ = run_job(parse_config(fixture_text("fig3c.cfg")), tmp_path)
    assert code == EXIT_OK
    rec = read_records(tmp_path / "fig3c.metrics.txt")
    assert float(rec["fsr_ghz"]) == pytest.approx(20.0, rel=1e-12)
    rows = list(csv.reader((tmp_path / "fig3c.response.csv").open()))[3:]
    f = [float(r[0]) for r in rows]
    db = [float(r[1]) for r in rows]
    peaks = [fi for fi, d in zip(f, db) if d > -1e-9]
    assert peaks == pytest.approx([0.0, 20.0, 40.0], abs=1e-9)


def test_inscription_fixture_passes(tmp_path):
    code, _ = run_job(parse_config(fixture_text("fig2_inscription.cfg")), tmp_path)
    assert code == EXIT_OK
    assert read_records(tmp_path / "fig2_inscription.report.txt")["status"] == "pass"


def test_design_spacing_fixture(tmp_path):
    code, _ = run_job(parse_config(fixture_text("design_spacing.cfg")), tmp_path)
    assert code == EXIT_OK
    rec = read_records(tmp_path / "design_spacing.design.txt")
    value = next(v for k, v in rec.items() if k.startswith("spacing"))
    assert round(float(value), 2) == 20.54


def test_every_fixture_parses():
    names = fixture_names()
    assert "fig3c.cfg" in names and len(names) >= 10
    kinds = {parse_config(fixture_text(n)).kind for n in names}
    assert len(kinds) == 9


# -- exit codes through main() ------------------------------------------------

def test_main_exit_ok(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL)
    assert main(["simulate-filter", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("simulate-filter: ok")


def test_main_exit_validation_failure(tmp_path, capsys):
    text = fixture_text("fig2_inscription.cfg").replace("beam_width_um = 23", "beam_width_um = 25")
    cfg = write(tmp_path, text)
    out = tmp_path / "o"
    assert main(["validate-inscription", "--config", str(cfg), "--out", str(out)]) == EXIT_INVALID
    rec = read_records(out / "fig2_inscription.report.txt")
    assert rec["status"] == "fail"
    assert rec["single_core_addressability.pass"] == "false"
    assert capsys.readouterr().err.startswith("validate-inscription: ")


def test_main_exit_input_error(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL.replace("f_stop_ghz", "f_stop"))
    assert main(["simulate-filter", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INPUT
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert err[0].startswith("simulate-filter: error:") and "f_stop" in err[0]


def test_main_exit_input_error_from_engine(tmp_path, capsys):
    bad = MINIMAL.replace("delays_ps = 0, 100, 200", "delays_ps = 0, 100, 100")
    cfg = write(tmp_path, bad)
    assert main(["simulate-filter", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INPUT
    assert "strictly increasing" in capsys.readouterr().err


def test_main_kind_mismatch(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL)
    assert main(["taps-fbg", "--config", str(cfg)]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("taps-fbg: error:")


def test_main_exit_io_missing_config(tmp_path, capsys):
    assert main(["simulate-filter", "--config", str(tmp_path / "nope.cfg")]) == EXIT_IO
    assert capsys.readouterr().err.startswith("simulate-filter: error:")


def test_main_exit_io_unwritable_output(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate-filter", "--config", str(cfg), "--out", str(blocker / "sub")]) == EXIT_IO
    assert capsys.readouterr().err.startswith("simulate-filter: error:")


def test_main_fixtures_flag(tmp_path):
    assert main(["--fixtures", "--out", str(tmp_path)]) == EXIT_OK
    written = sorted(p.name for p in tmp_path.glob("*.cfg"))
    assert written == fixture_names()
    assert (tmp_path / "fig3c.cfg").read_text() == fixture_text("fig3c.cfg")


def test_console_module_entry(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    cp = subprocess.run([sys.executable, "-m", "mcf_ttdl", "simulate-filter", "--config",
                         str(cfg), "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert cp.returncode == 0, cp.stderr
    assert (tmp_path / "o" / "three.response.csv").exists()
