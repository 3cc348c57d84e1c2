import csv
import json

import numpy as np
import pytest

from mch import cli
from mch.config import parse_config
from mch.timestep import TIMESERIES_COLUMNS


def _run(tmp_path, name, text, overrides=()):
    out = tmp_path / name
    return cli.run(parse_config(text, list(overrides)), out), out


def test_conservation_preset_exit_zero(tmp_path):
    res, out = _run(tmp_path, "c", "preset = conservation\n", ["control.t_end = 0.2",
                                                              "output.snapshots = [0, 0.2]"])
    assert res.exit_code == 0
    with open(out / "timeseries.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TIMESERIES_COLUMNS
    t = np.array([float(r[0]) for r in rows[1:]])
    assert np.all(np.diff(t) > 0)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_code"] == 0 and manifest["termination"] == "reached_t_end"
    assert {"snapshot_000.csv", "snapshot_001.csv", "bounds.json"} <= set(manifest["files"])
    assert cli.check(out) == []


def test_breaking_preset_run(tmp_path):
    res, out = _run(tmp_path, "b", "preset = thm51i\n")
    assert res.exit_code == cli.EXIT_CODES[res.trajectory.termination] == 2
    bounds = json.loads((out / "bounds.json").read_text())
    t_star = bounds["blowup"]["t_star"]
    assert bounds["blowup"]["case"] == "i" and t_star > 0
    det = bounds["detected"]
    assert det["stop_time"] <= 1.05 * t_star
    assert det["breaking_time_estimate"] <= 1.05 * t_star
    assert det["within_upper_bound"] and det["estimate_within_upper_bound"]
    assert cli.check(out) == []


def test_rerun_is_byte_identical(tmp_path):
    text = "preset = conservation\n"
    ov = ["control.t_end = 0.1", "output.snapshots = [0.1]"]
    _, a = _run(tmp_path, "a", text, ov)
    _, b = _run(tmp_path, "b", text, ov)
    for name in ("timeseries.csv", "snapshot_000.csv", "bounds.json", "diagnostics.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_check_detects_tampering(tmp_path):
    _, out = _run(tmp_path, "t", "preset = conservation\n", ["control.t_end = 0.05",
                                                            "output.snapshots = [0.05]"])
    path = out / "timeseries.csv"
    rows = path.read_text().splitlines()
    cells = rows[2].split(",")
    cells[0] = "-1"
    rows[2] = ",".join(cells)
    path.write_text("\n".join(rows) + "\n")
    assert any("time column" in p for p in cli.check(out))


def test_main_run_and_check(tmp_path, capsys):
    out = tmp_path / "m"
    code = cli.main(["run", "--preset", "traveling_wave", "--out", str(out)])
    assert code == 0
    diags = json.loads((out / "diagnostics.json").read_text())
    assert diags["traveling_wave"]["pde_residual"] > 1e-2
    assert cli.main(["check", str(out)]) == 0
    assert "ok" in capsys.readouterr().out


def test_main_usage_errors(tmp_path, capsys):
    assert cli.main(["run"]) == cli.EXIT_USAGE
    assert cli.main(["run", "--preset", "missing"]) == cli.EXIT_USAGE
    assert cli.main(["run", "--override", "initial=gaussian", "--override",
                     "initial.amplitude=0.5", "--override", "output.snapshots=[3]"]) == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "output.snapshots" in err


def test_presets_listing(capsys):
    assert cli.main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "thm51i" in out and "zero_curvature" in out


def test_sweep(tmp_path, capsys):
    code = cli.main(["run", "--preset", "traveling_wave", "--out", str(tmp_path / "s"),
                     "--sweep", "diagnostics.traveling_wave.c=0.5,2"])
    assert code == 0
    assert (tmp_path / "s" / "diagnostics.traveling_wave.c=0.5" / "manifest.json").exists()
    assert (tmp_path / "s" / "diagnostics.traveling_wave.c=2" / "manifest.json").exists()


def test_file_initial_data(tmp_path):
    from mch import exact, make_grid

    g = make_grid(20 * np.pi, 1024)
    u = exact.gaussian(g, 0.3).values
    src = tmp_path / "u0.csv"
    np.savetxt(src, np.column_stack([g.x, u]), delimiter=",", header="x,u", comments="")
    res, out = _run(tmp_path, "f", f"initial = file\ninitial.path = {src}\ncontrol.t_end = 0.05\n")
    assert res.exit_code == 0
    assert np.allclose(res.trajectory.records[0].sup_u, 0.3)


def test_blowup_bounds_skipped_for_dispersion(tmp_path):
    res, _ = _run(tmp_path, "g", "preset = conservation\n", ["gamma = 1", "control.t_end = 0.01",
                                                            "output.snapshots = [0.01]"])
    assert res.bounds["blowup"]["applicable"] is False


@pytest.mark.parametrize("name", ["thm51iii"])
def test_case_iii_preset_has_no_witness(tmp_path, name):
    res, out = _run(tmp_path, name, f"preset = {name}\n")
    assert res.bounds["blowup"]["applicable"] is False
    assert cli.check(out) == []
