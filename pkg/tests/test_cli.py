import json
import subprocess
import sys

import pytest

from nozzleshock import io
from nozzleshock.cli import main, resolve_config, UsageError

SMALL_2D = ["--nr", "40", "--ntheta", "20"]


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_radial_by_shock_radius(tmp_path, capsys):
    assert run(tmp_path, "radial", "--rs", "1.5") == 0
    assert "lemma1=pass" in capsys.readouterr().out
    sol = json.loads((tmp_path / "solution.json").read_text())
    assert sol["r_s"] == 1.5
    assert sol["v1"] == pytest.approx(0.20028555969274916718, rel=1e-13)
    header, data = io.read_csv(tmp_path / "subsonic.csv")
    assert tuple(header) == io.PROFILE_COLUMNS
    assert data.shape == (201, 6)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "radial"
    assert manifest["config"]["rs"] == 1.5


def test_radial_by_exit_speed_is_out_of_range(tmp_path, capsys):
    assert run(tmp_path, "radial", "--v1", "0.2") == 2
    assert "admissible interval" in capsys.readouterr().err


def test_radial_rejects_boundary_shock(tmp_path):
    assert run(tmp_path, "radial", "--rs", "2.0") == 2


def test_radial_bad_gas(tmp_path):
    assert run(tmp_path, "radial", "--rs", "1.5", "--gamma", "1.0") == 2


def test_shock_choice_is_mutually_exclusive(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "radial", "--rs", "1.5", "--v1", "0.2")
    assert info.value.code == 2


def test_shock_choice_required(tmp_path, capsys):
    assert run(tmp_path, "radial") == 2
    assert "exactly one" in capsys.readouterr().err


def test_interval_degenerate_exit_code(tmp_path):
    assert run(tmp_path, "interval") == 3
    data = json.loads((tmp_path / "interval.json").read_text())
    assert data["degenerate"]
    assert data["v_lo"] == pytest.approx(0.20028555969274916718, rel=1e-10)


def test_map_reports_non_monotone(tmp_path, capsys):
    assert run(tmp_path, "map", "--samples", "5") == 3
    header, data = io.read_csv(tmp_path / "map.csv")
    assert tuple(header) == io.MAP_COLUMNS
    assert data.shape == (5, 2)
    assert "not strictly increasing" in capsys.readouterr().err


def test_map_samples_usage(tmp_path):
    assert run(tmp_path, "map", "--samples", "1") == 2


def test_verify2d(tmp_path):
    assert run(tmp_path, "verify2d", "--rs", "1.5", "--mode", "1", *SMALL_2D) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verdict"] == "converged"
    assert report["uniqueness"]["within_thresholds"]
    header, data = io.read_csv(tmp_path / "field.csv")
    assert tuple(header) == io.FIELD_COLUMNS
    assert data.shape == (40 * 20, 6)


def test_verify2d_exit_speed_out_of_range(tmp_path):
    assert run(tmp_path, "verify2d", "--v1", "0.4", "--mode", "1") == 2


def test_verify2d_amplitude_too_large(tmp_path):
    assert run(tmp_path, "verify2d", "--rs", "1.5", "--mode", "1", "--amplitude", "0.6") == 2


def test_verify2d_needs_2d(tmp_path):
    assert run(tmp_path, "verify2d", "--rs", "1.5", "--dim", "3") == 2


def test_verify2d_nonconvergence(tmp_path):
    argv = ["verify2d", "--rs", "1.5", "--seed", "3", "--amplitude", "0.2", "--max-outer", "1", *SMALL_2D]
    assert run(tmp_path, *argv) == 4


def test_config_file_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"rs": 1.3, "n": 51, "u0": 1.6}))
    out = tmp_path / "o"
    assert main(["radial", "--config", str(cfg_file), "--n", "21", "--out", str(out)]) == 0
    cfg = json.loads((out / "manifest.json").read_text())["config"]
    assert (cfg["rs"], cfg["n"], cfg["u0"]) == (1.3, 21, 1.6)


def test_flag_overrides_file_shock_choice():
    cfg = resolve_config("radial", {"v1": 0.3}, {"rs": 1.5})
    assert "rs" not in cfg and cfg["v1"] == 0.3
    with pytest.raises(UsageError):
        resolve_config("verify2d", {"rs": 1.5, "mode": 1, "seed": 2})


def test_env_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("NOZZLESHOCK_OUT", str(tmp_path))
    assert main(["radial", "--rs", "1.5"]) == 0
    assert (tmp_path / "solution.json").exists()


@pytest.mark.parametrize("argv", [
    ["radial", "--rs", "1.4", "--dim", "2"],
    ["map", "--samples", "7"],
    ["verify2d", "--rs", "1.5", "--seed", "11", "--amplitude", "0.1", *SMALL_2D],
])
def test_rerun_is_byte_identical(tmp_path, argv):
    first, second = tmp_path / "a", tmp_path / "b"
    code = main([*argv, "--out", str(first)])
    assert main(["rerun", str(first / "manifest.json"), "--out", str(second)]) == code
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "nozzleshock", "radial", "--rs", "1.5", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("r_s=1.5")
