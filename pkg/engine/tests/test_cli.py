import os
import sys
# Add engine root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
"""
Tests de la ligne de commande : fichiers de run, formats de sortie et codes de sortie.
"""

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from app.cli.commands import oracle_deviation
from app.cli.io import read_grid, read_sidecar
from app.cli.loader import parse_run_config
from app.cli.schemas import ConfigError, InputError
from app.cqrs.schemas import PointStatus
from app.main import cli

ZERO_FIELD = """\
field:
  e0_over_ecr: 0.0
  omega_over_m: 0.4
  tau_times_m: 10.0
"""

# Impulsion courte : valeurs non nulles en quelques secondes
SHORT_PULSE = """\
field:
  e0_over_ecr: 0.5
  omega_over_m: 0.6
  tau_times_m: 10.0
"""


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path: Path, body: str, name: str = "run.yaml") -> Path:
    path = tmp_path / name
    path.write_text(body + f"output:\n  directory: {tmp_path / 'out'}\n  stem: run\n", encoding="utf-8")
    return path


GRID_3X3 = """\
grid:
  min1: -0.5
  max1: 0.5
  n1: 3
  min2: -0.5
  max2: 0.5
  n2: 3
"""


# ============================================================================
# Fichiers de run
# ============================================================================

def test_parse_run_config_with_overrides():
    config = parse_run_config(ZERO_FIELD + "predict:\n  n_max: 9\n", ["field.delta=0.5", "predict.n_min=3"])
    assert config.field.delta == 0.5
    assert config.predict.n_min == 3
    assert config.task == "predict"


def test_invalid_value_reports_line_number():
    text = ZERO_FIELD.replace("omega_over_m: 0.4", "omega_over_m: 0.0") + "predict:\n  n_max: 9\n"
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config(text)
    assert excinfo.value.line == 3
    assert "ligne 3" in str(excinfo.value)


def test_two_task_blocks_rejected():
    with pytest.raises(ConfigError):
        parse_run_config(ZERO_FIELD + "predict:\n  n_max: 9\npoint:\n  qx: 0.1\n")


def test_malformed_yaml_rejected():
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config("field: [unclosed\n")
    assert excinfo.value.line is not None


# ============================================================================
# Commandes
# ============================================================================

def test_predict_strong_field(runner, tmp_path):
    body = "field:\n  e0_over_ecr: 0.4\n  omega_over_m: 0.4\npredict:\n  n_min: 7\n  n_max: 8\n"
    result = runner.invoke(cli, ["predict", str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "run.predict.json").read_text())
    rings = {r["n"]: r for r in report["rings"]}
    assert rings[7]["radius"] == pytest.approx(0.67823, abs=1e-5)
    assert rings[8]["radius"] == pytest.approx(1.02956, abs=1e-5)
    assert rings[7]["node_count"] == 8
    assert rings[8]["node_count"] == 10
    assert report["min_photon_number"] == 7


def test_predict_rejects_zero_frequency(runner, tmp_path):
    body = "field:\n  e0_over_ecr: 0.4\n  omega_over_m: 0.0\npredict:\n  n_max: 8\n"
    result = runner.invoke(cli, ["predict", str(write_config(tmp_path, body))])
    assert result.exit_code == 1
    assert "ligne 3" in result.output


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(cli, ["predict", str(tmp_path / "absent.yaml")])
    assert result.exit_code == 1


def test_wrong_task_block(runner, tmp_path):
    result = runner.invoke(cli, ["sweep", str(write_config(tmp_path, ZERO_FIELD + "predict:\n  n_max: 8\n"))])
    assert result.exit_code == 1


def test_solve_zero_field(runner, tmp_path):
    path = write_config(tmp_path, ZERO_FIELD + "point:\n  qx: 0.2\n  qy: 0.3\n")
    result = runner.invoke(cli, ["solve", str(path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "run.point.json").read_text())
    assert report["f_final"] == 0.0
    assert report["n_steps"] > 0


def test_sweep_writes_csv_raw_and_sidecar(runner, tmp_path):
    path = write_config(tmp_path, ZERO_FIELD + GRID_3X3)
    result = runner.invoke(cli, ["sweep", str(path), "--set", "output.raw=true"])
    assert result.exit_code == 0, result.output

    out = tmp_path / "out"
    lines = (out / "run.csv").read_bytes().split(b"\n")
    assert lines[0] == b"q1,q2,f"
    assert lines[1] == b"-0.5,-0.5,0"
    assert len([line for line in lines[1:] if line]) == 9
    assert b"\r" not in (out / "run.csv").read_bytes()

    raw = np.frombuffer((out / "run.f64").read_bytes(), dtype="<f8")
    assert raw.shape == (9,) and np.all(raw == 0.0)

    meta = read_sidecar(out / "run.meta.json")
    assert meta["schema_version"] == 1
    assert meta["kind"] == "grid"
    assert meta["h9_variant"] == "p_outer_e"
    assert meta["run_config"]["field"]["omega_over_m"] == 0.4
    assert meta["status_counts"]["ok"] == 9
    assert meta["flagged_points"] == []


def test_sweep_is_deterministic(runner, tmp_path):
    path = write_config(tmp_path, SHORT_PULSE + GRID_3X3)
    out = tmp_path / "out" / "run.csv"
    assert runner.invoke(cli, ["sweep", str(path), "--workers", "1"]).exit_code == 0
    first = out.read_bytes()
    assert np.count_nonzero(read_grid(out).values) > 0
    assert runner.invoke(cli, ["sweep", str(path), "--workers", "2"]).exit_code == 0
    assert out.read_bytes() == first


def test_sweep_strict_flags_failed_points(runner, tmp_path):
    body = ZERO_FIELD.replace("e0_over_ecr: 0.0", "e0_over_ecr: 0.3") + "solver:\n  max_steps: 5\n" + GRID_3X3
    path = write_config(tmp_path, body)
    assert runner.invoke(cli, ["sweep", str(path)]).exit_code == 0
    assert runner.invoke(cli, ["sweep", str(path), "--strict"]).exit_code == 2


def test_failed_points_recorded_in_sidecar(runner, tmp_path):
    path = write_config(tmp_path, SHORT_PULSE + "solver:\n  max_steps: 5\n" + GRID_3X3)
    assert runner.invoke(cli, ["sweep", str(path)]).exit_code == 0
    out = tmp_path / "out"
    meta = read_sidecar(out / "run.meta.json")
    assert meta["flagged_points"] == [[i, int(PointStatus.STEP_LIMIT)] for i in range(9)]

    grid = read_grid(out / "run.csv")
    assert np.all(grid.status == PointStatus.STEP_LIMIT)
    assert np.all(grid.values == 0.0)


def test_invalid_flagged_point_rejected(runner, tmp_path):
    path = write_config(tmp_path, ZERO_FIELD + GRID_3X3)
    assert runner.invoke(cli, ["sweep", str(path)]).exit_code == 0
    meta_path = tmp_path / "out" / "run.meta.json"
    meta = json.loads(meta_path.read_text())
    meta["flagged_points"] = [[42, 1]]
    meta_path.write_text(json.dumps(meta))
    with pytest.raises(InputError):
        read_grid(tmp_path / "out" / "run.csv")


def test_unreadable_checkpoint_exits_with_input_error(runner, tmp_path, monkeypatch):
    monkeypatch.delenv("CHECKPOINT_DATABASE_URL", raising=False)
    checkpoint = tmp_path / "broken.db"
    checkpoint.write_bytes(b"ceci n'est pas une base SQLite" * 100)
    body = ZERO_FIELD + GRID_3X3 + f"output:\n  directory: {tmp_path / 'out'}\n  stem: run\n  checkpoint: {checkpoint}\n"
    path = tmp_path / "run.yaml"
    path.write_text(body, encoding="utf-8")
    result = runner.invoke(cli, ["sweep", str(path)])
    assert result.exit_code == 1
    assert "checkpoint inaccessible" in result.output
    assert result.exception is None or isinstance(result.exception, SystemExit)


def test_compare_oracle_passes_on_short_pulse(runner, tmp_path):
    path = write_config(tmp_path, SHORT_PULSE + GRID_3X3)
    result = runner.invoke(cli, ["compare-oracle", str(path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "run.oracle.json").read_text())
    assert report["pass"]
    assert report["max_relative_deviation"] <= 1e-2


def test_compare_oracle_rejects_transposed_h9_reading(runner, tmp_path):
    path = write_config(tmp_path, SHORT_PULSE + GRID_3X3)
    result = runner.invoke(cli, ["compare-oracle", str(path), "--set", "solver.h9_variant=e_outer_p"])
    assert result.exit_code == 3
    report = json.loads((tmp_path / "out" / "run.oracle.json").read_text())
    assert not report["pass"]


def test_sweep_then_analyze_round_trip(runner, tmp_path):
    path = write_config(tmp_path, ZERO_FIELD + GRID_3X3)
    assert runner.invoke(cli, ["sweep", str(path)]).exit_code == 0
    csv_path = tmp_path / "out" / "run.csv"

    grid = read_grid(csv_path)
    assert grid.values.shape == (3, 3)
    assert grid.field_config.omega == 0.4

    result = runner.invoke(cli, ["analyze", str(csv_path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "run.analysis.json").read_text())
    assert report["grids"][0]["rings"] == []


def test_analyze_without_sidecar(runner, tmp_path):
    csv_path = tmp_path / "lonely.csv"
    csv_path.write_text("q1,q2,f\n0,0,0\n", encoding="utf-8")
    result = runner.invoke(cli, ["analyze", str(csv_path)])
    assert result.exit_code == 1
    assert not (tmp_path / "lonely.analysis.json").exists()


def test_analyze_truncated_csv(runner, tmp_path):
    path = write_config(tmp_path, ZERO_FIELD + GRID_3X3)
    assert runner.invoke(cli, ["sweep", str(path)]).exit_code == 0
    csv_path = tmp_path / "out" / "run.csv"
    csv_path.write_bytes(b"\n".join(csv_path.read_bytes().split(b"\n")[:5]) + b"\n")

    with pytest.raises(InputError):
        read_grid(csv_path)
    result = runner.invoke(cli, ["analyze", str(csv_path)])
    assert result.exit_code == 1
    assert not (tmp_path / "out" / "run.analysis.json").exists()


def test_unknown_sidecar_version(runner, tmp_path):
    path = write_config(tmp_path, ZERO_FIELD + GRID_3X3)
    assert runner.invoke(cli, ["sweep", str(path)]).exit_code == 0
    meta_path = tmp_path / "out" / "run.meta.json"
    meta = json.loads(meta_path.read_text())
    meta["schema_version"] = 99
    meta_path.write_text(json.dumps(meta))
    assert runner.invoke(cli, ["analyze", str(tmp_path / "out" / "run.csv")]).exit_code == 1


def test_compare_oracle_requires_linear_polarization(runner, tmp_path):
    body = ZERO_FIELD + "  delta: 0.5\n" + GRID_3X3
    result = runner.invoke(cli, ["compare-oracle", str(write_config(tmp_path, body))])
    assert result.exit_code == 1
    assert "δ = 0" in result.output


def test_compare_oracle_zero_field(runner, tmp_path):
    result = runner.invoke(cli, ["compare-oracle", str(write_config(tmp_path, ZERO_FIELD + GRID_3X3))])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "run.oracle.json").read_text())
    assert report["max_absolute_deviation"] == 0.0
    assert report["pass"]


def test_oracle_deviation_criteria():
    qve = np.array([1e-3, 2e-8, 0.0])
    assert oracle_deviation(qve * (1 + 5e-3), qve)["pass"]
    assert not oracle_deviation(qve * (1 + 5e-2), qve)["pass"]
    small_off = oracle_deviation(np.array([1e-3, 2e-8 + 5e-9, 0.0]), qve)
    assert not small_off["pass"]
    assert small_off["max_absolute_deviation_small"] == pytest.approx(5e-9)


def test_scan_freq_empty_range(runner, tmp_path):
    body = ZERO_FIELD + "frequency_scan:\n  omega_min: 0.8\n  omega_max: 0.4\n  n_omega: 10\n"
    assert runner.invoke(cli, ["scan-freq", str(write_config(tmp_path, body))]).exit_code == 1


def test_scan_freq_zero_field_reports_no_peaks(runner, tmp_path):
    body = ZERO_FIELD + "frequency_scan:\n  omega_min: 0.4\n  omega_max: 0.6\n  n_omega: 3\n"
    result = runner.invoke(cli, ["scan-freq", str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "run.peaks.json").read_text())
    assert report["peaks"] == []
    header = (tmp_path / "out" / "run.csv").read_text().splitlines()[0]
    assert header == "omega,f"


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "pairspectra" in result.output
