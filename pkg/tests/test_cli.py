import csv
import json
import os

import numpy as np
import pytest

from cavity_vacua import cli


def run_cli(args):
    return cli.main(list(args))


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_unknown_subcommand_exit_1(capsys):
    assert run_cli(["frobnicate"]) == 1
    assert run_cli([]) == 1


def test_geometry_outputs(tmp_path):
    out = tmp_path / "geo"
    assert run_cli(["geometry", "--lattice", "slab_square", "--nx", "4",
                    "--layers", "2", "--d", "8", "--out", str(out)]) == 0
    header, rows = read_csv(out / "coupling.csv")
    assert header == ["row", "col", "value"]
    assert len(rows) == 32 * 32
    summary = json.loads((out / "geometry.json").read_text())
    assert summary["N"] == 32
    assert summary["max_truncation_residual"] < 1e-8
    assert set(summary) == {"N", "eta", "nu", "boundary", "image_cutoff",
                            "max_truncation_residual"}


def test_csv_is_rfc4180(tmp_path):
    out = tmp_path / "geo"
    run_cli(["geometry", "--lattice", "line_stack", "--nx", "3", "--d", "20",
             "--out", str(out)])
    raw = (out / "coupling.csv").read_bytes()
    assert b"\r\n" in raw
    assert raw.decode().splitlines()[0] == "row,col,value"


def test_polariton_columns(tmp_path):
    out = tmp_path / "pol"
    assert run_cli(["polariton", "--lattice", "slab_square", "--nx", "4",
                    "--layers", "2", "--d", "8", "--points", "5",
                    "--omega-p-max", "2.0", "--out", str(out)]) == 0
    header, rows = read_csv(out / "polariton.csv")
    assert header == ["omega_p", "Omega_plus", "Omega_minus", "dark_min",
                      "dark_max", "unstable_count"]
    assert len(rows) == 5


def test_ground_columns_and_manifest(tmp_path):
    out = tmp_path / "gr"
    assert run_cli(["ground", "--model", "EDM", "--omega0", "1", "--g", "0.5",
                    "--epsilon", "-0.1", "--N", "4", "--out", str(out)]) == 0
    header, rows = read_csv(out / "ground.csv")
    assert header == cli.GROUND_COLUMNS
    assert len(rows) == 1
    manifest = json.loads((out / "ground_manifest.json").read_text())
    assert manifest["params"]["g"] == 0.5
    assert manifest["columns"] == cli.GROUND_COLUMNS
    assert "determinism" in manifest


def test_sweep_deterministic_across_workers(tmp_path):
    common = ["sweep", "--model", "EDM", "--omega0", "1", "--epsilon", "-0.1",
              "--N", "2", "--var", "g", "--min", "0.1", "--max", "1.0",
              "--points", "4"]
    out1, out2 = tmp_path / "w1", tmp_path / "w2"
    assert run_cli(common + ["--workers", "1", "--out", str(out1)]) == 0
    assert run_cli(common + ["--workers", "2", "--out", str(out2)]) == 0
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()


def test_sweep_rows_sorted_by_axis(tmp_path):
    out = tmp_path / "sw"
    run_cli(["sweep", "--model", "EDM", "--omega0", "1", "--N", "2", "--var",
             "g", "--min", "0.1", "--max", "0.7", "--points", "4",
             "--out", str(out)])
    _, rows = read_csv(out / "sweep.csv")
    g = [float(r[0]) for r in rows]
    assert g == sorted(g)


def test_spin_only_model_row(tmp_path):
    out = tmp_path / "lmg"
    assert run_cli(["ground", "--model", "LMG", "--omega0", "1", "--g", "1.0",
                    "--epsilon", "-0.3", "--N", "6", "--out", str(out)]) == 0
    header, rows = read_csv(out / "ground.csv")
    row = dict(zip(header, rows[0]))
    assert row["photon_number"] == "nan"
    assert float(row["energy"]) < 0


def test_hp_model_row(tmp_path):
    out = tmp_path / "hp"
    assert run_cli(["ground", "--model", "HP", "--omega0", "1", "--g", "0.1",
                    "--epsilon", "0.05", "--N", "8", "--out", str(out)]) == 0
    header, rows = read_csv(out / "ground.csv")
    row = dict(zip(header, rows[0]))
    assert 0.0 < float(row["photon_number"]) < 1.0


def test_qfunction_grid(tmp_path):
    out = tmp_path / "qf"
    assert run_cli(["qfunction", "--omega0", "1", "--g", "0.4", "--epsilon",
                    "0.0", "--N", "2", "--n-theta", "7", "--n-phi", "9",
                    "--out", str(out)]) == 0
    header, rows = read_csv(out / "qfunction.csv")
    assert header == ["theta", "phi", "Q"]
    assert len(rows) == 63
    q = np.array([float(r[2]) for r in rows])
    assert np.all(q >= 0) and q.max() <= 1.0 + 1e-9


def test_adiabatic_grid(tmp_path):
    out = tmp_path / "ad"
    assert run_cli(["adiabatic", "--alpha", "1.0", "--epsilon", "-0.01",
                    "--N", "2", "--x-min", "-3", "--x-max", "3",
                    "--x-points", "13", "--out", str(out)]) == 0
    header, rows = read_csv(out / "adiabatic.csv")
    assert header == ["x", "V"]
    assert len(rows) == 13


def test_analytics_json(capsys):
    assert run_cli(["analytics", "critical-coupling", "--epsilon", "-0.1",
                    "--N", "8"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["g_c"] == pytest.approx(1.118033988749895)


def test_run_config_roundtrip(tmp_path):
    cfg = {
        "model": "EDM",
        "params": {"omega0": 1.0, "epsilon": -0.1, "N": 2, "lambda": 1e-3},
        "sweep": [{"variable": "g", "min": 0.1, "max": 0.9, "points": 3}],
        "outputs": {"prefix": "demo"},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert run_cli(["run", "--config", str(path), "--out", str(out)]) == 0
    header, rows = read_csv(out / "demo.csv")
    assert header == cli.GROUND_COLUMNS
    assert len(rows) == 3
    manifest = json.loads((out / "demo_manifest.json").read_text())
    assert manifest["config"]["model"] == "EDM"
    # byte-identical re-run
    first = (out / "demo.csv").read_bytes()
    assert run_cli(["run", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "demo.csv").read_bytes() == first


def test_run_override(tmp_path):
    cfg = {"model": "EDM", "params": {"omega0": 1.0, "N": 2, "g": 0.3}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert run_cli(["run", "--config", str(path), "--out", str(out),
                    "--override", "params.g=0.6"]) == 0
    _, rows = read_csv(out / "run.csv")
    assert float(rows[0][0]) == 0.6


def test_run_schema_violations_exit_2(tmp_path, capsys):
    bad = [
        {"model": "EDM", "params": {"omega0": 1.0}, "sweep": []},
        {"model": "EDM", "params": {}},
        {"model": "Nonsense", "params": {"omega0": 1.0}},
        {"model": "EDM", "params": {"omega0": 1.0},
         "sweep": [{"variable": "g", "min": 0, "max": 1, "points": 1}]},
        {"model": "EDM", "params": {"omega0": 1.0},
         "sweep": [{"variable": "volume", "min": 0, "max": 1, "points": 3}]},
    ]
    for i, cfg in enumerate(bad):
        path = tmp_path / f"bad{i}.json"
        path.write_text(json.dumps(cfg))
        assert run_cli(["run", "--config", str(path),
                        "--out", str(tmp_path)]) == 2


def test_dimension_guard_exit_3(tmp_path):
    assert run_cli(["ground", "--model", "CQEDFull", "--N", "13", "--g", "0.1",
                    "--lattice", "line_stack", "--nx", "13", "--d", "30",
                    "--out", str(tmp_path)]) == 3


def test_unwritable_path_exit_4():
    assert run_cli(["geometry", "--lattice", "line_stack", "--nx", "2",
                    "--d", "20", "--out", "/proc/definitely/not/writable"]) == 4


def test_workers_env_default(monkeypatch):
    monkeypatch.setenv("CAVITY_VACUA_WORKERS", "3")
    assert cli._default_workers() == 3
    monkeypatch.setenv("CAVITY_VACUA_WORKERS", "junk")
    assert cli._default_workers() == 1


def test_phase_diagram_small(tmp_path):
    out = tmp_path / "pd"
    assert run_cli(["phase-diagram", "--omega0", "1", "--N", "2",
                    "--alpha-min", "0.05", "--alpha-max", "2.0",
                    "--alpha-points", "8", "--eps-min", "-0.4",
                    "--eps-max", "0.2", "--eps-points", "2",
                    "--out", str(out)]) == 0
    header, rows = read_csv(out / "phase_diagram.csv")
    assert header == cli.GROUND_COLUMNS + ["phase"]
    assert len(rows) == 16
    labels = {r[-1] for r in rows}
    assert labels <= {"normal", "superradiant", "subradiant"}
