"""
CLI Testing Script
Tests the birb subcommands end to end through main(), including exit codes

Run with: pytest scripts/test_cli.py
"""

import json
from pathlib import Path

import pytest

from birb.cli.main import main
from birb.noise.models import global_depolarizing

CONFIG_DIR = Path(__file__).parent.parent / "configs"

DESIGN = {
    "n": 2,
    "depths": [0, 1, 2, 4, 8],
    "K": 3,
    "omega": {"xi": 0.5, "gate_set": ["XPI2", "YPI2"], "connectivity": "all-to-all"},
    "seed": 17,
}


def _write(path: Path, data) -> str:
    path.write_text(json.dumps(data))
    return str(path)


def _read(path: Path):
    return json.loads(path.read_text())


def test_plan_from_flags(tmp_path):
    out = tmp_path / "plan.json"
    assert main(["plan", "--nu", "0.05", "--alpha", "0.1", "--out", str(out)]) == 0
    assert _read(out)["K"] == 738


def test_plan_from_config(tmp_path):
    out = tmp_path / "plan.json"
    assert main(["plan", "--config", str(CONFIG_DIR / "plan.json"), "--out", str(out)]) == 0
    report = _read(out)
    assert report["K"] == 738
    assert report["two_depth"] is None


def test_plan_to_stdout(capsys):
    assert main(["plan", "--gamma-bar", "0.99", "--d", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["K"] == 903


def test_plan_to_stdout_with_dash(capsys):
    assert main(["plan", "--gamma-bar", "0.99", "--d", "10", "--out", "-"]) == 0
    assert json.loads(capsys.readouterr().out)["K"] == 903


def test_design_is_deterministic(tmp_path):
    config = _write(tmp_path / "design.json", DESIGN)
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["design", "--config", config, "--out", str(first)]) == 0
    assert main(["design", "--config", config, "--out", str(second)]) == 0
    assert first.read_text() == second.read_text()
    records = [json.loads(line) for line in first.read_text().splitlines()]
    assert len(records) == 15
    assert records[0]["id"] == "d0-k0"
    assert records[0]["metadata"]["seed"] == 17


def test_design_seed_override(tmp_path):
    config = _write(tmp_path / "design.json", DESIGN)
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    main(["design", "--config", config, "--out", str(first)])
    main(["design", "--config", config, "--seed", "18", "--out", str(second)])
    assert first.read_text() != second.read_text()


def test_simulate_and_fit(tmp_path):
    experiment = {"design": DESIGN, "noise": {"depolarizing": 0.95}, "engine": "dense-exact", "N": 0}
    config = _write(tmp_path / "experiment.json", experiment)
    dataset = tmp_path / "data.jsonl.gz"
    report = tmp_path / "fit.json"
    table = tmp_path / "fit.csv"

    assert main(["simulate", "--config", config, "--out", str(dataset)]) == 0
    assert main(["fit", "--dataset", str(dataset), "--bootstrap", "0", "--out", str(report), "--csv", str(table)]) == 0

    fit = _read(report)
    assert fit["p"] == pytest.approx(0.95, abs=1e-6)
    assert fit["r_omega"] == pytest.approx(15 / 16 * 0.05, abs=1e-6)
    assert fit["seed"] == 17
    assert table.read_text().splitlines()[0] == "d,fbar,sigma"


def test_simulate_circuit_batch_with_noise_file(tmp_path):
    circuits = tmp_path / "circuits.jsonl"
    noise = tmp_path / "noise.json"
    dataset = tmp_path / "data.csv"
    global_depolarizing(0.9).save(noise)

    main(["design", "--config", _write(tmp_path / "design.json", DESIGN), "--out", str(circuits)])
    code = main(
        [
            "simulate",
            "--circuits",
            str(circuits),
            "--noise",
            str(noise),
            "--engine",
            "frame",
            "-N",
            "100",
            "--format",
            "csv",
            "--out",
            str(dataset),
        ]
    )
    assert code == 0
    lines = dataset.read_text().splitlines()
    assert len(lines) == 16
    assert "success_sum" in lines[0]


def test_fit_with_bootstrap(tmp_path):
    experiment = {"design": DESIGN, "noise": {"depolarizing": 0.9}, "engine": "frame", "N": 200}
    config = _write(tmp_path / "experiment.json", experiment)
    dataset = tmp_path / "data.jsonl"
    report = tmp_path / "fit.json"
    main(["simulate", "--config", config, "--out", str(dataset)])
    assert main(["fit", "--dataset", str(dataset), "--bootstrap", "100", "--out", str(report)]) == 0
    assert set(_read(report)["sigma"]) == {"A", "p", "r_omega"}


def test_oracle_command(tmp_path):
    config = {
        "n": 2,
        "omega": {"xi": 0.5},
        "depths": [0, 1, 2, 4],
        "K": 2,
        "seed": 3,
        "noise": {"depolarizing": 0.9},
    }
    out = tmp_path / "oracle.json"
    assert main(["oracle", "--config", _write(tmp_path / "oracle.json", config), "--out", str(out)]) == 0
    assert _read(out)["epsilon"] == pytest.approx(15 / 16 * 0.1, abs=1e-6)


def test_lspec_command(tmp_path):
    config = {"n": 1, "omega": {"xi": 0.0, "gate_set": ["I", "XPI2", "YPI2"]}, "noise": {"depolarizing": 0.9}}
    out = tmp_path / "lspec.json"
    assert main(["lspec", "--config", _write(tmp_path / "lspec.json", config), "--out", str(out)]) == 0
    report = _read(out)
    assert report["lambda"] == pytest.approx(0.9, abs=1e-8)
    assert report["unit_eigenvalue_count"] == 1


def test_scramble_command(tmp_path):
    config = {"n": 2, "k": 0, "omega": {"xi": 0.5}, "pauli_pairs": 3, "circuits": 2, "probes": None, "seed": 1}
    out = tmp_path / "scramble.json"
    assert main(["scramble", "--config", _write(tmp_path / "scramble.json", config), "--out", str(out)]) == 0
    report = _read(out)
    assert len(report["estimates"]) == 3
    assert report["samples"]["probes"] == 16


def test_schema_command(tmp_path):
    out = tmp_path / "schema.json"
    assert main(["schema", "design", "--out", str(out)]) == 0
    assert "properties" in _read(out)["design"]


# -- exit codes -------------------------------------------------------------------


def test_invalid_config_exits_2(tmp_path):
    config = _write(tmp_path / "design.json", dict(DESIGN, K=0))
    assert main(["design", "--config", config, "--out", str(tmp_path / "c.jsonl")]) == 2


def test_missing_file_exits_2(tmp_path):
    assert main(["fit", "--dataset", str(tmp_path / "missing.jsonl")]) == 2


def test_dense_capability_exits_3(tmp_path):
    experiment = {"design": dict(DESIGN, n=7, depths=[0, 1]), "engine": "dense", "N": 10}
    config = _write(tmp_path / "experiment.json", experiment)
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "d.jsonl")]) == 3


def test_single_depth_fit_exits_4(tmp_path):
    rows = [{"id": f"d3-k{i}", "n": 1, "d": 3, "target": "+Z", "N": 10, "success_sum": 8} for i in range(4)]
    dataset = tmp_path / "data.jsonl"
    dataset.write_text("".join(json.dumps(row) + "\n" for row in rows))
    report = tmp_path / "fit.json"
    assert main(["fit", "--dataset", str(dataset), "--bootstrap", "0", "--out", str(report)]) == 4
    assert _read(report)["fit_status"] == "failed"


def test_csv_rows_are_written_in_chunks():
    import io

    import pandas as pd

    from birb.cli.main import _rows_to_csv
    from birb.engines.runner import DatasetRow

    rows = [DatasetRow(id=f"d1-k{i}", n=2, d=1, target="+ZZ", N=10, success_sum=2 * (i % 6) - 2, seed=3) for i in range(10)]
    stream = io.StringIO()
    assert _rows_to_csv(iter(rows), stream, chunk_rows=4) == 10
    text = stream.getvalue()
    assert text.count("success_sum") == 1
    table = pd.read_csv(io.StringIO(text))
    assert table["id"].tolist() == [row.id for row in rows]
    assert table["success_sum"].tolist() == [row.success_sum for row in rows]


def test_csv_of_no_rows_is_a_header():
    import io

    from birb.cli.main import _rows_to_csv

    stream = io.StringIO()
    assert _rows_to_csv(iter([]), stream) == 0
    assert stream.getvalue().splitlines() == ["id,n,d,target,N,success_sum,exact,seed,schema_version"]
