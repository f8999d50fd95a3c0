import csv
import io
import json

import pytest

from trottercost import pauli
from trottercost.cli import main

HUBBARD = ["--system", "hubbard", "--lengths", "2", "2"]


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.mark.parametrize(
    "argv",
    [
        ["gates", "--system", "hubbard", "--lengths", "5", "5", "--step", "split",
         "--basis", "FFFT"],
        ["gates", *HUBBARD, "--ancillae", "-1"],
        ["gates", "--system", "jellium", "--lengths", "2", "2", "--eta", "9"],
        ["gates"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_config_file_exits_2(tmp_path):
    path = write_config(tmp_path, {"system": {"kind": "hubbard", "lengths": [4, 4]}, "bogus": 1})
    assert main(["run", "--config", path]) == 2


def test_run_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, {"system": {"kind": "hubbard", "lengths": [2, 2], "tau": 1.0,
                                             "u": 4.0}})
    outputs = []
    for i in range(2):
        out = tmp_path / f"report{i}.json"
        assert main(["run", "--config", cfg, "--output", str(out)]) == 0
        outputs.append(out.read_bytes())
        assert json.loads((tmp_path / f"report{i}.json.timing.json").read_text())["wall_seconds"] >= 0
    assert outputs[0] == outputs[1]
    report = json.loads(outputs[0])
    assert report["config_hash"] and report["totals"]["t"] > 0


def test_run_writes_csv_row(tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "row.csv"
    argv = ["run", *HUBBARD, "--p", "1e-3", "--p", "1e-4", "--output", str(out),
            "--csv", str(table)]
    assert main(argv) == 0
    rows = list(csv.reader(io.StringIO(table.read_text())))
    assert len(rows) == 2
    assert len(rows[1]) == 5 + 2 * 2
    assert rows[1][0] == "FH 2x2"
    assert rows[1][5][-1] in "abc"


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.strip().splitlines()[-1].endswith("checks passed")
    assert "FAIL" not in out


def test_verify_catches_broken_phase(monkeypatch, capsys):
    real = pauli._string_product

    def shifted(a, b):
        k, s = real(a, b)
        return (k + 1) % 4, s

    monkeypatch.setattr(pauli, "_string_product", shifted)
    assert main(["verify", "--scope", "pauli"]) == 3
    assert "FAIL" in capsys.readouterr().out


def test_hamiltonian_outputs(capsys):
    assert main(["hamiltonian", *HUBBARD, "--format", "text"]) == 0
    text = capsys.readouterr().out
    assert "Z0" in text
    assert main(["hamiltonian", *HUBBARD]) == 0
    assert json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("command", ["ordering", "trotter-norm", "gates"])
def test_inspection_subcommands_emit_json(command, capsys):
    assert main([command, *HUBBARD]) == 0
    assert isinstance(json.loads(capsys.readouterr().out), dict)


def test_optimize_with_overrides(capsys):
    argv = ["optimize", *HUBBARD, "--w", "10", "--nr", "100", "--nd", "500", "--delta-e", "0.01"]
    assert main(argv) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["totals"]["t"] > 0
    assert main([*argv, "--csv"]) == 0
    assert capsys.readouterr().out.count("\n") == 2


def test_estimate_round_trip(tmp_path, capsys):
    out = tmp_path / "opt.json"
    assert main(["optimize", *HUBBARD, "--output", str(out)]) == 0
    assert main(["estimate", "--input", str(out), "--p", "1e-3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["estimates"][0]["physical_qubits"] > 0
    argv = ["estimate", "--logical", "100", "--t", "1000000", "--toffoli", "1000", "--csv"]
    assert main(argv) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[1][:3] == ["custom", "0", "100"]


def test_estimate_missing_inputs_exit_2(capsys):
    assert main(["estimate", "--t", "100"]) == 2
    assert main(["estimate", "--logical", "10", "--t", "1", "--toffoli", "1", "--p", "0.5"]) == 2
