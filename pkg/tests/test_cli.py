"""Command-line surface: outputs, manifests, replay and exit codes."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import pytest

from rsc_cli import RunManifest, build_parser, parse_and_dispatch
from rsc_experiment import LogicalErrorEstimate, table_to_csv
from rsc_noise import NoiseKind
from rsc_thresholds import EXIT_NO_CROSSING, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, THRESHOLD_REFERENCE

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def test_lattice_json_and_manifest(tmp_path, capsys):
    assert parse_and_dispatch(["lattice", "--distance", "5"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert len(data["data_qubits"]) == 25
    manifest = RunManifest.load(tmp_path / "rsc-lattice.manifest.json")
    assert manifest.subcommand == "lattice"
    assert list(manifest.outputs) == ["-"]


def test_schedule_census(capsys):
    assert parse_and_dispatch(["schedule", "--distance", "3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["fault_locations"]["total"] == 78


def test_noiseless_simulation(tmp_path):
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--distance", "3", "--p", "0", "--shots", "200", "--seed", "1", "--out", str(out)]
    assert parse_and_dispatch(argv) == EXIT_OK
    header, row = out.read_text(encoding="utf-8").splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert values["failures"] == "0"
    assert values["seed"] == "1"
    assert (tmp_path / "sim.csv.manifest.json").exists()


def test_replay_reproduces_and_detects_tampering(tmp_path):
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--distance", "3", "--p", "0.01", "--shots", "300", "--seed", "7", "--out", str(out)]
    assert parse_and_dispatch(argv) == EXIT_OK
    manifest_path = tmp_path / "sim.csv.manifest.json"
    assert parse_and_dispatch(["replay", "--manifest", str(manifest_path)]) == EXIT_OK
    assert parse_and_dispatch(["replay", "--manifest", str(manifest_path), "--workers", "2"]) == EXIT_OK

    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    data["outputs"][str(out)] = "0" * 64
    manifest_path.write_text(json.dumps(data), encoding="utf-8")
    assert parse_and_dispatch(["replay", "--manifest", str(manifest_path)]) == EXIT_RUNTIME


def test_missing_seed_is_drawn_and_recorded(tmp_path, capsys):
    argv = ["freqplan", "--distance", "3", "--samples", "5", "--out", "plan.csv"]
    assert parse_and_dispatch(argv) == EXIT_OK
    err = capsys.readouterr().err
    printed = next(line for line in err.splitlines() if line.startswith("seed: "))
    manifest = RunManifest.load(tmp_path / "plan.csv.manifest.json")
    assert manifest.seed == int(printed.split()[1])
    assert manifest.argv[-2:] == ["--seed", str(manifest.seed)]


@pytest.mark.parametrize(
    "argv",
    [
        ["lattice", "--distance", "4"],
        ["lattice", "--distance", "3", "--colour"],
        ["simulate", "--distance", "3", "--seed", "1"],
        ["simulate", "--distance", "3", "--p", "1.5", "--seed", "1"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv):
    assert parse_and_dispatch(argv) == EXIT_USAGE


def test_unknown_config_key(tmp_path):
    (tmp_path / "scan.toml").write_text("[threshold]\ndistances = [3]\ncolour = 'red'\n", encoding="utf-8")
    assert parse_and_dispatch(["threshold", "--config", "scan.toml", "--seed", "1"]) == EXIT_USAGE


def test_fit_from_csv_without_crossing(tmp_path):
    table = [
        LogicalErrorEstimate(NoiseKind.CIRCUIT_LEVEL, d, p, None, d, 10**6, int(10**6 * 0.01 * (p / 0.01) ** ((d + 1) / 2)), 0)
        for d in (3, 5)
        for p in (0.001, 0.002, 0.004)
    ]
    (tmp_path / "scan.csv").write_text(table_to_csv(table), encoding="utf-8")
    assert parse_and_dispatch(["threshold", "--from-csv", "scan.csv", "--out", "refit.csv"]) == EXIT_NO_CROSSING
    assert (tmp_path / "refit.csv").read_text(encoding="utf-8") == table_to_csv(table)


def test_config_with_flag_override(tmp_path):
    (tmp_path / "scan.toml").write_text(
        "[threshold]\n"
        "distances = [1, 3]\n"
        "p_min = 0.05\n"
        "p_max = 0.2\n"
        "p_count = 3\n"
        "shots = 400\n"
        'model = "code-capacity"\n'
        "seed = 5\n",
        encoding="utf-8",
    )
    code = parse_and_dispatch(["threshold", "--config", "scan.toml", "--shots", "200", "--out", "scan.csv"])
    assert code in (EXIT_OK, EXIT_NO_CROSSING)
    manifest = RunManifest.load(tmp_path / "scan.csv.manifest.json")
    assert manifest.config["shots"] == 200
    assert manifest.config["rates"] == [0.05, 0.1, 0.2]
    assert manifest.seed == 5
    rows = (tmp_path / "scan.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 1 + 2 * 3


def test_decode_files_written_by_simulate(tmp_path, capsys):
    argv = [
        "simulate", "--distance", "3", "--p", "0.02", "--shots", "20", "--seed", "2",
        "--emit-graph", "graph.json", "--emit-events", "events.json", "--events-shot", "3", "--out", "sim.csv",
    ]
    assert parse_and_dispatch(argv) == EXIT_OK
    capsys.readouterr()
    assert parse_and_dispatch(["decode", "--graph", "graph.json", "--events", "events.json"]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["parity"] in (0, 1)
    assert result["total_weight"] >= 0


def test_decode_rejects_missing_files():
    assert parse_and_dispatch(["decode", "--graph", "nope.json", "--events", "nope.json"]) == EXIT_RUNTIME


def test_freqplan_csv_ends_with_summary(capsys):
    assert parse_and_dispatch(["freqplan", "--distance", "3", "--samples", "20", "--seed", "1", "--sigma-mhz", "100"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "sample,pair,condition,detuning_mhz"
    assert lines[-1].startswith("summary,")


def _help_lines(parser):
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    lines = []
    for choice in sub._choices_actions:
        lines.append(f"{choice.dest}: {choice.help}")
        for a in sub.choices[choice.dest]._actions:
            if a.dest != "help":
                lines.append(f"  {', '.join(a.option_strings)}: {a.help}")
    return lines


def test_help_text_matches_golden_file():
    golden = (DATA / "cli_help.txt").read_text(encoding="utf-8").splitlines()
    assert _help_lines(build_parser()) == golden


def test_threshold_replay_with_workers(tmp_path):
    argv = [
        "threshold", "--distances", "1,3", "--rates", "0.05,0.1", "--model", "code-capacity",
        "--shots", "300", "--seed", "3", "--out", "scan.csv",
    ]
    assert parse_and_dispatch(argv) in (EXIT_OK, EXIT_NO_CROSSING)
    manifest = str(tmp_path / "scan.csv.manifest.json")
    assert parse_and_dispatch(["replay", "--manifest", manifest, "--workers", "2"]) == EXIT_OK
    assert parse_and_dispatch(["replay", "--manifest", manifest, "--workers", "3"]) == EXIT_OK


def test_freqplan_replay_with_workers(tmp_path):
    argv = ["freqplan", "--distance", "5", "--samples", "50", "--seed", "2", "--sigma-mhz", "100", "--out", "plan.csv"]
    assert parse_and_dispatch(argv) == EXIT_OK
    manifest = str(tmp_path / "plan.csv.manifest.json")
    assert parse_and_dispatch(["replay", "--manifest", manifest]) == EXIT_OK
    assert parse_and_dispatch(["replay", "--manifest", manifest, "--workers", "2"]) == EXIT_OK


def test_x_basis_memory(tmp_path):
    argv = ["simulate", "--distance", "3", "--basis", "X", "--p", "0", "--shots", "100", "--seed", "1", "--per-shot", "--out", "x.csv"]
    assert parse_and_dispatch(argv) == EXIT_OK
    rows = (tmp_path / "x.csv").read_text(encoding="utf-8").splitlines()[1:]
    assert len(rows) == 100
    assert all(row.endswith(",0") for row in rows)

    argv = ["simulate", "--distance", "3", "--basis", "X", "--p", "0.001", "--shots", "300", "--seed", "4", "--emit", "json", "--out", "x.json"]
    assert parse_and_dispatch(argv) == EXIT_OK
    result = json.loads((tmp_path / "x.json").read_text(encoding="utf-8"))
    assert int(result["failures"]) < 30
    manifest = tmp_path / "x.json.manifest.json"
    assert RunManifest.load(manifest).config["basis"] == "X"
    assert parse_and_dispatch(["replay", "--manifest", str(manifest), "--workers", "2"]) == EXIT_OK


def test_circuit_fit_records_reference(tmp_path, capsys):
    table = [
        LogicalErrorEstimate(NoiseKind.CIRCUIT_LEVEL, d, p, None, d, 10**8, round(10**8 * 0.01 * (p / 0.01) ** ((d + 1) / 2)), 0)
        for d in (3, 5)
        for p in (0.005, 0.008, 0.0125, 0.02)
    ]
    (tmp_path / "scan.csv").write_text(table_to_csv(table), encoding="utf-8")
    assert parse_and_dispatch(["threshold", "--from-csv", "scan.csv", "--out", "refit.csv"]) == EXIT_OK
    assert "reference 0.0067" in capsys.readouterr().err
    fit = RunManifest.load(tmp_path / "refit.csv.manifest.json").config["fit"]
    assert fit["reference"] == THRESHOLD_REFERENCE
    assert fit["p_th"] == pytest.approx(0.01, rel=1e-3)
