#!/usr/bin/env python3
"""
RSC Memory CLI

Single entry point for the rotated-surface-code memory tools. Every
subcommand writes its machine-readable payload (JSON or CSV) to --out or to
stdout, a short status summary to stderr, verbose output to a log file, and a
run manifest recording the resolved configuration, seed, tool version and a
SHA-256 checksum of every output. `replay` re-runs a manifest and checks the
outputs are byte-identical.

Usage:
    python rsc_cli.py lattice --distance 5 --emit json
    python rsc_cli.py schedule --distance 3 --emit json
    python rsc_cli.py simulate --distance 3 --model circuit --p 0.001 --shots 10000 --seed 1 --emit csv
    python rsc_cli.py threshold --config scan.toml --workers 4 --out scan.csv
    python rsc_cli.py decode --graph graph.json --events events.json
    python rsc_cli.py freqplan --distance 5 --sigma-mhz 280 --samples 10000 --seed 3 --emit csv
    python rsc_cli.py replay --manifest scan.csv.manifest.json

Exit codes:
    0 - success
    2 - usage error (bad flags, parameters or configuration file)
    3 - runtime error (simulation, decoding, I/O, replay mismatch)
    4 - threshold fit found no crossing
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import secrets
import sys
import tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from rsc_circuit import build_round_schedule, schedule_to_dict, validate_schedule
from rsc_decoder import DecoderError, build_matching_graph, decode_batch, graph_from_dict, graph_to_dict, mwpm
from rsc_experiment import (
    ExperimentConfig,
    ExperimentError,
    ExperimentPoint,
    NoCrossingError,
    estimate_logical_error_rate,
    fit_threshold,
    log_spaced_rates,
    table_from_csv,
    table_to_csv,
    threshold_scan,
)
from rsc_freqplan import (
    FrequencyPlanError,
    assign_classes,
    collision_rows,
    detect_collisions,
    disorder_sigma,
    sample_frequency_batch,
    validate_plan,
)
from rsc_lattice import Basis, LatticeError, build_bus_layout, build_lattice, lattice_to_dict, validate_lattice
from rsc_noise import NoiseError, NoiseKind, NoiseModel
from rsc_output_utils import RscOutput
from rsc_sim import DetectionEventSet, SimulationError, detector_stabilizers, simulate_batch
from rsc_thresholds import (
    DEFAULT_FREQ_SAMPLES,
    DEFAULT_SHOTS,
    DISORDER_SIGMA_MHZ,
    EXIT_NO_CROSSING,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    NOISE_PRESETS,
    THRESHOLD_REFERENCE,
)
from rsc_validation_common import format_report

__version__ = "0.1.0"

logger = logging.getLogger(__name__)

STDOUT = "-"

# Keys accepted in the [threshold] table of a config file
CONFIG_KEYS = frozenset(
    {"distances", "rates", "p_min", "p_max", "p_count", "shots", "rounds", "model", "q", "seed", "workers", "basis", "weights", "out"}
)


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration files."""


# =============================================================================
# Manifest
# =============================================================================


@dataclass
class RunManifest:
    """Everything needed to reproduce one run.

    ``argv`` is the resolved command line (a drawn seed included); ``outputs``
    maps each output name ("-" for stdout) to its SHA-256.
    """

    subcommand: str
    argv: list[str]
    config: dict[str, Any]
    seed: int | None
    tool_version: str = __version__
    outputs: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path: Path) -> RunManifest:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return cls(
                subcommand=data["subcommand"],
                argv=list(data["argv"]),
                config=dict(data["config"]),
                seed=data["seed"],
                tool_version=data.get("tool_version", ""),
                outputs=dict(data["outputs"]),
            )
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc


def sha256(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


@dataclass
class RunResult:
    """Outputs of one subcommand run, keyed by destination ("-" is stdout)."""

    outputs: dict[str, bytes]
    config: dict[str, Any]
    seed: int | None = None
    status: str = "DONE"
    message: str = ""
    exit_code: int = EXIT_OK


# =============================================================================
# Argument parsing
# =============================================================================


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=[k.value for k in NoiseKind], help="Noise model (default: circuit)")
    p.add_argument("--p", type=float, help="Physical error rate")
    p.add_argument("--q", type=float, help="Measurement-flip rate for the phenom model (default: p)")
    p.add_argument("--preset", choices=sorted(NOISE_PRESETS), help="Circuit-level rate from a named gate-error figure")
    p.add_argument("--reset-flip", type=float, default=0.0, help="Ancilla reset-flip probability (circuit model)")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="Base seed; drawn and printed when omitted")
    p.add_argument("--workers", type=int, help="Worker processes (default: 1)")
    p.add_argument("--basis", choices=[b.value for b in Basis], help="Memory basis (default: Z)")
    p.add_argument("--weights", choices=["log", "unit"], help="Matching edge weights (default: log)")


def _add_output_flags(p: argparse.ArgumentParser, emit: list[str]) -> None:
    p.add_argument("--emit", choices=emit, default=emit[0], help=f"Output format (default: {emit[0]})")
    p.add_argument("--out", type=Path, help="Output file (default: stdout)")
    p.add_argument("--manifest", type=Path, help="Manifest path (default: <out>.manifest.json or rsc-<subcommand>.manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsc_cli.py",
        description="Rotated surface code memory: lattice, schedule, simulation, decoding, thresholds, frequency plans",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Dump the d=5 lattice with its bus tiling
    python rsc_cli.py lattice --distance 5 --emit json

    # Circuit-level memory at p=1e-3, 10^4 shots
    python rsc_cli.py simulate --distance 3 --model circuit --p 0.001 --shots 10000 --seed 1

    # Threshold scan from a config file, four workers
    python rsc_cli.py threshold --config scan.toml --workers 4 --out scan.csv

    # Re-run a manifest and check the outputs match
    python rsc_cli.py replay --manifest scan.csv.manifest.json
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="Dump lattice geometry, logicals and bus tiling")
    p.add_argument("--distance", type=int, required=True, help="Odd code distance")
    _add_output_flags(p, ["json"])

    p = sub.add_parser("schedule", help="Dump the extraction cycle and its fault-location census")
    p.add_argument("--distance", type=int, required=True, help="Odd code distance")
    _add_output_flags(p, ["json"])

    p = sub.add_parser("simulate", help="Run a memory experiment and score it")
    p.add_argument("--distance", type=int, required=True, help="Odd code distance")
    p.add_argument("--rounds", type=int, help="Extraction rounds per shot (default: d)")
    p.add_argument("--shots", type=int, default=DEFAULT_SHOTS, help=f"Shots (default: {DEFAULT_SHOTS})")
    _add_model_flags(p)
    _add_run_flags(p)
    p.add_argument("--per-shot", action="store_true", help="Emit one CSV row per shot instead of the aggregate")
    p.add_argument("--emit-graph", type=Path, help="Also write the matching graph JSON")
    p.add_argument("--emit-events", type=Path, help="Also write the detection events JSON of one shot")
    p.add_argument("--events-shot", type=int, default=0, help="Shot whose events --emit-events writes (default: 0)")
    _add_output_flags(p, ["csv", "json"])

    p = sub.add_parser("threshold", help="Scan (d, p) and fit the threshold crossing")
    p.add_argument("--config", type=Path, help="TOML file with a [threshold] table; flags override it")
    p.add_argument("--distances", type=_int_list, help="Comma-separated odd distances")
    p.add_argument("--rates", type=_float_list, help="Comma-separated physical rates")
    p.add_argument("--p-min", type=float, help="Lowest rate of a log-spaced grid")
    p.add_argument("--p-max", type=float, help="Highest rate of a log-spaced grid")
    p.add_argument("--p-count", type=int, help="Number of log-spaced rates")
    p.add_argument("--rounds", type=int, help="Rounds per shot (default: d)")
    p.add_argument("--shots", type=int, help=f"Shots per point (default: {DEFAULT_SHOTS})")
    p.add_argument("--model", choices=[k.value for k in NoiseKind], help="Noise model (default: circuit)")
    p.add_argument("--q", type=float, help="Measurement-flip rate for the phenom model (default: p)")
    _add_run_flags(p)
    p.add_argument("--from-csv", type=Path, help="Fit an existing scan CSV instead of running one")
    _add_output_flags(p, ["csv"])

    p = sub.add_parser("decode", help="Decode one detection-event file against a matching graph")
    p.add_argument("--graph", type=Path, required=True, help="Matching graph JSON (rsc.graph/1)")
    p.add_argument("--events", type=Path, required=True, help="Detection events JSON (rsc.events/1)")
    _add_output_flags(p, ["json"])

    p = sub.add_parser("freqplan", help="Five-class frequency plan and collision yield")
    p.add_argument("--distance", type=int, required=True, help="Odd code distance")
    p.add_argument("--sigma-mhz", type=float, default=DISORDER_SIGMA_MHZ, help=f"Junction disorder (default: {DISORDER_SIGMA_MHZ})")
    p.add_argument("--sigma-interpretation", choices=["std", "range"], default="std", help="Read --sigma-mhz as std or full range (default: std)")
    p.add_argument("--samples", type=int, default=DEFAULT_FREQ_SAMPLES, help=f"Disorder samples (default: {DEFAULT_FREQ_SAMPLES})")
    p.add_argument("--seed", type=int, help="Base seed; drawn and printed when omitted")
    p.add_argument("--w1", type=float, help="C1 window, MHz (default: 17)")
    p.add_argument("--w2", type=float, help="C2 window, MHz (default: 4)")
    p.add_argument("--w3", type=float, help="C3 window, MHz (default: 4)")
    _add_output_flags(p, ["csv", "json"])

    p = sub.add_parser("replay", help="Re-run a manifest and compare output checksums")
    p.add_argument("--manifest", type=Path, required=True, help="Manifest written by an earlier run")
    p.add_argument("--workers", type=int, help="Override the recorded worker count")

    return parser


# =============================================================================
# Helpers
# =============================================================================


def _json_bytes(data: Any) -> bytes:
    return (json.dumps(data, indent=2) + "\n").encode("utf-8")


def _csv_bytes(rows: list[dict[str, str]], columns: list[str]) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _destination(args: argparse.Namespace) -> str:
    return str(args.out) if getattr(args, "out", None) else STDOUT


def _resolve_seed(args: argparse.Namespace, argv: list[str]) -> int:
    """The run's seed; a drawn seed is appended to ``argv`` so the manifest replays it."""
    if args.seed is not None:
        return int(args.seed)
    seed = secrets.randbits(32)
    print(f"seed: {seed}", file=sys.stderr)
    argv.extend(["--seed", str(seed)])
    return seed


def _noise_model(args: argparse.Namespace) -> NoiseModel:
    if args.preset:
        return NoiseModel.from_preset(args.preset)
    if args.p is None:
        raise ConfigError("--p or --preset is required")
    kind = NoiseKind(args.model or NoiseKind.CIRCUIT_LEVEL.value)
    if kind is NoiseKind.PHENOMENOLOGICAL:
        return NoiseModel.phenomenological(args.p, args.q)
    if kind is NoiseKind.CIRCUIT_LEVEL:
        return NoiseModel.circuit_level(args.p, args.reset_flip)
    return NoiseModel.code_capacity(args.p)


def load_config(path: Path) -> dict[str, Any]:
    """The [threshold] table of a TOML config file."""
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    table = data.get("threshold", data)
    unknown = set(table) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return dict(table)


# =============================================================================
# Subcommands
# =============================================================================


def run_lattice(args: argparse.Namespace, argv: list[str], out: RscOutput) -> RunResult:
    lattice = build_lattice(args.distance)
    layout = build_bus_layout(lattice)
    report = validate_lattice(lattice)
    out.log(format_report(report))
    payload = lattice_to_dict(lattice, layout)
    payload["validation"] = report.to_dict()
    return RunResult(
        {_destination(args): _json_bytes(payload)},
        {"distance": args.distance},
        message=f"d={lattice.distance}: {lattice.n_data} data qubits, {len(lattice.stabilizers)} stabilizers",
    )


def run_schedule(args: argparse.Namespace, argv: list[str], out: RscOutput) -> RunResult:
    lattice = build_lattice(args.distance)
    schedule = build_round_schedule(lattice)
    report = validate_schedule(lattice, schedule)
    out.log(format_report(report))
    payload = schedule_to_dict(schedule)
    payload["validation"] = report.to_dict()
    return RunResult(
        {_destination(args): _json_bytes(payload)},
        {"distance": args.distance},
        message=f"d={lattice.distance}: {len(schedule.time_steps)} steps, {payload['fault_locations']['total']} fault locations",
    )


def run_simulate(args: argparse.Namespace, argv: list[str], out: RscOutput) -> RunResult:
    seed = _resolve_seed(args, argv)
    model = _noise_model(args)
    basis = Basis(args.basis or "Z")
    weights = args.weights or "log"
    rounds = args.rounds or args.distance
    point = ExperimentPoint(model, args.distance, rounds, args.shots, seed, basis, weights)
    config = {"distance": args.distance, "rounds": rounds, "shots": args.shots, "model": model.to_dict(), "basis": basis.value, "weights": weights}
    outputs: dict[str, bytes] = {}

    lattice = build_lattice(args.distance)
    schedule = build_round_schedule(lattice)
    graph = None
    if args.emit_graph or args.per_shot or args.emit_events:
        graph = build_matching_graph(lattice, schedule, model, rounds, basis, weights)
        if args.emit_graph:
            outputs[str(args.emit_graph)] = _json_bytes(graph_to_dict(graph))
    if args.emit_events:
        shot = args.events_shot
        batch = simulate_batch(lattice, schedule, model, rounds, seed=seed, shots=range(shot, shot + 1), basis=basis)
        events = DetectionEventSet.from_matrix(basis, detector_stabilizers(lattice, basis), batch.detection_events()[0])
        outputs[str(args.emit_events)] = _json_bytes(events.to_dict())

    if args.per_shot:
        assert graph is not None
        batch = simulate_batch(lattice, schedule, model, rounds, seed=seed, shots=range(args.shots), basis=basis)
        events = batch.detection_events()
        corrections = decode_batch(graph, events)
        flips = batch.logical_flips()
        rows = [
            {"shot": str(i), "defects": str(int(events[i].sum())), "correction": str(int(c)), "failure": str(int(f ^ c))}
            for i, (c, f) in enumerate(zip(corrections.tolist(), flips.tolist()))
        ]
        outputs[_destination(args)] = _csv_bytes(rows, ["shot", "defects", "correction", "failure"])
        failures = sum(int(r["failure"]) for r in rows)
        return RunResult(outputs, config, seed, message=f"{failures}/{args.shots} logical failures")

    est = estimate_logical_error_rate(point, workers=args.workers or 1)
    out.log_json(est.to_row(), label="estimate")
    if args.emit == "json":
        outputs[_destination(args)] = _json_bytes(est.to_row())
    else:
        outputs[_destination(args)] = table_to_csv([est]).encode("utf-8")
    return RunResult(outputs, config, seed, message=f"{est.failures}/{est.shots} logical failures, p_L={est.p_L:.4g}")


def _threshold_config(args: argparse.Namespace, argv: list[str]) -> tuple[ExperimentConfig, int, int]:
    file_cfg = load_config(args.config) if args.config else {}

    def pick(name: str, default: Any = None) -> Any:
        value = getattr(args, name, None)
        return value if value is not None else file_cfg.get(name, default)

    if args.seed is None and "seed" in file_cfg:
        args.seed = int(file_cfg["seed"])
    seed = _resolve_seed(args, argv)

    rates = pick("rates")
    if rates is None:
        p_min, p_max, p_count = pick("p_min"), pick("p_max"), pick("p_count")
        if p_min is None or p_max is None or p_count is None:
            raise ConfigError("give --rates or all of --p-min, --p-max, --p-count")
        rates = log_spaced_rates(float(p_min), float(p_max), int(p_count))
    distances = pick("distances")
    if not distances:
        raise ConfigError("give --distances or a distances key")

    out = pick("out")
    config = ExperimentConfig(
        distances=tuple(int(d) for d in distances),
        physical_rates=tuple(float(p) for p in rates),
        rounds=pick("rounds"),
        shots=int(pick("shots", DEFAULT_SHOTS)),
        seed=seed,
        model=NoiseKind(pick("model", NoiseKind.CIRCUIT_LEVEL.value)),
        q=pick("q"),
        basis=Basis(pick("basis", "Z")),
        weights=pick("weights", "log"),
        out=None,
    )
    if out is not None and args.out is None:
        args.out = Path(out)
    return config, seed, int(pick("workers", 1))


def run_threshold(args: argparse.Namespace, argv: list[str], out: RscOutput) -> RunResult:
    if args.from_csv:
        try:
            text = args.from_csv.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.from_csv}: {exc}") from exc
        table = table_from_csv(text)
        config: dict[str, Any] = {"from_csv": str(args.from_csv)}
        seed = None
    else:
        exp, seed, workers = _threshold_config(args, argv)
        out.log(f"scanning d={list(exp.distances)} p={list(exp.physical_rates)} shots={exp.shots} workers={workers}")
        table = threshold_scan(exp, workers=workers)
        config = {
            "distances": list(exp.distances),
            "rates": list(exp.physical_rates),
            "rounds": exp.rounds,
            "shots": exp.shots,
            "model": exp.model.value,
            "q": exp.q,
            "basis": exp.basis.value,
            "weights": exp.weights,
        }

    outputs = {_destination(args): table_to_csv(table).encode("utf-8")}
    try:
        fit = fit_threshold(table)
    except NoCrossingError as exc:
        out.log(str(exc))
        return RunResult(outputs, config, seed, status="NO-CROSSING", message=str(exc), exit_code=EXIT_NO_CROSSING)
    config["fit"] = fit.to_dict()
    message = f"p_th = {fit.p_th:.4g} +- {fit.uncertainty:.2g}"
    if table and all(e.model is NoiseKind.CIRCUIT_LEVEL for e in table):
        config["fit"]["reference"] = THRESHOLD_REFERENCE
        message += f" (circuit-level reference {THRESHOLD_REFERENCE:.2g})"
    out.log_json(config["fit"], label="fit")
    return RunResult(outputs, config, seed, message=message)


def run_decode(args: argparse.Namespace, argv: list[str], out: RscOutput) -> RunResult:
    try:
        graph = graph_from_dict(json.loads(args.graph.read_text(encoding="utf-8")))
        events = DetectionEventSet.from_dict(json.loads(args.events.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise DecoderError(f"cannot read decoder inputs: {exc}") from exc
    if events.stabilizer_ids != graph.stabilizer_ids or events.layers != graph.layers:
        raise DecoderError("events do not belong to this matching graph")
    matching = mwpm(graph, events.nodes())
    payload = {
        "parity": matching.parity,
        "weight": matching.weight,
        "total_weight": matching.total_weight,
        "pairs": [[a, None if b < 0 else b] for a, b in matching.pairs],
    }
    return RunResult(
        {_destination(args): _json_bytes(payload)},
        {"graph": str(args.graph), "events": str(args.events)},
        message=f"{len(events.defects)} defects, correction parity {matching.parity}",
    )


def run_freqplan(args: argparse.Namespace, argv: list[str], out: RscOutput) -> RunResult:
    seed = _resolve_seed(args, argv)
    if args.samples < 1:
        raise FrequencyPlanError(f"samples must be >= 1, got {args.samples}")
    lattice = build_lattice(args.distance)
    layout = build_bus_layout(lattice)
    plan = assign_classes(lattice, layout)
    report = validate_plan(lattice, layout, plan)
    out.log(format_report(report))
    if not report.is_valid:
        raise FrequencyPlanError(format_report(report))

    sigma = disorder_sigma(args.sigma_mhz, args.sigma_interpretation)
    windows = {k: v for k, v in (("C1", args.w1), ("C2", args.w2), ("C3", args.w3)) if v is not None}
    sampled = sample_frequency_batch(plan, sigma, seed, range(args.samples))
    collisions = detect_collisions(plan, sampled, windows)
    summary = collisions.summary()
    out.log_json(summary, label="collisions")

    if args.emit == "json":
        payload: bytes = _json_bytes({"plan": plan.to_dict(), "sigma_mhz": sigma, "seed": seed, **summary})
    else:
        payload = _csv_bytes(collision_rows(collisions), ["sample", "pair", "condition", "detuning_mhz"])
    config = {"distance": args.distance, "sigma_mhz": sigma, "samples": args.samples, "windows_mhz": summary["windows_mhz"]}
    return RunResult(
        {_destination(args): payload},
        config,
        seed,
        message=f"collision probability {collisions.probability:.4g} over {args.samples} samples",
    )


# =============================================================================
# Dispatch
# =============================================================================


def _execute(argv: list[str], out: RscOutput) -> tuple[argparse.Namespace, RunResult]:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers: dict[str, Callable[[], RunResult]] = {
        "lattice": lambda: run_lattice(args, argv, out),
        "schedule": lambda: run_schedule(args, argv, out),
        "simulate": lambda: run_simulate(args, argv, out),
        "threshold": lambda: run_threshold(args, argv, out),
        "decode": lambda: run_decode(args, argv, out),
        "freqplan": lambda: run_freqplan(args, argv, out),
    }
    return args, handlers[args.command]()


def _manifest_path(args: argparse.Namespace) -> Path:
    if args.manifest is not None:
        return Path(args.manifest)
    if getattr(args, "out", None):
        return Path(f"{args.out}.manifest.json")
    return Path(f"rsc-{args.command}.manifest.json")


def _write_outputs(outputs: dict[str, bytes]) -> None:
    for name, payload in outputs.items():
        if name == STDOUT:
            sys.stdout.write(payload.decode("utf-8"))
            sys.stdout.flush()
        else:
            path = Path(name)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload)


def replay(manifest_path: Path, workers: int | None, out: RscOutput) -> int:
    """Re-run a manifest; EXIT_OK iff every output checksum matches."""
    manifest = RunManifest.load(manifest_path)
    argv = list(manifest.argv)
    if workers is not None:
        if "--workers" in argv:
            i = argv.index("--workers")
            argv[i + 1] = str(workers)
        elif manifest.subcommand in ("simulate", "threshold"):
            argv += ["--workers", str(workers)]
    out.log(f"replaying: {' '.join(argv)}")
    _, result = _execute(argv, out)
    mismatched = [
        name for name, digest in manifest.outputs.items() if sha256(result.outputs.get(name, b"")) != digest
    ]
    missing = sorted(set(result.outputs) - set(manifest.outputs))
    if mismatched or missing:
        out.summary("MISMATCH", f"outputs differ: {', '.join(mismatched + missing)}")
        return EXIT_RUNTIME
    out.summary("DONE", f"{len(manifest.outputs)} output(s) reproduced byte-identically")
    return EXIT_OK


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    """Run one subcommand; returns the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in argv if not a.startswith("-")), "rsc")
    with RscOutput(f"rsc_{command}") as out:
        try:
            if command == "replay":
                args = build_parser().parse_args(argv)
                return replay(args.manifest, args.workers, out)
            args, result = _execute(argv, out)
            _write_outputs(result.outputs)
            manifest = RunManifest(
                subcommand=args.command,
                argv=argv,
                config=result.config,
                seed=result.seed,
                outputs={name: sha256(payload) for name, payload in result.outputs.items()},
            )
            path = _manifest_path(args)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(manifest.to_json(), encoding="utf-8")
            out.log_json(asdict(manifest), label="manifest")
            out.summary(result.status, result.message, f"Manifest: {path}")
            return result.exit_code
        except SystemExit as exc:
            return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
        except NoCrossingError as exc:
            out.summary("NO-CROSSING", str(exc))
            return EXIT_NO_CROSSING
        except (LatticeError, NoiseError, ConfigError, ExperimentError, FrequencyPlanError) as exc:
            out.log(f"usage error: {exc}")
            out.summary("ERROR", str(exc))
            return EXIT_USAGE
        except (SimulationError, DecoderError, OSError) as exc:
            logger.exception("run failed")
            out.summary("ERROR", str(exc))
            return EXIT_RUNTIME


def main() -> int:
    return parse_and_dispatch()


if __name__ == "__main__":
    sys.exit(main())
