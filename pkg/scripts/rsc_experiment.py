#!/usr/bin/env python3
"""
RSC Experiments

Monte-Carlo harness for the memory: logical error rate per (d, p) point with
Wilson confidence intervals, threshold scans over a (distance x rate) grid,
and threshold estimation from pairwise curve crossings.

Shots are cut into fixed chunks of SHOT_CHUNK. Each chunk is an independent
task whose shots draw from their own (seed, shot) streams, so a point's
failure count is the same whether chunks run in one process or many.
Every point of a scan uses the same base seed.

Usage:
    from rsc_experiment import ExperimentConfig, threshold_scan, fit_threshold
    config = ExperimentConfig(distances=(3, 5), physical_rates=(0.004, 0.007, 0.01))
    table = threshold_scan(config)
    fit = fit_threshold(table)
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from rsc_circuit import RoundSchedule, build_round_schedule
from rsc_decoder import MatchingGraph, WeightMode, build_matching_graph, decode_batch
from rsc_lattice import Basis, LatticeError, build_lattice
from rsc_noise import NoiseKind, NoiseModel
from rsc_sim import simulate_batch
from rsc_thresholds import DEFAULT_SHOTS, LOW_STATISTICS_FAILURES, SHOT_CHUNK, WILSON_Z

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "model",
    "d",
    "p",
    "q",
    "rounds",
    "shots",
    "failures",
    "p_L",
    "ci_low",
    "ci_high",
    "p_L_per_round",
    "seed",
    "low_statistics",
)


class ExperimentError(ValueError):
    """Raised for invalid experiment configurations or unreadable result tables."""


class NoCrossingError(ExperimentError):
    """Raised when no pair of distance curves crosses inside the scanned window."""


# =============================================================================
# Statistics helpers
# =============================================================================


def wilson_interval(failures: int, shots: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if shots <= 0:
        return 0.0, 1.0
    phat = failures / shots
    denom = 1.0 + z * z / shots
    centre = (phat + z * z / (2 * shots)) / denom
    half = z * math.sqrt(phat * (1 - phat) / shots + z * z / (4 * shots * shots)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def per_round_rate(p_l: float, rounds: int) -> float:
    """Per-cycle logical error rate 1 - (1 - p_L)^(1/T)."""
    if p_l >= 1.0:
        return 1.0
    return 1.0 - (1.0 - p_l) ** (1.0 / rounds)


def log_spaced_rates(p_min: float, p_max: float, count: int) -> tuple[float, ...]:
    """``count`` log-spaced rates in [p_min, p_max], rounded to 4 significant digits."""
    if count < 1 or p_min <= 0 or p_max < p_min:
        raise ExperimentError(f"bad rate range [{p_min}, {p_max}] x {count}")
    return tuple(float(f"{p:.4g}") for p in np.geomspace(p_min, p_max, count))


# =============================================================================
# Configuration
# =============================================================================


@dataclass(frozen=True)
class ExperimentPoint:
    """One (model, d, p) point of a scan with its shot budget."""

    model: NoiseModel
    distance: int
    rounds: int
    shots: int
    seed: int = 0
    basis: Basis = Basis.Z
    weights: WeightMode = "log"

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ExperimentError(f"shots must be >= 1, got {self.shots}")
        if self.rounds < 1:
            raise ExperimentError(f"rounds must be >= 1, got {self.rounds}")
        if self.seed < 0:
            raise ExperimentError(f"seed must be non-negative, got {self.seed}")
        if not 0.0 <= self.model.p < 0.5:
            raise ExperimentError(f"p must lie in [0, 0.5), got {self.model.p}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A threshold scan: every distance crossed with every physical rate.

    ``rounds`` None means T = d for each distance.
    """

    distances: tuple[int, ...]
    physical_rates: tuple[float, ...]
    rounds: int | None = None
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    model: NoiseKind = NoiseKind.CIRCUIT_LEVEL
    q: float | None = None
    basis: Basis = Basis.Z
    weights: WeightMode = "log"
    out: Path | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", NoiseKind(self.model))
        object.__setattr__(self, "basis", Basis(self.basis))
        if not self.distances:
            raise ExperimentError("at least one distance is required")
        for d in self.distances:
            if not isinstance(d, int) or d < 1 or d % 2 == 0:
                raise ExperimentError(f"distances must be positive odd integers, got {d!r}")
        for p in self.physical_rates:
            if not 0.0 < p < 0.5:
                raise ExperimentError(f"physical rates must lie in (0, 0.5), got {p}")
        if not self.physical_rates:
            raise ExperimentError("at least one physical rate is required")
        if self.shots < 1:
            raise ExperimentError(f"shots must be >= 1, got {self.shots}")
        if self.rounds is not None and self.rounds < 1:
            raise ExperimentError(f"rounds must be >= 1, got {self.rounds}")
        if self.weights not in ("log", "unit"):
            raise ExperimentError(f"unknown weight mode {self.weights!r}")

    def rounds_for(self, distance: int) -> int:
        return distance if self.rounds is None else self.rounds

    def noise_model(self, p: float) -> NoiseModel:
        if self.model is NoiseKind.PHENOMENOLOGICAL:
            return NoiseModel.phenomenological(p, self.q)
        return NoiseModel(self.model, p)

    def points(self) -> list[ExperimentPoint]:
        """The scan grid in (d, p) order."""
        return [
            ExperimentPoint(self.noise_model(p), d, self.rounds_for(d), self.shots, self.seed, self.basis, self.weights)
            for d, p in itertools.product(self.distances, self.physical_rates)
        ]


@dataclass(frozen=True)
class LogicalErrorEstimate:
    """Outcome of one experiment point."""

    model: NoiseKind
    d: int
    p: float
    q: float | None
    rounds: int
    shots: int
    failures: int
    seed: int

    @property
    def p_L(self) -> float:
        return self.failures / self.shots

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.shots)

    @property
    def p_L_per_round(self) -> float:
        return per_round_rate(self.p_L, self.rounds)

    @property
    def ci_per_round(self) -> tuple[float, float]:
        low, high = self.ci
        return per_round_rate(low, self.rounds), per_round_rate(high, self.rounds)

    @property
    def low_statistics(self) -> bool:
        return self.failures < LOW_STATISTICS_FAILURES

    def to_row(self) -> dict[str, str]:
        low, high = self.ci
        return {
            "model": self.model.value,
            "d": str(self.d),
            "p": _fmt(self.p),
            "q": "" if self.q is None else _fmt(self.q),
            "rounds": str(self.rounds),
            "shots": str(self.shots),
            "failures": str(self.failures),
            "p_L": _fmt(self.p_L),
            "ci_low": _fmt(low),
            "ci_high": _fmt(high),
            "p_L_per_round": _fmt(self.p_L_per_round),
            "seed": str(self.seed),
            "low_statistics": "1" if self.low_statistics else "0",
        }


def _fmt(x: float) -> str:
    return f"{x:.10g}"


# =============================================================================
# Running
# =============================================================================


@dataclass(frozen=True)
class _ChunkTask:
    point: ExperimentPoint
    start: int
    stop: int


@lru_cache(maxsize=None)
def _schedule(distance: int) -> RoundSchedule:
    return build_round_schedule(build_lattice(distance))


@lru_cache(maxsize=32)
def _graph(distance: int, model: NoiseModel, rounds: int, basis: Basis, weights: WeightMode) -> MatchingGraph:
    logger.info("building %s matching graph d=%d T=%d p=%g", model.kind.value, distance, rounds, model.p)
    graph = build_matching_graph(build_lattice(distance), _schedule(distance), model, rounds, basis, weights)
    graph.shortest_paths()
    return graph


def _run_chunk(task: _ChunkTask) -> int:
    """Failures among shots [start, stop) of one point."""
    pt = task.point
    lattice = build_lattice(pt.distance)
    batch = simulate_batch(
        lattice, _schedule(pt.distance), pt.model, pt.rounds, seed=pt.seed, shots=range(task.start, task.stop), basis=pt.basis
    )
    events = batch.detection_events()
    if pt.model.p == 0.0:
        corrections = np.zeros(batch.shots, dtype=np.uint8)
    else:
        graph = _graph(pt.distance, pt.model, pt.rounds, pt.basis, pt.weights)
        corrections = decode_batch(graph, events)
    return int(np.sum(batch.logical_flips() ^ corrections))


def _chunks(point: ExperimentPoint) -> list[_ChunkTask]:
    return [_ChunkTask(point, s, min(s + SHOT_CHUNK, point.shots)) for s in range(0, point.shots, SHOT_CHUNK)]


def _estimate(point: ExperimentPoint, failures: int) -> LogicalErrorEstimate:
    est = LogicalErrorEstimate(point.model.kind, point.distance, point.model.p, point.model.q, point.rounds, point.shots, failures, point.seed)
    if est.low_statistics and point.model.p > 0:
        logger.warning("low statistics at d=%d p=%g: %d failures in %d shots", est.d, est.p, failures, est.shots)
    return est


def _run_points(points: Sequence[ExperimentPoint], workers: int, executor: Executor | None) -> list[LogicalErrorEstimate]:
    tasks = [_chunks(pt) for pt in points]
    flat = [t for group in tasks for t in group]
    if executor is not None:
        counts = list(executor.map(_run_chunk, flat))
    elif workers > 1 and len(flat) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_run_chunk, flat))
    else:
        counts = [_run_chunk(t) for t in flat]

    out: list[LogicalErrorEstimate] = []
    pos = 0
    for point, group in zip(points, tasks):
        out.append(_estimate(point, sum(counts[pos : pos + len(group)])))
        pos += len(group)
    return out


def estimate_logical_error_rate(point: ExperimentPoint, workers: int = 1, executor: Executor | None = None) -> LogicalErrorEstimate:
    """Run, decode and score every shot of one point."""
    try:
        build_lattice(point.distance)
    except LatticeError as exc:
        raise ExperimentError(str(exc)) from exc
    return _run_points([point], workers, executor)[0]


def threshold_scan(config: ExperimentConfig, workers: int = 1, executor: Executor | None = None) -> list[LogicalErrorEstimate]:
    """Estimate every (d, p) point of ``config``; writes the CSV when ``config.out`` is set."""
    table = _run_points(config.points(), workers, executor)
    if config.out is not None:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        config.out.write_text(table_to_csv(table), encoding="utf-8")
    return table


def table_to_csv(table: Iterable[LogicalErrorEstimate]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for est in table:
        writer.writerow(est.to_row())
    return buf.getvalue()


def table_from_csv(text: str) -> list[LogicalErrorEstimate]:
    """Parse a CSV written by table_to_csv."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames[: len(CSV_COLUMNS) - 1]) != CSV_COLUMNS[:-1]:
        raise ExperimentError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    try:
        for row in reader:
            out.append(
                LogicalErrorEstimate(
                    model=NoiseKind(row["model"]),
                    d=int(row["d"]),
                    p=float(row["p"]),
                    q=float(row["q"]) if row["q"] else None,
                    rounds=int(row["rounds"]),
                    shots=int(row["shots"]),
                    failures=int(row["failures"]),
                    seed=int(row["seed"]),
                )
            )
    except (KeyError, ValueError) as exc:
        raise ExperimentError(f"malformed CSV row: {exc}") from exc
    return out


# =============================================================================
# Threshold fit
# =============================================================================


@dataclass(frozen=True)
class ThresholdFit:
    """Threshold as the mean of pairwise crossings; ``uncertainty`` is their half-spread."""

    p_th: float
    uncertainty: float
    crossings: tuple[tuple[int, int, float], ...]

    def to_dict(self) -> dict[str, object]:
        return {
            "p_th": self.p_th,
            "uncertainty": self.uncertainty,
            "crossings": [{"d_small": a, "d_large": b, "p": p} for a, b, p in self.crossings],
        }


def _pair_crossing(small: dict[float, float], large: dict[float, float]) -> float | None:
    """First p where the larger code stops winning (log-log interpolation).

    Only an upward crossing counts: below it the larger code has the lower
    p_L, above it (or at it) the higher.
    """
    common = sorted(p for p in set(small) & set(large) if small[p] > 0 and large[p] > 0)
    if len(common) < 2:
        return None
    diff = [math.log(large[p]) - math.log(small[p]) for p in common]
    for (p0, f0), (p1, f1) in zip(zip(common, diff), zip(common[1:], diff[1:])):
        if f0 < 0.0 <= f1:
            x0, x1 = math.log(p0), math.log(p1)
            return math.exp(x0 + (x1 - x0) * (-f0) / (f1 - f0))
    return None


def fit_threshold(table: Iterable[LogicalErrorEstimate]) -> ThresholdFit:
    """Threshold from pairwise crossings of the per-distance p_L(p) curves.

    Raises:
        ExperimentError: With fewer than two distances.
        NoCrossingError: If no pair of curves crosses in the scanned window.
    """
    curves: dict[int, dict[float, float]] = {}
    for est in table:
        curves.setdefault(est.d, {})[est.p] = est.p_L
    distances = sorted(curves)
    if len(distances) < 2:
        raise ExperimentError("threshold fit needs at least two distances")

    crossings = []
    for a, b in itertools.combinations(distances, 2):
        p = _pair_crossing(curves[a], curves[b])
        if p is None:
            logger.info("no crossing between d=%d and d=%d", a, b)
        else:
            crossings.append((a, b, p))
    if not crossings:
        raise NoCrossingError(f"no crossing among distances {distances} in the scanned window")
    values = [p for _, _, p in crossings]
    return ThresholdFit(sum(values) / len(values), (max(values) - min(values)) / 2, tuple(crossings))


def bootstrap_threshold(config: ExperimentConfig, workers: int = 1) -> tuple[ThresholdFit, ThresholdFit]:
    """Fits at the full and at half the shot budget, for a stability check."""
    full = fit_threshold(threshold_scan(replace(config, out=None), workers))
    half = fit_threshold(threshold_scan(replace(config, shots=max(1, config.shots // 2), out=None), workers))
    return full, half
