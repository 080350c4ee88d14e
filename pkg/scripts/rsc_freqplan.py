#!/usr/bin/env python3
"""
RSC Frequency Plan

Five-class frequency allocation over the bus tiling and frequency-collision
yield under Josephson-junction disorder.

Class rule: data and ancilla qubits form a 45-degree rotated square grid.
With doubled coordinates (X, Y) and rotated coordinates u = (X+Y)/2,
v = (X-Y)/2, qubit class = ((u + 2v) mod 5) + 1. Every bus is a unit square
of the rotated grid, so its four qubits take four different classes; an
ancilla's four data neighbours sit at u+-1 and v+-1 and take the four classes
other than its own.

Two-qubit gates are directional: the ancilla is the control and each data
qubit a target. Selective gates need bus-mates in different classes and the
targets of one control in mutually different classes, which forces five
classes around every bulk ancilla.

Collision conditions evaluated per sample (windows in MHz, all configurable):
    C1  |f_i - f_j| < w1               degenerate 0-1 transitions (coupled and
                                       next-nearest pairs)
    C2  |f_i - f_j - |alpha|| < w2     0-1 of one qubit on the 1-2 of its partner
    C3  |2 f_i + alpha - 2 f_j| < w3   two-photon 0-2 of one qubit on its partner

Usage:
    from rsc_freqplan import assign_classes, sample_frequency_batch, detect_collisions
    plan = assign_classes(lattice, build_bus_layout(lattice))
    sampled = sample_frequency_batch(plan, sigma_mhz=280.0, seed=1, samples=range(10_000))
    report = detect_collisions(plan, sampled)
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Literal, Mapping

import networkx as nx
import numpy as np

from rsc_experiment import wilson_interval
from rsc_lattice import BusLayout, RscLattice
from rsc_noise import StreamPurpose, shot_stream
from rsc_thresholds import ANHARMONICITY_GHZ, CLASS_BASE_GHZ, COLLISION_WINDOWS_MHZ, FREQUENCY_CLASSES
from rsc_validation_common import ValidationReport

logger = logging.getLogger(__name__)

SigmaInterpretation = Literal["std", "range"]


class FrequencyPlanError(ValueError):
    """Raised for negative disorder, unknown conditions or malformed samples."""


@dataclass(frozen=True)
class FrequencyPlan:
    """Class assignment and gate directions for every qubit of a lattice.

    Attributes:
        distance: Code distance
        classes: Global qubit index -> class in 1..5
        base_ghz: Base frequency of each class (index class-1)
        anharmonicity_ghz: Transmon anharmonicity, negative
        directions: (control, target) per coupled ancilla-data pair
        coupled_pairs: Unordered qubit pairs sharing a bus
        next_nearest: Unordered pairs of targets driven by a common control
    """

    distance: int
    classes: dict[int, int] = field(hash=False)
    base_ghz: tuple[float, ...]
    anharmonicity_ghz: float
    directions: tuple[tuple[int, int], ...]
    coupled_pairs: tuple[tuple[int, int], ...]
    next_nearest: tuple[tuple[int, int], ...]

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.classes))

    @property
    def classes_used(self) -> set[int]:
        return set(self.classes.values())

    def base_frequencies(self) -> np.ndarray:
        """Base frequency (GHz) of every qubit, in ``qubits`` order."""
        return np.array([self.base_ghz[self.classes[q] - 1] for q in self.qubits], dtype=np.float64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "rsc.freqplan/1",
            "distance": self.distance,
            "classes": {str(q): c for q, c in sorted(self.classes.items())},
            "base_ghz": list(self.base_ghz),
            "anharmonicity_ghz": self.anharmonicity_ghz,
            "directions": [list(p) for p in self.directions],
        }


def qubit_coords(lattice: RscLattice) -> dict[int, tuple[int, int]]:
    """Doubled coordinates of every data qubit and ancilla."""
    coords = {q: lattice.data_coord(q) for q in range(lattice.n_data)}
    coords.update({s.ancilla_id: lattice.ancilla_coord(s) for s in lattice.stabilizers})
    return coords


def class_of(coord: tuple[int, int]) -> int:
    x, y = coord
    u, v = (x + y) // 2, (x - y) // 2
    return (u + 2 * v) % FREQUENCY_CLASSES + 1


def assign_classes(
    lattice: RscLattice,
    layout: BusLayout,
    base_ghz: tuple[float, ...] = CLASS_BASE_GHZ,
    anharmonicity_ghz: float = ANHARMONICITY_GHZ,
) -> FrequencyPlan:
    """Periodic five-class plan over ``layout``; ancillas control, data qubits are targets."""
    if len(base_ghz) != FREQUENCY_CLASSES:
        raise FrequencyPlanError(f"need {FREQUENCY_CLASSES} class base frequencies, got {len(base_ghz)}")
    classes = {q: class_of(c) for q, c in qubit_coords(lattice).items()}

    directions = tuple((s.ancilla_id, q) for s in lattice.stabilizers for q in s.support)
    coupled = layout.bus_mates()
    next_nearest: set[tuple[int, int]] = set()
    for s in lattice.stabilizers:
        for a, b in itertools.combinations(sorted(s.support), 2):
            next_nearest.add((a, b))
    next_nearest -= coupled

    return FrequencyPlan(
        distance=lattice.distance,
        classes=classes,
        base_ghz=tuple(base_ghz),
        anharmonicity_ghz=anharmonicity_ghz,
        directions=directions,
        coupled_pairs=tuple(sorted(coupled)),
        next_nearest=tuple(sorted(next_nearest)),
    )


# =============================================================================
# Constraint graph and class search
# =============================================================================


def constraint_graph(lattice: RscLattice, layout: BusLayout) -> nx.Graph:
    """Qubits that must take different classes: bus-mates and targets of one control."""
    g = nx.Graph()
    g.add_nodes_from(qubit_coords(lattice))
    g.add_edges_from(layout.bus_mates())
    for s in lattice.stabilizers:
        g.add_edges_from(itertools.combinations(s.support, 2))
    return g


def unit_tile(lattice: RscLattice, layout: BusLayout) -> nx.Graph:
    """Constraint subgraph of the first bulk ancilla and its four targets."""
    g = constraint_graph(lattice, layout)
    bulk = next((s for s in lattice.stabilizers if s.weight == 4), None)
    if bulk is None:
        return g
    core = {bulk.ancilla_id, *bulk.support}
    return g.subgraph(core).copy()


def find_class_assignment(graph: nx.Graph, k: int) -> dict[Any, int] | None:
    """Exact k-class assignment with adjacent nodes distinct, or None if none exists.

    Backtracking in largest-first order; a new class is opened only after the
    ones in use, so class permutations are never revisited.
    """
    if k <= 0:
        raise FrequencyPlanError(f"k must be positive, got {k}")
    order = sorted(graph.nodes, key=lambda n: (-graph.degree[n], n))
    colouring: dict[Any, int] = {}

    def extend(i: int, used: int) -> bool:
        if i == len(order):
            return True
        node = order[i]
        forbidden = {colouring[m] for m in graph[node] if m in colouring}
        for c in range(used):
            if c not in forbidden:
                colouring[node] = c
                if extend(i + 1, used):
                    return True
        if used < k:
            colouring[node] = used
            if extend(i + 1, used + 1):
                return True
        colouring.pop(node, None)
        return False

    if not extend(0, 0):
        return None
    return {n: c + 1 for n, c in colouring.items()}


def validate_plan(lattice: RscLattice, layout: BusLayout, plan: FrequencyPlan) -> ValidationReport:
    """Bus-mate distinctness, target distinctness and class count."""
    report = ValidationReport(subject=f"frequency plan d={plan.distance}")
    for a, b in layout.bus_mates():
        if plan.classes[a] == plan.classes[b]:
            report.critical("bus-distinct", f"bus-mates {a} and {b} share class {plan.classes[a]}")
    for s in lattice.stabilizers:
        for a, b in itertools.combinations(s.support, 2):
            if plan.classes[a] == plan.classes[b]:
                report.major("target-distinct", f"targets {a} and {b} of ancilla {s.ancilla_id} share a class")
    expected = FREQUENCY_CLASSES if lattice.distance >= 3 else 1
    if len(plan.classes_used) != expected:
        report.major("class-count", f"{len(plan.classes_used)} classes used, expected {expected}")
    return report


# =============================================================================
# Disorder sampling
# =============================================================================


def disorder_sigma(value_mhz: float, interpretation: SigmaInterpretation = "std") -> float:
    """Gaussian standard deviation for a quoted disorder figure.

    ``std`` takes the figure as the standard deviation; ``range`` as a full
    spread of four standard deviations.
    """
    if value_mhz < 0:
        raise FrequencyPlanError(f"sigma must be non-negative, got {value_mhz}")
    if interpretation == "std":
        return value_mhz
    if interpretation == "range":
        return value_mhz / 4.0
    raise FrequencyPlanError(f"unknown sigma interpretation {interpretation!r}")


def sample_frequencies(plan: FrequencyPlan, sigma_mhz: float, rng: np.random.Generator) -> dict[int, float]:
    """One disorder sample: qubit -> frequency (GHz) = class base + N(0, sigma)."""
    if sigma_mhz < 0:
        raise FrequencyPlanError(f"sigma must be non-negative, got {sigma_mhz}")
    freqs = plan.base_frequencies() + rng.normal(0.0, sigma_mhz, len(plan.qubits)) / 1000.0
    return dict(zip(plan.qubits, freqs.tolist()))


def sample_frequency_batch(plan: FrequencyPlan, sigma_mhz: float, seed: int, samples: range) -> np.ndarray:
    """(len(samples), n_qubits) GHz; sample i draws from its own (seed, i) stream."""
    if sigma_mhz < 0:
        raise FrequencyPlanError(f"sigma must be non-negative, got {sigma_mhz}")
    out = np.empty((len(samples), len(plan.qubits)), dtype=np.float64)
    for row, i in enumerate(samples):
        rng = shot_stream(seed, i, StreamPurpose.FREQUENCIES)
        out[row] = list(sample_frequencies(plan, sigma_mhz, rng).values())
    return out


# =============================================================================
# Collisions
# =============================================================================


@dataclass(frozen=True)
class Collision:
    sample: int
    pair: tuple[int, int]
    condition: str
    detuning_mhz: float


@dataclass
class CollisionReport:
    """Every violated condition over a block of samples."""

    samples: int
    collisions: list[Collision]
    samples_with_collision: int
    windows_mhz: dict[str, float]

    @property
    def is_empty(self) -> bool:
        return not self.collisions

    @property
    def probability(self) -> float:
        """Fraction of samples with at least one collision."""
        return self.samples_with_collision / self.samples if self.samples else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.samples_with_collision, self.samples)

    def by_condition(self) -> dict[str, int]:
        counts = {c: 0 for c in sorted(self.windows_mhz)}
        for col in self.collisions:
            counts[col.condition] += 1
        return counts

    def summary(self) -> dict[str, Any]:
        low, high = self.ci
        return {
            "samples": self.samples,
            "samples_with_collision": self.samples_with_collision,
            "collision_probability": self.probability,
            "ci_low": low,
            "ci_high": high,
            "by_condition": self.by_condition(),
            "windows_mhz": dict(sorted(self.windows_mhz.items())),
        }


def _resolve_windows(windows: Mapping[str, float] | None) -> dict[str, float]:
    resolved = dict(COLLISION_WINDOWS_MHZ)
    for name, value in (windows or {}).items():
        if name not in resolved:
            raise FrequencyPlanError(f"unknown collision condition {name!r}")
        if value < 0:
            raise FrequencyPlanError(f"window {name} must be non-negative, got {value}")
        resolved[name] = float(value)
    return resolved


def detect_collisions(
    plan: FrequencyPlan,
    sampled: np.ndarray | Mapping[int, float],
    windows: Mapping[str, float] | None = None,
    first_sample: int = 0,
) -> CollisionReport:
    """Evaluate C1-C3 on every coupled pair and C1 on next-nearest pairs.

    ``sampled`` is one frequency map or a (samples, n_qubits) GHz array in
    ``plan.qubits`` order.
    """
    w = _resolve_windows(windows)
    if isinstance(sampled, Mapping):
        freqs = np.array([[sampled[q] for q in plan.qubits]], dtype=np.float64)
    else:
        freqs = np.atleast_2d(np.asarray(sampled, dtype=np.float64))
    if freqs.shape[1] != len(plan.qubits):
        raise FrequencyPlanError(f"samples cover {freqs.shape[1]} qubits, plan has {len(plan.qubits)}")
    col = {q: i for i, q in enumerate(plan.qubits)}
    mhz = freqs * 1000.0
    alpha = plan.anharmonicity_ghz * 1000.0

    checks: list[tuple[str, list[tuple[int, int]], np.ndarray]] = []
    coupled = list(plan.coupled_pairs)
    if coupled:
        a = np.array([col[i] for i, _ in coupled])
        b = np.array([col[j] for _, j in coupled])
        fi, fj = mhz[:, a], mhz[:, b]
        checks.append(("C1", coupled, fi - fj))
        checks.append(("C2", coupled, fi - fj - abs(alpha)))
        checks.append(("C2", [(j, i) for i, j in coupled], fj - fi - abs(alpha)))
        checks.append(("C3", coupled, 2 * fi + alpha - 2 * fj))
        checks.append(("C3", [(j, i) for i, j in coupled], 2 * fj + alpha - 2 * fi))
    if plan.next_nearest:
        nn = list(plan.next_nearest)
        a = np.array([col[i] for i, _ in nn])
        b = np.array([col[j] for _, j in nn])
        checks.append(("C1", nn, mhz[:, a] - mhz[:, b]))

    collisions: list[Collision] = []
    hit = np.zeros(freqs.shape[0], dtype=bool)
    for name, pairs, detuning in checks:
        mask = np.abs(detuning) < w[name]
        hit |= mask.any(axis=1)
        for s, k in zip(*np.nonzero(mask)):
            collisions.append(Collision(first_sample + int(s), pairs[k], name, float(detuning[s, k])))
    collisions.sort(key=lambda c: (c.sample, c.pair, c.condition))
    if collisions:
        logger.info("%d collisions in %d of %d samples", len(collisions), int(hit.sum()), freqs.shape[0])
    return CollisionReport(freqs.shape[0], collisions, int(hit.sum()), w)


def collision_rows(report: CollisionReport) -> list[dict[str, str]]:
    """CSV rows ``sample,pair,condition,detuning_mhz`` plus one aggregate row."""
    rows = [
        {"sample": str(c.sample), "pair": f"{c.pair[0]}-{c.pair[1]}", "condition": c.condition, "detuning_mhz": f"{c.detuning_mhz:.6f}"}
        for c in report.collisions
    ]
    low, high = report.ci
    rows.append(
        {
            "sample": "summary",
            "pair": f"{report.samples_with_collision}/{report.samples}",
            "condition": f"p={report.probability:.6g} ci=[{low:.6g},{high:.6g}]",
            "detuning_mhz": "",
        }
    )
    return rows
