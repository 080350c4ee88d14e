#!/usr/bin/env python3
"""
RSC Extraction Circuit

One syndrome-extraction cycle as six time steps: ancilla preparation, four
CNOT layers, ancilla measurement. Z-checks use the ancilla as CNOT target,
X-checks as CNOT control. The two bases visit their corners in transposed
orders so that a fault on an ancilla halfway through its check spreads into
a pair of data errors lying across, never along, the matching logical:

    Z-check: NE, NW, SE, SW   (hook pair SE+SW is horizontal, Z-bar is vertical)
    X-check: NE, SE, NW, SW   (hook pair NW+SW is vertical,   X-bar is horizontal)

Every gate and every idle qubit of the cycle is a fault location.

Usage:
    from rsc_circuit import build_round_schedule, fault_locations
    schedule = build_round_schedule(build_lattice(3))
    locations = fault_locations(schedule)
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, Union

from rsc_lattice import Basis, RscLattice
from rsc_pauli import CODE_X, CODE_Y, CODE_Z
from rsc_thresholds import CYCLE_TIME_STEPS
from rsc_validation_common import ValidationReport

Z_ORDER = ("NE", "NW", "SE", "SW")
X_ORDER = ("NE", "SE", "NW", "SW")

# Nontrivial fault codes per location kind (symplectic codes, see rsc_pauli)
SINGLE_QUBIT_DOMAIN: tuple[int, ...] = (CODE_X, CODE_Y, CODE_Z)
TWO_QUBIT_DOMAIN: tuple[int, ...] = tuple(range(1, 16))
MEASUREMENT_DOMAIN: tuple[int, ...] = (1,)


@dataclass(frozen=True)
class AncillaPrep:
    qubit: int
    basis: Basis


@dataclass(frozen=True)
class Cnot:
    control: int
    target: int


@dataclass(frozen=True)
class Measure:
    qubit: int
    basis: Basis
    stabilizer_id: int


@dataclass(frozen=True)
class Idle:
    qubit: int


Gate = Union[AncillaPrep, Cnot, Measure, Idle]


def gate_qubits(gate: Gate) -> tuple[int, ...]:
    if isinstance(gate, Cnot):
        return (gate.control, gate.target)
    return (gate.qubit,)


def gate_kind(gate: Gate) -> str:
    return {AncillaPrep: "prep", Cnot: "cnot", Measure: "measure", Idle: "idle"}[type(gate)]


@dataclass(frozen=True)
class RoundSchedule:
    """Time-ordered gate locations of one extraction cycle."""

    distance: int
    n_qubits: int
    time_steps: tuple[tuple[Gate, ...], ...]

    @property
    def measurements(self) -> tuple[Measure, ...]:
        return tuple(g for step in self.time_steps for g in step if isinstance(g, Measure))

    @property
    def cnot_count(self) -> int:
        return sum(isinstance(g, Cnot) for step in self.time_steps for g in step)


@dataclass(frozen=True)
class FaultLocation:
    """A place in the cycle where a fault may act.

    ``domain`` lists the nontrivial fault codes: single-qubit Pauli codes for
    prep and idle, the 15 two-qubit codes for CNOT, a single flip for
    measurement.
    """

    index: int
    time_step: int
    kind: str
    qubits: tuple[int, ...]
    domain: tuple[int, ...]
    gate: Gate


def build_round_schedule(lattice: RscLattice) -> RoundSchedule:
    """Six-step extraction cycle for ``lattice``; empty for d=1."""
    n_data = lattice.n_data
    n_qubits = lattice.n_qubits
    if not lattice.stabilizers:
        return RoundSchedule(lattice.distance, n_qubits, ())

    data = range(n_data)
    steps: list[tuple[Gate, ...]] = []

    prep: list[Gate] = [AncillaPrep(s.ancilla_id, s.basis) for s in lattice.stabilizers]
    prep += [Idle(q) for q in data]
    steps.append(tuple(prep))

    for layer in range(4):
        gates: list[Gate] = []
        busy: set[int] = set()
        for s in lattice.stabilizers:
            compass = (Z_ORDER if s.basis is Basis.Z else X_ORDER)[layer]
            q = s.corner(compass)
            if q is None:
                continue
            gates.append(Cnot(q, s.ancilla_id) if s.basis is Basis.Z else Cnot(s.ancilla_id, q))
            busy.update((q, s.ancilla_id))
        gates += [Idle(q) for q in range(n_qubits) if q not in busy]
        steps.append(tuple(gates))

    measure: list[Gate] = [Measure(s.ancilla_id, s.basis, s.id) for s in lattice.stabilizers]
    measure += [Idle(q) for q in data]
    steps.append(tuple(measure))

    return RoundSchedule(lattice.distance, n_qubits, tuple(steps))


def idle_cycle(lattice: RscLattice) -> RoundSchedule:
    """A cycle-long wait on every data qubit; what an unencoded qubit goes through per round."""
    step = tuple(Idle(q) for q in range(lattice.n_data))
    return RoundSchedule(lattice.distance, lattice.n_qubits, (step,) * CYCLE_TIME_STEPS)


def fault_locations(schedule: RoundSchedule) -> list[FaultLocation]:
    """Every gate and idle location of one cycle, in (time step, gate) order."""
    out: list[FaultLocation] = []
    for t, step in enumerate(schedule.time_steps):
        for gate in step:
            kind = gate_kind(gate)
            if kind == "cnot":
                domain = TWO_QUBIT_DOMAIN
            elif kind == "measure":
                domain = MEASUREMENT_DOMAIN
            else:
                domain = SINGLE_QUBIT_DOMAIN
            out.append(FaultLocation(len(out), t, kind, gate_qubits(gate), domain, gate))
    return out


def validate_schedule(lattice: RscLattice, schedule: RoundSchedule) -> ValidationReport:
    """Parallelism safety, support coverage and measurement census."""
    report = ValidationReport(subject=f"schedule d={schedule.distance}")
    for t, step in enumerate(schedule.time_steps):
        seen = Counter(q for g in step for q in gate_qubits(g))
        for q, n in seen.items():
            if n > 1:
                report.critical("parallelism", f"qubit {q} appears {n} times in step {t}")

    pairs: Counter[tuple[int, int]] = Counter()
    for step in schedule.time_steps:
        for g in step:
            if isinstance(g, Cnot):
                pairs[(g.control, g.target)] += 1
    for s in lattice.stabilizers:
        for q in s.support:
            key = (q, s.ancilla_id) if s.basis is Basis.Z else (s.ancilla_id, q)
            if pairs.get(key, 0) != 1:
                report.major("coverage", f"stabilizer {s.id} touches data {q} {pairs.get(key, 0)} times")

    measured = Counter(m.stabilizer_id for m in schedule.measurements)
    for s in lattice.stabilizers:
        if measured.get(s.id, 0) != 1:
            report.major("measurement", f"stabilizer {s.id} measured {measured.get(s.id, 0)} times")
    for q in range(lattice.n_data):
        touches = sum(n for (c, t), n in pairs.items() if q in (c, t))
        if touches > 4:
            report.major("data-load", f"data qubit {q} in {touches} CNOTs")
    return report


def schedule_to_dict(schedule: RoundSchedule) -> dict[str, Any]:
    """JSON-ready dump (schema ``rsc.schedule/1``) with fault-location census."""

    def _gate(g: Gate) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": gate_kind(g), "qubits": list(gate_qubits(g))}
        if isinstance(g, (AncillaPrep, Measure)):
            out["basis"] = g.basis.value
        if isinstance(g, Measure):
            out["stabilizer_id"] = g.stabilizer_id
        return out

    locations = fault_locations(schedule)
    census = Counter(loc.kind for loc in locations)
    return {
        "schema": "rsc.schedule/1",
        "distance": schedule.distance,
        "n_qubits": schedule.n_qubits,
        "time_steps": [[_gate(g) for g in step] for step in schedule.time_steps],
        "fault_locations": {
            "total": len(locations),
            "by_kind": {k: census.get(k, 0) for k in ("prep", "cnot", "measure", "idle")},
            "fault_paulis": sum(len(loc.domain) for loc in locations),
        },
    }
