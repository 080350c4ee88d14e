"""Extraction schedule, fault-location census and single-fault correctability."""

from __future__ import annotations

import json

import numpy as np
import pytest

from rsc_circuit import (
    Cnot,
    Idle,
    Measure,
    build_round_schedule,
    fault_locations,
    gate_qubits,
    idle_cycle,
    schedule_to_dict,
    validate_schedule,
)
from rsc_decoder import build_matching_graph, decode_batch
from rsc_lattice import Basis, build_lattice
from rsc_noise import NoiseModel
from rsc_sim import FaultInjection, simulate_batch
from rsc_thresholds import CYCLE_TIME_STEPS


def test_d3_schedule_shape(lattice3, schedule3):
    assert len(schedule3.time_steps) == 6
    assert schedule3.cnot_count == 24
    assert schedule3.cnot_count == sum(s.weight for s in lattice3.stabilizers)
    measured = [m.stabilizer_id for m in schedule3.measurements]
    assert sorted(measured) == list(range(8))


def test_d1_schedule_is_empty():
    schedule = build_round_schedule(build_lattice(1))
    assert schedule.time_steps == ()
    assert fault_locations(schedule) == []


@pytest.mark.parametrize("d", (3, 5, 7))
def test_schedule_validates(d):
    lattice = build_lattice(d)
    assert validate_schedule(lattice, build_round_schedule(lattice)).is_empty


@pytest.mark.parametrize("d", (3, 5, 7))
def test_steps_are_parallel_safe(d):
    schedule = build_round_schedule(build_lattice(d))
    for step in schedule.time_steps:
        qubits = [q for g in step for q in gate_qubits(g)]
        assert len(qubits) == len(set(qubits))


@pytest.mark.parametrize("d", (3, 5, 7))
def test_data_qubits_touch_each_face_once(d):
    lattice = build_lattice(d)
    schedule = build_round_schedule(lattice)
    touches = {q: 0 for q in range(lattice.n_data)}
    for step in schedule.time_steps:
        for g in step:
            if isinstance(g, Cnot):
                for q in gate_qubits(g):
                    if q < lattice.n_data:
                        touches[q] += 1
    for q, n in touches.items():
        faces = sum(q in s.support for s in lattice.stabilizers)
        assert n == faces <= 4


def test_fault_census_matches_independent_recount(lattice3, schedule3):
    locations = fault_locations(schedule3)
    assert len(locations) == sum(len(step) for step in schedule3.time_steps)
    # every qubit is busy once per step; a CNOT covers two of them
    assert len(locations) == CYCLE_TIME_STEPS * lattice3.n_qubits - schedule3.cnot_count
    by_kind = schedule_to_dict(schedule3)["fault_locations"]["by_kind"]
    assert by_kind == {"prep": 8, "cnot": 24, "measure": 8, "idle": len(locations) - 40}
    assert [loc.index for loc in locations] == list(range(len(locations)))


def test_fault_domains(schedule3):
    for loc in fault_locations(schedule3):
        if loc.kind == "cnot":
            assert len(loc.domain) == 15
        elif loc.kind == "measure":
            assert loc.domain == (1,)
        else:
            assert len(loc.domain) == 3


def test_z_and_x_checks_share_cnot_layers(lattice3, schedule3):
    for step in schedule3.time_steps[1:5]:
        targets = {g.target for g in step if isinstance(g, Cnot)}
        controls = {g.control for g in step if isinstance(g, Cnot)}
        z_ancillas = {s.ancilla_id for s in lattice3.stabilizers_of(Basis.Z)}
        x_ancillas = {s.ancilla_id for s in lattice3.stabilizers_of(Basis.X)}
        assert targets & z_ancillas
        assert controls & x_ancillas


def test_idle_cycle_for_bare_qubit():
    lattice = build_lattice(1)
    cycle = idle_cycle(lattice)
    assert len(cycle.time_steps) == CYCLE_TIME_STEPS
    assert all(step == (Idle(0),) for step in cycle.time_steps)


def test_schedule_json(schedule3):
    data = json.loads(json.dumps(schedule_to_dict(schedule3)))
    assert data["schema"] == "rsc.schedule/1"
    assert len(data["time_steps"]) == 6
    assert data["fault_locations"]["total"] == len(fault_locations(schedule3))
    last = data["time_steps"][-1]
    assert sum(g["kind"] == "measure" for g in last) == 8
    assert isinstance(schedule3.time_steps[-1][0], Measure)


@pytest.mark.parametrize("basis", [Basis.Z, Basis.X])
def test_every_single_circuit_fault_is_corrected(lattice3, schedule3, basis):
    rounds = 3
    model = NoiseModel.circuit_level(1e-3)
    graph = build_matching_graph(lattice3, schedule3, model, rounds, basis)
    locations = fault_locations(schedule3)
    injections = [
        [FaultInjection(t, code, location=loc.index)]
        for t in (0, 1, rounds - 1)
        for loc in locations
        for code in loc.domain
    ]
    batch = simulate_batch(lattice3, schedule3, model, rounds, basis=basis, injections=injections)
    corrections = decode_batch(graph, batch.detection_events())
    failures = batch.logical_flips() ^ corrections
    assert int(np.sum(failures)) == 0
