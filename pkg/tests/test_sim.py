"""Memory-experiment simulation and detection events."""

from __future__ import annotations

import numpy as np
import pytest

from rsc_circuit import build_round_schedule
from rsc_lattice import Basis, build_lattice
from rsc_noise import NoiseModel
from rsc_pauli import CODE_X, CODE_Z, PauliFrame
from rsc_sim import (
    DetectionEventSet,
    FaultInjection,
    SimulationError,
    detector_layers,
    extract_detection_events,
    logical_flip,
    run_memory,
    score_shot,
    simulate_batch,
)

PHENOM = NoiseModel.phenomenological(0.0)


@pytest.mark.parametrize("d", (1, 3, 5, 7))
@pytest.mark.parametrize("rounds", (1, 5, 20))
def test_noiseless_history_is_zero(d, rounds):
    lattice = build_lattice(d)
    schedule = build_round_schedule(lattice)
    batch = simulate_batch(lattice, schedule, NoiseModel.circuit_level(0.0), rounds, seed=3, shots=4)
    assert not batch.syndromes.any()
    assert not batch.detection_events().any()
    assert not batch.logical_flips().any()


def test_bulk_error_lights_two_checks_every_round(lattice3, schedule3):
    batch = simulate_batch(
        lattice3, schedule3, PHENOM, 4, injections=[[FaultInjection(0, CODE_X, data_qubit=4)]]
    )
    assert batch.syndromes[0][:, [2, 5]].all()
    assert batch.syndromes[0].sum() == 2 * 4
    events = extract_detection_events(batch.history(0))
    assert events.defects == ((2, 0), (5, 0))
    assert events.layers == 5


def test_measurement_flip_is_a_time_like_pair(lattice3, schedule3):
    batch = simulate_batch(
        lattice3, schedule3, PHENOM, 3, injections=[[FaultInjection(1, 1, measurement=2)]]
    )
    events = extract_detection_events(batch.history(0))
    assert events.defects == ((2, 1), (2, 2))
    assert batch.logical_flips()[0] == 0


def test_boundary_error_lights_one_check(lattice3, schedule3):
    batch = simulate_batch(
        lattice3, schedule3, PHENOM, 2, injections=[[FaultInjection(0, CODE_X, data_qubit=0)]]
    )
    events = extract_detection_events(batch.history(0))
    assert events.defects == ((2, 0),)
    assert batch.logical_flips()[0] == 1


def test_x_memory_watches_x_checks(lattice3, schedule3):
    batch = simulate_batch(
        lattice3,
        schedule3,
        PHENOM,
        2,
        basis=Basis.X,
        injections=[[FaultInjection(0, CODE_Z, data_qubit=4)]],
    )
    events = extract_detection_events(batch.history(0))
    assert {s for s, _ in events.defects} == {3, 4}
    assert all(lattice3.stabilizers[s].basis is Basis.X for s, _ in events.defects)


def test_code_capacity_has_one_layer(lattice3, schedule3):
    model = NoiseModel.code_capacity(0.0)
    assert detector_layers(model.kind, 7) == 1
    batch = simulate_batch(lattice3, schedule3, model, 1, injections=[[FaultInjection(0, CODE_X, data_qubit=4)]])
    assert batch.detection_events().shape == (1, 1, 4)


def test_syndrome_is_linear(lattice3, schedule3):
    single = [[FaultInjection(0, CODE_X, data_qubit=q)] for q in (1, 5)]
    both = [[FaultInjection(0, CODE_X, data_qubit=1), FaultInjection(0, CODE_X, data_qubit=5)]]
    a = simulate_batch(lattice3, schedule3, PHENOM, 1, injections=single).syndromes
    b = simulate_batch(lattice3, schedule3, PHENOM, 1, injections=both).syndromes
    np.testing.assert_array_equal(a[0] ^ a[1], b[0])


def test_score_shot(lattice3, schedule3):
    history = run_memory(lattice3, schedule3, PHENOM, 1, seed=0)
    assert score_shot(lattice3, history, 0) is False
    assert score_shot(lattice3, history, 1) is True
    x_bar = PauliFrame.on(lattice3.n_data, lattice3.logical_x, "X")
    assert logical_flip(lattice3, x_bar, Basis.Z) == 1
    assert logical_flip(lattice3, x_bar, Basis.X) == 0


def test_batch_is_deterministic_per_shot(lattice3, schedule3):
    model = NoiseModel.circuit_level(0.02)
    whole = simulate_batch(lattice3, schedule3, model, 3, seed=9, shots=range(0, 40))
    tail = simulate_batch(lattice3, schedule3, model, 3, seed=9, shots=range(20, 40))
    np.testing.assert_array_equal(whole.syndromes[20:], tail.syndromes)
    np.testing.assert_array_equal(whole.readout[20:], tail.readout)
    single = run_memory(lattice3, schedule3, model, 3, seed=9, shot=25)
    np.testing.assert_array_equal(single.rounds, whole.syndromes[25])


def test_events_json(lattice3, schedule3):
    batch = simulate_batch(lattice3, schedule3, PHENOM, 3, injections=[[FaultInjection(1, 1, measurement=5)]])
    events = extract_detection_events(batch.history(0))
    assert DetectionEventSet.from_dict(events.to_dict()) == events
    with pytest.raises(SimulationError):
        DetectionEventSet.from_dict({"schema": "other"})


@pytest.mark.parametrize("rounds", [0, -1])
def test_rejects_bad_rounds(lattice3, schedule3, rounds):
    with pytest.raises(SimulationError):
        simulate_batch(lattice3, schedule3, PHENOM, rounds)


def test_rejects_bad_injection(lattice3, schedule3):
    with pytest.raises(SimulationError):
        FaultInjection(0, CODE_X)
    with pytest.raises(SimulationError):
        simulate_batch(lattice3, schedule3, PHENOM, 2, injections=[[FaultInjection(5, CODE_X, data_qubit=0)]])
