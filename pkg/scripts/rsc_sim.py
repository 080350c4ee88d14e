#!/usr/bin/env python3
"""
RSC Memory Simulation

Runs T rounds of noisy syndrome extraction on a Pauli frame and turns the
measurement record into detection events.

The memory stores logical |0> (basis Z) by default: Z-checks are then
deterministic from the first round, the final data readout is in the Z
basis, and only Z-check detectors are decoded. Basis X is the transposed
experiment.

Two propagation paths share one fault format:
    - circuit-level: faults sit on schedule locations and the frame is pushed
      through every gate of the extraction cycle (bit-packed across shots);
    - code-capacity / phenomenological: data faults land before each round
      and syndromes are read off the data frame directly, with optional
      measurement flips.

Usage:
    from rsc_sim import run_memory, extract_detection_events, score_shot
    history = run_memory(lattice, schedule, NoiseModel.circuit_level(1e-3), rounds=3, seed=11)
    events = extract_detection_events(history)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from rsc_circuit import AncillaPrep, Cnot, FaultLocation, Measure, RoundSchedule, fault_locations, idle_cycle
from rsc_lattice import Basis, RscLattice
from rsc_noise import (
    NoiseKind,
    NoiseModel,
    StreamPurpose,
    codes_from_draws,
    depolarizing_codes,
    draw_uniforms,
    location_code_table,
)
from rsc_pauli import CODE_X, CODE_Z, PauliFrame, PauliFrameBatch

logger = logging.getLogger(__name__)


class SimulationError(ValueError):
    """Raised for invalid round counts, shot ranges or fault injections."""


@dataclass(frozen=True)
class FaultInjection:
    """One explicit fault, placed instead of sampled.

    Exactly one target is set:
        location: index into fault_locations(schedule) (circuit path)
        data_qubit: data qubit hit just before the round starts
        measurement: stabilizer id whose outcome flips in this round
    """

    round: int
    code: int
    location: int | None = None
    data_qubit: int | None = None
    measurement: int | None = None

    def __post_init__(self) -> None:
        targets = [t for t in (self.location, self.data_qubit, self.measurement) if t is not None]
        if len(targets) != 1:
            raise SimulationError("a fault injection needs exactly one of location, data_qubit, measurement")
        if not 0 < self.code < 16:
            raise SimulationError(f"fault code must be nontrivial, got {self.code}")


@dataclass(eq=False)
class SyndromeHistory:
    """Measurement record of one shot.

    ``rounds`` is T x (d^2-1) syndrome flips in stabilizer order;
    ``final_data_readout`` the data flips in the memory basis; ``true_frame``
    the data frame at the end, for scoring only.
    """

    lattice: RscLattice
    basis: Basis
    kind: NoiseKind
    rounds: np.ndarray
    final_data_readout: np.ndarray
    true_frame: PauliFrame

    def __post_init__(self) -> None:
        if self.rounds.ndim != 2 or self.rounds.shape[1] != len(self.lattice.stabilizers):
            raise SimulationError(f"history shape {self.rounds.shape} does not match the lattice")
        if self.final_data_readout.shape != (self.lattice.n_data,):
            raise SimulationError("final readout does not cover every data qubit")

    @property
    def n_rounds(self) -> int:
        return int(self.rounds.shape[0])


@dataclass(frozen=True)
class DetectionEventSet:
    """Defects of one shot as (stabilizer_id, layer) pairs, sorted by (layer, stabilizer).

    Layer t < T compares round t with round t-1 (round -1 is the known
    initial value); layer T compares the last round with the syndrome implied
    by the final data readout. Code-capacity runs have the single layer 0.
    """

    basis: Basis
    layers: int
    stabilizer_ids: tuple[int, ...]
    defects: tuple[tuple[int, int], ...]

    @property
    def is_empty(self) -> bool:
        return not self.defects

    def nodes(self) -> list[int]:
        """Detector node indices (layer * detectors_per_layer + position)."""
        pos = {s: k for k, s in enumerate(self.stabilizer_ids)}
        return [t * len(self.stabilizer_ids) + pos[s] for s, t in self.defects]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "rsc.events/1",
            "basis": self.basis.value,
            "layers": self.layers,
            "stabilizer_ids": list(self.stabilizer_ids),
            "defects": [list(d) for d in self.defects],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DetectionEventSet:
        if data.get("schema") != "rsc.events/1":
            raise SimulationError(f"unsupported events schema {data.get('schema')!r}")
        defects = tuple(sorted(((int(s), int(t)) for s, t in data["defects"]), key=lambda d: (d[1], d[0])))
        return cls(Basis(data["basis"]), int(data["layers"]), tuple(int(s) for s in data["stabilizer_ids"]), defects)

    @classmethod
    def from_matrix(cls, basis: Basis, stabilizer_ids: tuple[int, ...], matrix: np.ndarray) -> DetectionEventSet:
        """Build from a (layers, detectors) boolean matrix."""
        layers, _ = matrix.shape
        defects = tuple((stabilizer_ids[k], int(t)) for t, k in zip(*np.nonzero(matrix)))
        return cls(basis, layers, stabilizer_ids, defects)


def detector_stabilizers(lattice: RscLattice, basis: Basis) -> tuple[int, ...]:
    """Stabilizer ids whose defects are decoded in a ``basis`` memory."""
    return tuple(s.id for s in lattice.stabilizers_of(basis))


def detector_layers(kind: NoiseKind, rounds: int) -> int:
    return 1 if kind is NoiseKind.CODE_CAPACITY else rounds + 1


def _parity_matrix(lattice: RscLattice, stabilizer_ids: Iterable[int]) -> np.ndarray:
    ids = list(stabilizer_ids)
    h = np.zeros((len(ids), lattice.n_data), dtype=np.uint8)
    for row, sid in enumerate(ids):
        h[row, list(lattice.stabilizers[sid].support)] = 1
    return h


# =============================================================================
# Batch
# =============================================================================


@dataclass(eq=False)
class ShotBatch:
    """Simulation output for many shots.

    Attributes:
        syndromes: (S, T, n_stab) uint8 syndrome flips
        data_x, data_z: (S, n_data) bool final data frame
    """

    lattice: RscLattice
    basis: Basis
    kind: NoiseKind
    rounds: int
    first_shot: int
    syndromes: np.ndarray
    data_x: np.ndarray
    data_z: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.syndromes.shape[0])

    @property
    def readout(self) -> np.ndarray:
        """Final data readout flips in the memory basis."""
        return self.data_x if self.basis is Basis.Z else self.data_z

    def detection_events(self) -> np.ndarray:
        """(S, layers, detectors) boolean defect matrix."""
        ids = detector_stabilizers(self.lattice, self.basis)
        syn = self.syndromes[:, :, list(ids)].astype(bool)
        if self.kind is NoiseKind.CODE_CAPACITY:
            return syn[:, :1, :]
        h = _parity_matrix(self.lattice, ids)
        final = (self.readout.astype(np.int64) @ h.T.astype(np.int64)) % 2 == 1
        zero = np.zeros((self.shots, 1, len(ids)), dtype=bool)
        full = np.concatenate([zero, syn, final[:, None, :]], axis=1)
        return full[:, 1:, :] ^ full[:, :-1, :]

    def logical_flips(self) -> np.ndarray:
        """(S,) parity of the final frame against the stored logical's conjugate."""
        chain = list(self.lattice.logical(self.basis))
        return (np.sum(self.readout[:, chain], axis=1) % 2).astype(np.uint8)

    def history(self, index: int) -> SyndromeHistory:
        x = sum(1 << q for q in np.flatnonzero(self.data_x[index]).tolist())
        z = sum(1 << q for q in np.flatnonzero(self.data_z[index]).tolist())
        return SyndromeHistory(
            lattice=self.lattice,
            basis=self.basis,
            kind=self.kind,
            rounds=self.syndromes[index].copy(),
            final_data_readout=self.readout[index].astype(np.uint8),
            true_frame=PauliFrame(self.lattice.n_data, x, z),
        )


def _check_rounds(rounds: int) -> None:
    if not isinstance(rounds, int) or isinstance(rounds, bool) or rounds < 1:
        raise SimulationError(f"rounds must be a positive integer, got {rounds!r}")


def noise_schedule(lattice: RscLattice, schedule: RoundSchedule) -> RoundSchedule:
    return schedule if schedule.time_steps else idle_cycle(lattice)


def simulate_batch(
    lattice: RscLattice,
    schedule: RoundSchedule,
    model: NoiseModel,
    rounds: int,
    seed: int = 0,
    shots: range | int = 1,
    basis: Basis = Basis.Z,
    injections: Sequence[Sequence[FaultInjection]] | None = None,
) -> ShotBatch:
    """Simulate a block of shots.

    With ``injections`` (one fault list per shot) no noise is sampled; the
    model then only selects the propagation path. Otherwise shot i draws from
    its own stream derived from (seed, i), for every i in ``shots``.
    """
    _check_rounds(rounds)
    basis = Basis(basis)
    if isinstance(shots, int):
        shots = range(shots)
    if injections is not None:
        shots = range(len(injections))
    if len(shots) < 1:
        raise SimulationError("at least one shot is required")

    circuit = model.kind is NoiseKind.CIRCUIT_LEVEL
    sched = noise_schedule(lattice, schedule)
    locations = fault_locations(sched) if circuit else []
    n_shots, n_data, n_stab = len(shots), lattice.n_data, len(lattice.stabilizers)

    loc_codes = np.zeros((n_shots, rounds, len(locations)), dtype=np.uint8)
    data_codes = np.zeros((n_shots, rounds, n_data), dtype=np.uint8)
    meas_flips = np.zeros((n_shots, rounds, n_stab), dtype=np.uint8)

    if injections is not None:
        _place_injections(injections, rounds, len(locations), n_data, n_stab, loc_codes, data_codes, meas_flips)
    elif model.kind is NoiseKind.CODE_CAPACITY:
        u = draw_uniforms(seed, shots, (1, n_data))
        data_codes[:, 0, :] = depolarizing_codes(u[:, 0, :], model.p)
    elif model.kind is NoiseKind.PHENOMENOLOGICAL:
        u = draw_uniforms(seed, shots, (rounds, n_data + n_stab))
        data_codes[:] = depolarizing_codes(u[:, :, :n_data], model.p)
        meas_flips[:] = u[:, :, n_data:] < model.measurement_rate
    else:
        table, sizes = location_code_table(locations)
        u = draw_uniforms(seed, shots, (rounds, len(locations)))
        loc_codes[:] = codes_from_draws(u, model.p, table, sizes)
        if model.reset_flip > 0 and n_stab:
            _add_reset_flips(lattice, locations, model.reset_flip, seed, shots, rounds, loc_codes)

    logger.debug("simulating %d shots from %d: d=%d T=%d model=%s", n_shots, shots.start, lattice.distance, rounds, model.kind.value)
    if circuit:
        syndromes, data_x, data_z = _propagate_circuit(lattice, sched, locations, rounds, loc_codes, data_codes, meas_flips)
    else:
        syndromes, data_x, data_z = _propagate_ideal(lattice, rounds, data_codes, meas_flips)

    return ShotBatch(lattice, basis, model.kind, rounds, shots.start, syndromes, data_x, data_z)


def _place_injections(
    injections: Sequence[Sequence[FaultInjection]],
    rounds: int,
    n_locations: int,
    n_data: int,
    n_stab: int,
    loc_codes: np.ndarray,
    data_codes: np.ndarray,
    meas_flips: np.ndarray,
) -> None:
    for shot, faults in enumerate(injections):
        for f in faults:
            if not 0 <= f.round < rounds:
                raise SimulationError(f"injection round {f.round} outside 0..{rounds - 1}")
            if f.location is not None:
                if not 0 <= f.location < n_locations:
                    raise SimulationError(f"location {f.location} is not a fault location of this path")
                loc_codes[shot, f.round, f.location] ^= f.code
            elif f.data_qubit is not None:
                if not 0 <= f.data_qubit < n_data:
                    raise SimulationError(f"data qubit {f.data_qubit} out of range")
                data_codes[shot, f.round, f.data_qubit] ^= f.code & 3
            else:
                assert f.measurement is not None
                if not 0 <= f.measurement < n_stab:
                    raise SimulationError(f"stabilizer {f.measurement} out of range")
                meas_flips[shot, f.round, f.measurement] ^= 1


def _add_reset_flips(
    lattice: RscLattice,
    locations: list[FaultLocation],
    rate: float,
    seed: int,
    shots: range,
    rounds: int,
    loc_codes: np.ndarray,
) -> None:
    n_data = lattice.n_data
    prep_index = {loc.gate.qubit - n_data: loc.index for loc in locations if isinstance(loc.gate, AncillaPrep)}
    flips = draw_uniforms(seed, shots, (rounds, len(lattice.stabilizers)), StreamPurpose.RESETS) < rate
    for stab in lattice.stabilizers:
        flip_code = CODE_X if stab.basis is Basis.Z else CODE_Z
        col = prep_index[stab.id]
        loc_codes[:, :, col] ^= np.where(flips[:, :, stab.id], flip_code, 0).astype(np.uint8)


def _propagate_ideal(
    lattice: RscLattice, rounds: int, data_codes: np.ndarray, meas_flips: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_shots = data_codes.shape[0]
    h = _parity_matrix(lattice, range(len(lattice.stabilizers))).astype(np.int64)
    is_z = np.array([s.basis is Basis.Z for s in lattice.stabilizers], dtype=bool)
    x = np.zeros((n_shots, lattice.n_data), dtype=np.int64)
    z = np.zeros_like(x)
    syndromes = np.zeros((n_shots, rounds, len(lattice.stabilizers)), dtype=np.uint8)
    for t in range(rounds):
        x ^= data_codes[:, t, :] & 1
        z ^= (data_codes[:, t, :] >> 1) & 1
        sx = (x @ h.T) % 2
        sz = (z @ h.T) % 2
        syndromes[:, t, :] = np.where(is_z, sx, sz) ^ meas_flips[:, t, :]
    return syndromes, x.astype(bool), z.astype(bool)


def _pack(mask: np.ndarray) -> np.ndarray:
    """(S, L) mask -> (n_words, L) packed across shots."""
    return np.packbits(mask.astype(bool), axis=0, bitorder="little")


def _propagate_circuit(
    lattice: RscLattice,
    schedule: RoundSchedule,
    locations: list[FaultLocation],
    rounds: int,
    loc_codes: np.ndarray,
    data_codes: np.ndarray,
    meas_flips: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_shots = loc_codes.shape[0]
    n_data, n_stab = lattice.n_data, len(lattice.stabilizers)
    frame = PauliFrameBatch(schedule.n_qubits, n_shots)
    n_words = frame.x.shape[1]
    record = np.zeros((rounds, n_stab, n_words), dtype=np.uint8)

    is_cnot = np.array([loc.kind == "cnot" for loc in locations], dtype=bool)
    by_step: dict[int, list[FaultLocation]] = {}
    for loc in locations:
        by_step.setdefault(loc.time_step, []).append(loc)

    for t in range(rounds):
        codes = loc_codes[:, t, :]
        first = np.where(is_cnot, codes >> 2, codes)
        second = np.where(is_cnot, codes & 3, 0)
        fx, fz = _pack(first & 1), _pack(first & 2)
        sx, sz = _pack(second & 1), _pack(second & 2)
        dx, dz = _pack(data_codes[:, t, :] & 1), _pack(data_codes[:, t, :] & 2)
        mf = _pack(meas_flips[:, t, :])

        for q in range(n_data):
            frame.xor_x(q, dx[:, q])
            frame.xor_z(q, dz[:, q])

        for step_index, step in enumerate(schedule.time_steps):
            for gate in step:
                if isinstance(gate, AncillaPrep):
                    frame.reset(gate.qubit)
                elif isinstance(gate, Cnot):
                    frame.cnot(gate.control, gate.target)
                elif isinstance(gate, Measure):
                    flips = frame.measure_z(gate.qubit) if gate.basis is Basis.Z else frame.measure_x(gate.qubit)
                    record[t, gate.stabilizer_id] = flips ^ mf[:, gate.stabilizer_id]
            for loc in by_step.get(step_index, ()):
                i = loc.index
                if loc.kind == "measure":
                    record[t, loc.gate.stabilizer_id] ^= fx[:, i]
                    continue
                frame.xor_x(loc.qubits[0], fx[:, i])
                frame.xor_z(loc.qubits[0], fz[:, i])
                if loc.kind == "cnot":
                    frame.xor_x(loc.qubits[1], sx[:, i])
                    frame.xor_z(loc.qubits[1], sz[:, i])

    syndromes = np.zeros((n_shots, rounds, n_stab), dtype=np.uint8)
    for t in range(rounds):
        for s in range(n_stab):
            syndromes[:, t, s] = np.unpackbits(record[t, s], count=n_shots, bitorder="little")
    data_x = frame.x_matrix(range(n_data)).T
    data_z = frame.z_matrix(range(n_data)).T
    return syndromes, data_x, data_z


# =============================================================================
# Single-shot views
# =============================================================================


def run_memory(
    lattice: RscLattice,
    schedule: RoundSchedule,
    model: NoiseModel,
    rounds: int,
    seed: int,
    shot: int = 0,
    basis: Basis = Basis.Z,
) -> SyndromeHistory:
    """One memory experiment of ``rounds`` cycles; deterministic in (seed, shot)."""
    batch = simulate_batch(lattice, schedule, model, rounds, seed=seed, shots=range(shot, shot + 1), basis=basis)
    return batch.history(0)


def extract_detection_events(history: SyndromeHistory) -> DetectionEventSet:
    """Defects where a detector's syndrome bit changed between consecutive layers."""
    lattice = history.lattice
    batch = ShotBatch(
        lattice=lattice,
        basis=history.basis,
        kind=history.kind,
        rounds=history.n_rounds,
        first_shot=0,
        syndromes=history.rounds[None, :, :],
        data_x=_frame_bits(history.true_frame.x_bits, lattice.n_data)[None, :],
        data_z=_frame_bits(history.true_frame.z_bits, lattice.n_data)[None, :],
    )
    ids = detector_stabilizers(lattice, history.basis)
    return DetectionEventSet.from_matrix(history.basis, ids, batch.detection_events()[0])


def _frame_bits(bits: int, n: int) -> np.ndarray:
    return np.array([(bits >> q) & 1 for q in range(n)], dtype=bool)


def logical_flip(lattice: RscLattice, frame: PauliFrame, basis: Basis = Basis.Z) -> int:
    """1 iff ``frame`` flips the stored logical (anticommutes with its logical operator)."""
    mask = sum(1 << q for q in lattice.logical(basis))
    flips = frame.x_bits if basis is Basis.Z else frame.z_bits
    return (flips & mask).bit_count() & 1


def score_shot(lattice: RscLattice, history: SyndromeHistory, correction_parity: int) -> bool:
    """True iff the frame and the decoder's correction together flip the logical."""
    return bool(logical_flip(lattice, history.true_frame, history.basis) ^ (correction_parity & 1))
