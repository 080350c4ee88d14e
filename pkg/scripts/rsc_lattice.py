#!/usr/bin/env python3
"""
RSC Lattice

Builds and validates the distance-d rotated surface code: data qubits on a
d x d grid, (d^2-1) weight-2/weight-4 X and Z checks, the two logical
operator chains, and the bus tiling that couples ancillas to data qubits.

Conventions (frozen for reproducible indexing):
    - Data qubit (r, c), 0 <= r, c < d, has index r*d + c. Rows grow
      downwards, so "north" is smaller r.
    - Face (r, c) is the plaquette whose north-west corner is data (r, c);
      bulk faces have 0 <= r, c <= d-2. Face (r, c) is a Z-face iff r+c is
      even, so the top-left face is a Z-face.
    - Weight-2 Z-checks sit on the top and bottom rows, weight-2 X-checks on
      the left and right columns. Z-bar is a Z chain down column 0 and
      connects the north/south Z-boundaries; X-bar is an X chain along row 0
      and connects the west/east X-boundaries.
    - Stabilizer ids follow (face row, face col) order; the ancilla of
      stabilizer s is global qubit d^2 + s.
    - Doubled coordinates put data (r, c) at (2r, 2c) and the ancilla of
      face (r, c) at (2r+1, 2c+1).

Usage:
    from rsc_lattice import build_lattice, validate_lattice
    lattice = build_lattice(5)
    assert validate_lattice(lattice).is_empty
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any

from rsc_pauli import PauliOperator, commutes
from rsc_validation_common import ValidationReport

Coord = tuple[int, int]
Edge = tuple[Coord, Coord]

# Corner offsets of a face relative to its north-west data qubit
CORNER_OFFSETS: dict[str, Coord] = {"NW": (0, 0), "NE": (0, 1), "SW": (1, 0), "SE": (1, 1)}


class LatticeError(ValueError):
    """Raised for distances that do not define a rotated surface code."""


class Basis(str, Enum):
    Z = "Z"
    X = "X"

    @property
    def other(self) -> Basis:
        return Basis.X if self is Basis.Z else Basis.Z


@dataclass(frozen=True)
class Stabilizer:
    """One parity check.

    Attributes:
        id: Index into RscLattice.stabilizers
        basis: Z or X
        support: Data-qubit indices, ascending
        ancilla_id: Global qubit index of the measuring ancilla
        face: North-west corner (r, c) of the plaquette (may be -1 on a boundary)
        corners: (compass, data index) for every corner present
    """

    id: int
    basis: Basis
    support: tuple[int, ...]
    ancilla_id: int
    face: Coord
    corners: tuple[tuple[str, int], ...]

    @property
    def weight(self) -> int:
        return len(self.support)

    def corner(self, compass: str) -> int | None:
        for name, qubit in self.corners:
            if name == compass:
                return qubit
        return None

    def operator(self, n_qubits: int) -> PauliOperator:
        return PauliOperator.on(n_qubits, self.support, self.basis.value)


@dataclass(frozen=True)
class RscLattice:
    """The rotated surface code of distance ``distance``.

    Immutable after construction; safe to share read-only across workers.
    """

    distance: int
    data_qubits: tuple[Coord, ...]
    stabilizers: tuple[Stabilizer, ...]
    boundaries: dict[str, frozenset[Edge]] = field(hash=False)
    logical_x: tuple[int, ...]
    logical_z: tuple[int, ...]

    @property
    def n_data(self) -> int:
        return len(self.data_qubits)

    @property
    def n_qubits(self) -> int:
        """Data qubits plus one ancilla per stabilizer."""
        return self.n_data + len(self.stabilizers)

    def index_of(self, coord: Coord) -> int:
        return coord[0] * self.distance + coord[1]

    def stabilizers_of(self, basis: Basis) -> tuple[Stabilizer, ...]:
        return tuple(s for s in self.stabilizers if s.basis is basis)

    def logical(self, basis: Basis) -> tuple[int, ...]:
        return self.logical_x if basis is Basis.X else self.logical_z

    def ancilla_coord(self, stabilizer: Stabilizer) -> Coord:
        """Doubled coordinate of a stabilizer's ancilla."""
        r, c = stabilizer.face
        return (2 * r + 1, 2 * c + 1)

    def data_coord(self, qubit: int) -> Coord:
        """Doubled coordinate of a data qubit."""
        r, c = self.data_qubits[qubit]
        return (2 * r, 2 * c)

    def syndrome(self, frame: PauliOperator, basis: Basis | None = None) -> list[int]:
        """Ideal syndrome bits of a data-qubit frame, in stabilizer order.

        Z-checks see the frame's X bits and X-checks its Z bits. With
        ``basis`` given only that basis is returned.
        """
        bits = []
        for s in self.stabilizers:
            if basis is not None and s.basis is not basis:
                continue
            mask = sum(1 << q for q in s.support)
            flips = frame.x_bits if s.basis is Basis.Z else frame.z_bits
            bits.append((flips & mask).bit_count() & 1)
        return bits


def _face_basis(r: int, c: int) -> Basis:
    return Basis.Z if (r + c) % 2 == 0 else Basis.X


def _face_exists(r: int, c: int, d: int) -> bool:
    """Whether plaquette (r, c) carries a check.

    Bulk plaquettes always do; boundary plaquettes only where the basis
    matches the boundary (Z on top/bottom, X on left/right).
    """
    if 0 <= r <= d - 2 and 0 <= c <= d - 2:
        return True
    basis = _face_basis(r, c)
    if r in (-1, d - 1) and 0 <= c <= d - 2:
        return basis is Basis.Z
    if c in (-1, d - 1) and 0 <= r <= d - 2:
        return basis is Basis.X
    return False


@lru_cache(maxsize=None)
def build_lattice(d: int) -> RscLattice:
    """Build the distance-``d`` rotated surface code.

    Raises:
        LatticeError: If ``d`` is even or not positive.
    """
    if not isinstance(d, int) or isinstance(d, bool):
        raise LatticeError(f"distance must be an integer, got {d!r}")
    if d < 1:
        raise LatticeError(f"distance must be positive, got {d}")
    if d % 2 == 0:
        raise LatticeError(f"distance must be odd, got {d}")

    data = tuple((r, c) for r in range(d) for c in range(d))
    n_data = d * d

    stabilizers: list[Stabilizer] = []
    for r in range(-1, d):
        for c in range(-1, d):
            if not _face_exists(r, c, d):
                continue
            corners = []
            for name, (dr, dc) in CORNER_OFFSETS.items():
                rr, cc = r + dr, c + dc
                if 0 <= rr < d and 0 <= cc < d:
                    corners.append((name, rr * d + cc))
            sid = len(stabilizers)
            stabilizers.append(
                Stabilizer(
                    id=sid,
                    basis=_face_basis(r, c),
                    support=tuple(sorted(q for _, q in corners)),
                    ancilla_id=n_data + sid,
                    face=(r, c),
                    corners=tuple(corners),
                )
            )

    if d == 1:
        point: frozenset[Edge] = frozenset({((0, 0), (0, 0))})
        boundaries = {"x_west": point, "x_east": point, "z_north": point, "z_south": point}
    else:
        boundaries = {
            "x_west": frozenset(((r, 0), (r + 1, 0)) for r in range(d - 1)),
            "x_east": frozenset(((r, d - 1), (r + 1, d - 1)) for r in range(d - 1)),
            "z_north": frozenset(((0, c), (0, c + 1)) for c in range(d - 1)),
            "z_south": frozenset(((d - 1, c), (d - 1, c + 1)) for c in range(d - 1)),
        }

    return RscLattice(
        distance=d,
        data_qubits=data,
        stabilizers=tuple(stabilizers),
        boundaries=boundaries,
        logical_x=tuple(c for c in range(d)),
        logical_z=tuple(r * d for r in range(d)),
    )


def logical_operator(lattice: RscLattice, basis: Basis | str) -> PauliOperator:
    """The weight-d logical chain of ``basis`` as a Pauli operator.

    X-bar runs along row 0 between the X-boundaries, Z-bar down column 0
    between the Z-boundaries.
    """
    basis = Basis(basis)
    return PauliOperator.on(lattice.n_data, lattice.logical(basis), basis.value)


# =============================================================================
# Bus tiling
# =============================================================================


@dataclass(frozen=True)
class Bus:
    """One quantum bus.

    Attributes:
        bus_id: Index into BusLayout.buses
        center: Doubled coordinate of the bus plaquette centre
        attached_data_qubits: Data-qubit indices
        attached_ancillas: Global ancilla qubit indices
    """

    bus_id: int
    center: Coord
    attached_data_qubits: tuple[int, ...]
    attached_ancillas: tuple[int, ...]

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.attached_data_qubits + self.attached_ancillas


@dataclass(frozen=True)
class BusLayout:
    buses: tuple[Bus, ...]
    qubit_bus_map: dict[int, frozenset[int]] = field(hash=False)

    def bus_mates(self) -> set[tuple[int, int]]:
        """Unordered pairs of qubits (global indices) sharing at least one bus."""
        pairs: set[tuple[int, int]] = set()
        for bus in self.buses:
            for a, b in itertools.combinations(sorted(bus.qubits), 2):
                pairs.add((a, b))
        return pairs


def build_bus_layout(lattice: RscLattice) -> BusLayout:
    """Tile the lattice with four-qubit buses.

    Data and ancilla qubits form a 45-degree rotated square grid in doubled
    coordinates. Buses sit on every other plaquette of that grid: the bus
    centred at (2i+1, 2j) couples data (2i, 2j) and (2i+2, 2j) with the
    ancillas at (2i+1, 2j-1) and (2i+1, 2j+1). Each interior bus couples four
    qubits and each interior qubit couples two buses.
    """
    d = lattice.distance
    ancilla_at = {lattice.ancilla_coord(s): s.ancilla_id for s in lattice.stabilizers}

    buses: list[Bus] = []
    for i in range(-1, d):
        for j in range(d):
            data = tuple(lattice.index_of((r, j)) for r in (i, i + 1) if 0 <= r < d)
            ancillas = tuple(ancilla_at[a] for a in ((2 * i + 1, 2 * j - 1), (2 * i + 1, 2 * j + 1)) if a in ancilla_at)
            if not data or not ancillas:
                continue
            buses.append(Bus(len(buses), (2 * i + 1, 2 * j), data, ancillas))

    qubit_bus_map: dict[int, set[int]] = {}
    for bus in buses:
        for q in bus.attached_data_qubits:
            qubit_bus_map.setdefault(q, set()).add(bus.bus_id)
    return BusLayout(tuple(buses), {q: frozenset(ids) for q, ids in sorted(qubit_bus_map.items())})


def is_interior_bus(lattice: RscLattice, bus: Bus) -> bool:
    """A bus whose plaquette lies wholly inside the qubit grid."""
    i = (bus.center[0] - 1) // 2
    j = bus.center[1] // 2
    return 0 <= i <= lattice.distance - 2 and 1 <= j <= lattice.distance - 2


def is_interior_data(lattice: RscLattice, qubit: int) -> bool:
    r, c = lattice.data_qubits[qubit]
    d = lattice.distance
    return 0 < r < d - 1 and 0 < c < d - 1


# =============================================================================
# Validation
# =============================================================================


def gf2_rank(vectors: list[int]) -> int:
    """Rank over GF(2) of integers read as bit-vectors."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def stabilizer_group_size(lattice: RscLattice) -> int:
    """Number of elements of the group generated by the stabilizers."""
    n = lattice.n_data
    ops = [s.operator(n) for s in lattice.stabilizers]
    return 2 ** gf2_rank([op.x_bits | (op.z_bits << n) for op in ops])


def logical_qubit_count(lattice: RscLattice) -> int:
    """Encoded qubits: data qubits minus independent generators."""
    return lattice.n_data - stabilizer_group_size(lattice).bit_length() + 1


def _chain_touches(lattice: RscLattice, chain: tuple[int, ...], boundary: str) -> bool:
    coords = {lattice.data_qubits[q] for q in chain if 0 <= q < lattice.n_data}
    return any(a in coords or b in coords for a, b in lattice.boundaries[boundary])


def _face_is_compact(lattice: RscLattice, stab: Stabilizer) -> bool:
    coords = [lattice.data_qubits[q] for q in stab.support]
    rows = [r for r, _ in coords]
    cols = [c for _, c in coords]
    if max(rows) - min(rows) > 1 or max(cols) - min(cols) > 1:
        return False
    if len(coords) == 2:
        return abs(rows[0] - rows[1]) + abs(cols[0] - cols[1]) == 1
    return True


def validate_lattice(lattice: RscLattice) -> ValidationReport:
    """List every violated lattice invariant. Empty report <=> valid lattice."""
    report = ValidationReport(subject=f"lattice d={lattice.distance}")
    d = lattice.distance
    n = lattice.n_data

    if d < 1 or d % 2 == 0:
        report.critical("distance", f"distance {d} is not a positive odd integer")
    if n != d * d:
        report.critical("data-count", f"{n} data qubits, expected {d * d}")
    if len(lattice.stabilizers) != d * d - 1:
        report.critical("stabilizer-count", f"{len(lattice.stabilizers)} stabilizers, expected {d * d - 1}")
    for basis in Basis:
        count = len(lattice.stabilizers_of(basis))
        if count != (d * d - 1) // 2:
            report.critical("basis-balance", f"{count} {basis.value}-stabilizers, expected {(d * d - 1) // 2}")

    valid_support = True
    for stab in lattice.stabilizers:
        if stab.weight not in (2, 4):
            report.major("support-size", f"stabilizer {stab.id} has weight {stab.weight}")
        if any(not 0 <= q < n for q in stab.support) or len(set(stab.support)) != stab.weight:
            report.critical("support-range", f"stabilizer {stab.id} support {stab.support} is not a set of data qubits")
            valid_support = False
        elif not _face_is_compact(lattice, stab):
            report.major("support-adjacency", f"stabilizer {stab.id} support {stab.support} is not one face")
    if not valid_support:
        return report

    ops = [s.operator(n) for s in lattice.stabilizers]
    for a, b in itertools.combinations(range(len(ops)), 2):
        if not commutes(ops[a], ops[b]):
            report.critical("commutation", f"stabilizers {a} and {b} anticommute")
    for a, b in itertools.combinations(lattice.stabilizers, 2):
        if a.basis is b.basis and len(set(a.support) & set(b.support)) >= 2:
            report.major("checkerboard", f"{a.basis.value}-faces {a.id} and {b.id} share an edge")

    vectors = [op.x_bits | (op.z_bits << n) for op in ops]
    if gf2_rank(vectors) != len(ops):
        report.critical("independence", "stabilizer generators are linearly dependent")

    chains = {Basis.X: ("x_west", "x_east"), Basis.Z: ("z_north", "z_south")}
    logicals = {}
    for basis, (start, end) in chains.items():
        chain = lattice.logical(basis)
        if any(not 0 <= q < n for q in chain):
            report.critical("logical-range", f"logical {basis.value} chain {chain} leaves the data qubits")
            continue
        op = PauliOperator.on(n, chain, basis.value)
        logicals[basis] = op
        if op.weight != d:
            report.major("logical-weight", f"logical {basis.value} has weight {op.weight}, expected {d}")
        if not (_chain_touches(lattice, chain, start) and _chain_touches(lattice, chain, end)):
            report.major("logical-boundary", f"logical {basis.value} does not connect {start} to {end}")
        for stab, stab_op in zip(lattice.stabilizers, ops):
            if not commutes(op, stab_op):
                report.critical("logical-commutation", f"logical {basis.value} anticommutes with stabilizer {stab.id}")
    if len(logicals) == 2 and commutes(logicals[Basis.X], logicals[Basis.Z]):
        report.critical("logical-anticommutation", "logical X and logical Z commute")
    return report


def validate_bus_layout(lattice: RscLattice, layout: BusLayout) -> ValidationReport:
    """Coverage and degree checks for a bus tiling."""
    report = ValidationReport(subject=f"bus layout d={lattice.distance}")
    mates = layout.bus_mates()
    for stab in lattice.stabilizers:
        for q in stab.support:
            if (min(q, stab.ancilla_id), max(q, stab.ancilla_id)) not in mates:
                report.major("coverage", f"ancilla {stab.ancilla_id} and data {q} share no bus")
    for bus in layout.buses:
        if is_interior_bus(lattice, bus) and len(bus.qubits) != 4:
            report.major("bus-degree", f"interior bus {bus.bus_id} couples {len(bus.qubits)} qubits")
    for q in range(lattice.n_data):
        if is_interior_data(lattice, q) and len(layout.qubit_bus_map.get(q, ())) != 2:
            report.major("qubit-degree", f"interior data qubit {q} couples {len(layout.qubit_bus_map.get(q, ()))} buses")
    return report


# =============================================================================
# Serialization
# =============================================================================


def lattice_to_dict(lattice: RscLattice, layout: BusLayout | None = None) -> dict[str, Any]:
    """JSON-ready dump (schema ``rsc.lattice/1``)."""
    out: dict[str, Any] = {
        "schema": "rsc.lattice/1",
        "distance": lattice.distance,
        "data_qubits": [{"index": i, "row": r, "col": c} for i, (r, c) in enumerate(lattice.data_qubits)],
        "stabilizers": [
            {
                "id": s.id,
                "basis": s.basis.value,
                "support": list(s.support),
                "ancilla_id": s.ancilla_id,
                "ancilla_coord": list(lattice.ancilla_coord(s)),
                "corners": {name: q for name, q in s.corners},
            }
            for s in lattice.stabilizers
        ],
        "boundaries": {name: sorted([list(a), list(b)] for a, b in edges) for name, edges in sorted(lattice.boundaries.items())},
        "logical_x": list(lattice.logical_x),
        "logical_z": list(lattice.logical_z),
    }
    if layout is not None:
        out["buses"] = [
            {
                "bus_id": b.bus_id,
                "center": list(b.center),
                "data_qubits": list(b.attached_data_qubits),
                "ancillas": list(b.attached_ancillas),
            }
            for b in layout.buses
        ]
    return out
