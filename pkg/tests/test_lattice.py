"""Lattice geometry, logical operators, bus tiling and lattice validation."""

from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest
from conftest import face_stabilizer

from rsc_lattice import (
    Basis,
    LatticeError,
    build_bus_layout,
    build_lattice,
    is_interior_bus,
    lattice_to_dict,
    logical_operator,
    logical_qubit_count,
    stabilizer_group_size,
    validate_bus_layout,
    validate_lattice,
)
from rsc_pauli import commutes

ODD = (1, 3, 5, 7, 9)


@pytest.mark.parametrize("d", ODD)
def test_counts(d):
    lattice = build_lattice(d)
    assert lattice.n_data == d * d
    assert len(lattice.stabilizers) == d * d - 1
    assert len(lattice.stabilizers_of(Basis.Z)) == (d * d - 1) // 2
    assert len(lattice.stabilizers_of(Basis.X)) == (d * d - 1) // 2
    assert {s.weight for s in lattice.stabilizers} <= {2, 4}


def test_d5_example(lattice5):
    assert lattice5.n_data == 25
    assert len(lattice5.stabilizers_of(Basis.Z)) == 12
    assert len(lattice5.stabilizers_of(Basis.X)) == 12


def test_d1_is_a_bare_qubit():
    lattice = build_lattice(1)
    assert lattice.n_data == 1
    assert lattice.stabilizers == ()
    assert logical_operator(lattice, Basis.Z).to_string() == "Z"
    assert logical_operator(lattice, Basis.X).to_string() == "X"
    assert validate_lattice(lattice).is_empty


@pytest.mark.parametrize("d", [0, 2, 4, -1, -3])
def test_rejects_bad_distance(d):
    with pytest.raises(LatticeError):
        build_lattice(d)


def test_deterministic_indexing():
    a, b = build_lattice(5), build_lattice.__wrapped__(5)
    assert a.stabilizers == b.stabilizers
    assert a.logical_x == b.logical_x and a.logical_z == b.logical_z


def test_top_left_face_is_z(lattice5):
    assert face_stabilizer(lattice5, (0, 0)).basis is Basis.Z
    # weight-2 Z checks on the top/bottom rows, X checks on the left/right columns
    for s in lattice5.stabilizers:
        r, c = s.face
        if r in (-1, 4):
            assert s.basis is Basis.Z and s.weight == 2
        if c in (-1, 4):
            assert s.basis is Basis.X and s.weight == 2


@pytest.mark.parametrize("d", (3, 5, 7))
def test_stabilizers_commute_pairwise(d):
    lattice = build_lattice(d)
    ops = [s.operator(lattice.n_data) for s in lattice.stabilizers]
    for i, a in enumerate(ops):
        for b in ops[i + 1 :]:
            assert commutes(a, b)


@pytest.mark.parametrize("d", (3, 5, 7))
def test_checkerboard(d):
    lattice = build_lattice(d)
    for i, a in enumerate(lattice.stabilizers):
        for b in lattice.stabilizers[i + 1 :]:
            if a.basis is b.basis:
                assert len(set(a.support) & set(b.support)) < 2


@pytest.mark.parametrize("d", (1, 3, 5, 7))
def test_logical_operators(d):
    lattice = build_lattice(d)
    x_bar = logical_operator(lattice, Basis.X)
    z_bar = logical_operator(lattice, "Z")
    assert x_bar.weight == d and z_bar.weight == d
    assert not commutes(x_bar, z_bar)
    for s in lattice.stabilizers:
        op = s.operator(lattice.n_data)
        assert commutes(x_bar, op)
        assert commutes(z_bar, op)


def test_x_logical_spans_x_boundaries(lattice3):
    rows = {lattice3.data_qubits[q][0] for q in lattice3.logical_x}
    cols = {lattice3.data_qubits[q][1] for q in lattice3.logical_x}
    assert rows == {0}
    assert cols == {0, 1, 2}


def _parity_table(bits: int) -> np.ndarray:
    table = np.zeros(1 << bits, dtype=np.uint8)
    for v in range(1 << bits):
        table[v] = bin(v).count("1") & 1
    return table


def test_d3_group_and_centralizer(lattice3):
    assert stabilizer_group_size(lattice3) == 2**8
    assert logical_qubit_count(lattice3) == 1

    # Every phase-free 9-qubit Pauli, kept if it commutes with all 8 generators
    n = lattice3.n_data
    parity = _parity_table(n)
    xs, zs = np.meshgrid(np.arange(1 << n), np.arange(1 << n), indexing="ij")
    ok = np.ones(xs.shape, dtype=bool)
    for s in lattice3.stabilizers:
        op = s.operator(n)
        ok &= (parity[xs & op.z_bits] ^ parity[zs & op.x_bits]) == 0
    centralizer = int(ok.sum())
    # centralizer / stabilizer group = the four logical Paulis of one qubit
    assert centralizer == 4 * stabilizer_group_size(lattice3)


@pytest.mark.parametrize("d", ODD)
def test_validate_clean(d):
    assert validate_lattice(build_lattice(d)).is_empty


def test_validate_flags_corrupted_support(lattice3):
    z = face_stabilizer(lattice3, (0, 0))
    x = face_stabilizer(lattice3, (0, 1))
    shared = sorted(set(z.support) & set(x.support))
    assert len(shared) == 2
    # swap one shared qubit for a qubit outside the Z face
    outside = next(q for q in range(lattice3.n_data) if q not in z.support and q not in x.support)
    corrupted = dataclasses.replace(x, support=tuple(sorted((set(x.support) - {shared[0]}) | {outside})))
    stabilizers = tuple(corrupted if s.id == x.id else s for s in lattice3.stabilizers)
    report = validate_lattice(dataclasses.replace(lattice3, stabilizers=stabilizers))
    assert "commutation" in report.checks()
    a, b = sorted((z.id, x.id))
    assert any(r.message == f"stabilizers {a} and {b} anticommute" for r in report.results)
    assert not report.is_valid


def test_validate_flags_truncated_logical(lattice3):
    broken = dataclasses.replace(lattice3, logical_x=lattice3.logical_x[:-1])
    report = validate_lattice(broken)
    assert "logical-weight" in report.checks()
    assert "logical-boundary" in report.checks()


def test_bus_layout_d1_is_empty():
    layout = build_bus_layout(build_lattice(1))
    assert layout.buses == ()


@pytest.mark.parametrize("d", (3, 5, 7, 9))
def test_bus_layout_invariants(d):
    lattice = build_lattice(d)
    layout = build_bus_layout(lattice)
    assert validate_bus_layout(lattice, layout).is_empty


def test_interior_buses_couple_four_qubits(lattice5, layout5):
    interior = [b for b in layout5.buses if is_interior_bus(lattice5, b)]
    assert interior
    for bus in interior:
        assert len(bus.attached_data_qubits) == 2
        assert len(bus.attached_ancillas) == 2


def test_every_check_pair_shares_a_bus(lattice3):
    mates = build_bus_layout(lattice3).bus_mates()
    for s in lattice3.stabilizers:
        for q in s.support:
            assert (min(q, s.ancilla_id), max(q, s.ancilla_id)) in mates


def test_lattice_json(lattice5, layout5):
    data = json.loads(json.dumps(lattice_to_dict(lattice5, layout5)))
    assert data["schema"] == "rsc.lattice/1"
    assert len(data["data_qubits"]) == 25
    assert len(data["stabilizers"]) == 24
    assert data["logical_z"] == [0, 5, 10, 15, 20]
    assert len(data["buses"]) == len(layout5.buses)
