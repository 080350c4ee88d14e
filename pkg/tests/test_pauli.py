"""Phase-free Pauli algebra against dense-matrix oracles, and the batched frame."""

from __future__ import annotations

import functools

import numpy as np
import pytest

from rsc_pauli import (
    CODE_Y,
    PauliError,
    PauliFrame,
    PauliFrameBatch,
    PauliOperator,
    commutes,
    multiply,
    propagate_through_cnot,
)

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(op: PauliOperator) -> np.ndarray:
    """Qubit 0 is the leftmost tensor factor."""
    return functools.reduce(np.kron, (_MATRICES[ch] for ch in op.to_string()))


def cnot_matrix(n: int, control: int, target: int) -> np.ndarray:
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for basis in range(dim):
        bits = [(basis >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        image = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        u[image, basis] = 1
    return u


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> bool:
    overlap = np.trace(a.conj().T @ b)
    return bool(np.isclose(abs(overlap), a.shape[0]))


def random_operator(rng: np.random.Generator, n: int) -> PauliOperator:
    return PauliOperator(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))


def test_self_product_is_identity():
    x0 = PauliOperator.single(3, 0, "X")
    assert (x0 * x0).is_identity


def test_x_times_z_is_y():
    y = PauliOperator.single(1, 0, "X") * PauliOperator.single(1, 0, "Z")
    assert y.to_string() == "Y"
    assert y.code(0) == CODE_Y


def test_string_form():
    op = PauliOperator.from_string("XIZY")
    assert op.to_string() == "XIZY"
    assert op.weight == 3
    assert op.support() == [0, 2, 3]
    with pytest.raises(PauliError):
        PauliOperator.from_string("XQ")


def test_multiply_matches_dense_product():
    rng = np.random.default_rng(5)
    for _ in range(3):
        a, b = random_operator(rng, 9), random_operator(rng, 9)
        assert equal_up_to_phase(dense(a) @ dense(b), dense(multiply(a, b)))


def test_multiply_is_associative_and_keeps_frame_type():
    rng = np.random.default_rng(6)
    a, b, c = (random_operator(rng, 12) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    frame = PauliFrame(12, a.x_bits, a.z_bits)
    assert isinstance(frame * b, PauliFrame)


def test_size_mismatch():
    with pytest.raises(PauliError):
        multiply(PauliOperator(2), PauliOperator(3))
    with pytest.raises(PauliError):
        commutes(PauliOperator(2), PauliOperator(3))


def test_commutes_basic():
    x0, z0 = PauliOperator.single(1, 0, "X"), PauliOperator.single(1, 0, "Z")
    assert commutes(x0, x0)
    assert not commutes(x0, z0)
    assert commutes(PauliOperator.from_string("XX"), PauliOperator.from_string("ZZ"))


def test_commutes_matches_dense():
    rng = np.random.default_rng(7)
    for _ in range(40):
        a, b = random_operator(rng, 4), random_operator(rng, 4)
        ab, ba = dense(a) @ dense(b), dense(b) @ dense(a)
        assert commutes(a, b) == bool(np.allclose(ab, ba))
        assert commutes(a, b) == commutes(b, a)
        assert commutes(a, a)


def test_cnot_rules():
    x_c = PauliFrame.single(2, 0, "X")
    assert propagate_through_cnot(x_c, 0, 1).to_string() == "XX"
    z_t = PauliFrame.single(2, 1, "Z")
    assert propagate_through_cnot(z_t, 0, 1).to_string() == "ZZ"
    assert propagate_through_cnot(PauliFrame.single(2, 1, "X"), 0, 1).to_string() == "IX"


def test_cnot_matches_dense_conjugation():
    rng = np.random.default_rng(8)
    for _ in range(30):
        frame = PauliFrame(4, int(rng.integers(0, 16)), int(rng.integers(0, 16)))
        control, target = rng.choice(4, size=2, replace=False).tolist()
        u = cnot_matrix(4, control, target)
        expected = u @ dense(frame) @ u.conj().T
        assert equal_up_to_phase(expected, dense(propagate_through_cnot(frame, control, target)))


def test_cnot_is_involutive_and_preserves_commutation():
    rng = np.random.default_rng(9)
    for _ in range(50):
        f = PauliFrame(6, int(rng.integers(0, 64)), int(rng.integers(0, 64)))
        g = PauliFrame(6, int(rng.integers(0, 64)), int(rng.integers(0, 64)))
        c, t = rng.choice(6, size=2, replace=False).tolist()
        assert propagate_through_cnot(propagate_through_cnot(f, c, t), c, t) == f
        assert commutes(f, g) == commutes(propagate_through_cnot(f, c, t), propagate_through_cnot(g, c, t))


def test_cnot_index_errors():
    with pytest.raises(PauliError):
        propagate_through_cnot(PauliFrame(2), 0, 0)
    with pytest.raises(PauliError):
        propagate_through_cnot(PauliFrame(2), 0, 2)


def test_batch_agrees_with_single_frames():
    rng = np.random.default_rng(10)
    n, shots = 5, 21
    codes = rng.integers(0, 4, size=(n, shots)).astype(np.uint8)
    gates = [tuple(rng.choice(n, size=2, replace=False).tolist()) for _ in range(12)]

    batch = PauliFrameBatch(n, shots)
    for q in range(n):
        batch.apply_codes(q, codes[q])
    for c, t in gates:
        batch.cnot(c, t)

    for shot in range(shots):
        x = sum(int(codes[q, shot] & 1) << q for q in range(n))
        z = sum(int((codes[q, shot] >> 1) & 1) << q for q in range(n))
        frame = PauliFrame(n, x, z)
        for c, t in gates:
            frame = propagate_through_cnot(frame, c, t)
        assert batch.frame(shot) == frame


def test_batch_measure_and_reset():
    batch = PauliFrameBatch(2, 3)
    batch.apply_codes(0, np.array([CODE_Y, 1, 2], dtype=np.uint8))
    assert batch.x_matrix([0]).tolist() == [[True, True, False]]
    assert batch.z_matrix([0]).tolist() == [[True, False, True]]
    batch.reset(0)
    assert not batch.x_matrix([0]).any()
    with pytest.raises(PauliError):
        PauliFrameBatch(2, 0)
