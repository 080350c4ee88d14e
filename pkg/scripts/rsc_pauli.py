#!/usr/bin/env python3
"""
RSC Pauli Algebra

Phase-free Pauli operators and the Pauli frame that records accumulated
errors and classical corrections.

A PauliOperator keeps two bit-vectors packed into Python integers: qubit i
carries X iff bit i of ``x_bits`` is set, Z iff bit i of ``z_bits`` is set,
and Y iff both. Products are XORs and the symplectic form is a popcount of
ANDs, so every operation is word-parallel.

PauliFrameBatch holds the same frame for many shots, bit-packed across shots
with numpy, and is what the Monte-Carlo simulator propagates.

Pauli codes used by the noise and simulation modules are symplectic:
code = x + 2*z, i.e. I=0, X=1, Z=2, Y=3. A two-qubit code is 4*a + b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, TypeVar

import numpy as np

# Symplectic single-qubit codes
CODE_I = 0
CODE_X = 1
CODE_Z = 2
CODE_Y = 3

_CODE_TO_CHAR = {CODE_I: "I", CODE_X: "X", CODE_Z: "Z", CODE_Y: "Y"}
_CHAR_TO_CODE = {v: k for k, v in _CODE_TO_CHAR.items()}


class PauliError(ValueError):
    """Raised on size mismatches or out-of-range qubit indices."""


P = TypeVar("P", bound="PauliOperator")


@dataclass(frozen=True)
class PauliOperator:
    """Phase-free n-qubit Pauli operator."""

    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 0:
            raise PauliError(f"n_qubits must be >= 0, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise PauliError(f"bit-vectors exceed {self.n_qubits} qubits")

    @classmethod
    def identity(cls: type[P], n_qubits: int) -> P:
        return cls(n_qubits)

    @classmethod
    def single(cls: type[P], n_qubits: int, qubit: int, pauli: str) -> P:
        """Single-qubit Pauli ``pauli`` ('X', 'Y' or 'Z') on ``qubit``."""
        _check_index(qubit, n_qubits)
        code = _CHAR_TO_CODE[pauli.upper()]
        return cls(n_qubits, (code & 1) << qubit, ((code >> 1) & 1) << qubit)

    @classmethod
    def on(cls: type[P], n_qubits: int, qubits: Iterable[int], pauli: str) -> P:
        """The same single-qubit Pauli on every qubit of ``qubits``."""
        code = _CHAR_TO_CODE[pauli.upper()]
        mask = 0
        for q in qubits:
            _check_index(q, n_qubits)
            mask ^= 1 << q
        return cls(n_qubits, mask if code & 1 else 0, mask if code & 2 else 0)

    @classmethod
    def from_string(cls: type[P], text: str) -> P:
        """Parse 'XIZY'-style strings; character i acts on qubit i."""
        x = z = 0
        for i, ch in enumerate(text.upper()):
            if ch not in _CHAR_TO_CODE:
                raise PauliError(f"invalid Pauli character {ch!r}")
            code = _CHAR_TO_CODE[ch]
            x |= (code & 1) << i
            z |= ((code >> 1) & 1) << i
        return cls(len(text), x, z)

    def to_string(self) -> str:
        return "".join(_CODE_TO_CHAR[self.code(i)] for i in range(self.n_qubits))

    def code(self, qubit: int) -> int:
        """Symplectic code of the Pauli acting on ``qubit``."""
        return ((self.x_bits >> qubit) & 1) | (((self.z_bits >> qubit) & 1) << 1)

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def support(self) -> list[int]:
        return _bit_indices(self.x_bits | self.z_bits)

    def x_support(self) -> list[int]:
        return _bit_indices(self.x_bits)

    def z_support(self) -> list[int]:
        return _bit_indices(self.z_bits)

    def __mul__(self: P, other: PauliOperator) -> P:
        return multiply(self, other)

    def __str__(self) -> str:
        return self.to_string()


@dataclass(frozen=True)
class PauliFrame(PauliOperator):
    """Classical record of physical errors and decoder corrections.

    Corrections compose by XOR into this record; nothing is ever applied to
    simulated hardware.
    """


def _check_index(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise PauliError(f"qubit index {qubit} out of range for {n_qubits} qubits")


def _bit_indices(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def _check_sizes(a: PauliOperator, b: PauliOperator) -> None:
    if a.n_qubits != b.n_qubits:
        raise PauliError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def multiply(a: P, b: PauliOperator) -> P:
    """Phase-free product: componentwise XOR. The result has the type of ``a``."""
    _check_sizes(a, b)
    return type(a)(a.n_qubits, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits)


def symplectic_product(a: PauliOperator, b: PauliOperator) -> int:
    """Parity of sum_i (a.x_i b.z_i + a.z_i b.x_i)."""
    _check_sizes(a, b)
    return ((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) & 1


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    return symplectic_product(a, b) == 0


def propagate_through_cnot(frame: P, control: int, target: int) -> P:
    """Conjugate ``frame`` by CNOT(control -> target).

    X on the control copies to the target; Z on the target copies to the
    control. Applying it twice restores the frame.
    """
    _check_index(control, frame.n_qubits)
    _check_index(target, frame.n_qubits)
    if control == target:
        raise PauliError("control and target must differ")
    x, z = frame.x_bits, frame.z_bits
    x ^= ((x >> control) & 1) << target
    z ^= ((z >> target) & 1) << control
    return type(frame)(frame.n_qubits, x, z)


# =============================================================================
# Batched frame
# =============================================================================


def pack_shots(mask: np.ndarray) -> np.ndarray:
    """Pack a boolean per-shot mask into uint8 words (little bit order)."""
    return np.packbits(np.asarray(mask, dtype=bool), bitorder="little")


def unpack_shots(words: np.ndarray, shots: int) -> np.ndarray:
    """Inverse of pack_shots."""
    return np.unpackbits(words, count=shots, bitorder="little").astype(bool)


class PauliFrameBatch:
    """Pauli frames of ``shots`` independent shots, bit-packed across shots.

    Row q of ``x``/``z`` holds qubit q's X/Z bit for every shot, eight shots
    per uint8 word, so gate propagation is one XOR per row.
    """

    def __init__(self, n_qubits: int, shots: int) -> None:
        if shots < 1:
            raise PauliError(f"shots must be >= 1, got {shots}")
        self.n_qubits = n_qubits
        self.shots = shots
        n_words = (shots + 7) // 8
        self.x = np.zeros((n_qubits, n_words), dtype=np.uint8)
        self.z = np.zeros((n_qubits, n_words), dtype=np.uint8)

    def apply_codes(self, qubit: int, codes: np.ndarray) -> None:
        """XOR per-shot symplectic codes (uint8 array of length ``shots``) onto ``qubit``."""
        self.x[qubit] ^= pack_shots(codes & 1)
        self.z[qubit] ^= pack_shots(codes & 2)

    def xor_x(self, qubit: int, words: np.ndarray) -> None:
        self.x[qubit] ^= words

    def xor_z(self, qubit: int, words: np.ndarray) -> None:
        self.z[qubit] ^= words

    def cnot(self, control: int, target: int) -> None:
        self.x[target] ^= self.x[control]
        self.z[control] ^= self.z[target]

    def reset(self, qubit: int) -> None:
        self.x[qubit] = 0
        self.z[qubit] = 0

    def measure_z(self, qubit: int) -> np.ndarray:
        """Packed outcome flips of a Z-basis measurement (the X bits)."""
        return self.x[qubit].copy()

    def measure_x(self, qubit: int) -> np.ndarray:
        """Packed outcome flips of an X-basis measurement (the Z bits)."""
        return self.z[qubit].copy()

    def x_matrix(self, qubits: Iterable[int]) -> np.ndarray:
        """Unpacked X bits as a bool matrix (len(qubits), shots)."""
        return np.array([unpack_shots(self.x[q], self.shots) for q in qubits], dtype=bool).reshape(-1, self.shots)

    def z_matrix(self, qubits: Iterable[int]) -> np.ndarray:
        """Unpacked Z bits as a bool matrix (len(qubits), shots)."""
        return np.array([unpack_shots(self.z[q], self.shots) for q in qubits], dtype=bool).reshape(-1, self.shots)

    def frame(self, shot: int, qubits: list[int] | None = None) -> PauliFrame:
        """The frame of one shot restricted to ``qubits`` (re-indexed 0..k-1)."""
        qubits = list(range(self.n_qubits)) if qubits is None else qubits
        byte, bit = divmod(shot, 8)
        x = z = 0
        for i, q in enumerate(qubits):
            x |= int((self.x[q, byte] >> bit) & 1) << i
            z |= int((self.z[q, byte] >> bit) & 1) << i
        return PauliFrame(len(qubits), x, z)
