#!/usr/bin/env python3
"""
RSC Noise Models

Pauli fault sampling under the code-capacity, phenomenological and
circuit-level models, all driven by one physical rate p (plus the
measurement-flip rate q for the phenomenological model).

Randomness is counter-based: every (seed, purpose, shot) triple owns an
independent Philox stream, so a shot's faults never depend on which worker
ran it or in what order. Within a shot, draws are taken in (round, location)
order, one uniform per location. A location faults iff u < p and the fault
is domain[floor(u / p * len(domain))], which makes the fault law uniform
over the domain and keeps a single draw per location.

Usage:
    from rsc_noise import NoiseModel, shot_stream, sample_circuit_level
    model = NoiseModel.from_preset("cr-gate")
    faults = sample_circuit_level(schedule, model.p, shot_stream(seed=7, shot=0))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from rsc_circuit import FaultLocation, RoundSchedule, SINGLE_QUBIT_DOMAIN, fault_locations
from rsc_lattice import RscLattice
from rsc_pauli import PauliFrame
from rsc_thresholds import NOISE_PRESETS


class NoiseError(ValueError):
    """Raised for probabilities outside [0, 1] or unknown models/presets."""


class NoiseKind(str, Enum):
    CODE_CAPACITY = "code-capacity"
    PHENOMENOLOGICAL = "phenom"
    CIRCUIT_LEVEL = "circuit"


class StreamPurpose(IntEnum):
    """First spawn-key component; separates draws made for different ends."""

    FAULTS = 0
    RESETS = 1
    FREQUENCIES = 2
    SEED = 3


def _check_probability(name: str, value: float) -> float:
    if not isinstance(value, (int, float)) or math.isnan(value) or not 0.0 <= value <= 1.0:
        raise NoiseError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


@dataclass(frozen=True)
class NoiseModel:
    """One of the three standard Pauli noise models.

    Attributes:
        kind: Which model
        p: Physical error rate
        q: Measurement-flip rate (phenomenological only; defaults to p)
        reset_flip: Extra flip of each prepared ancilla (circuit-level only)
    """

    kind: NoiseKind
    p: float
    q: float | None = None
    reset_flip: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        _check_probability("p", self.p)
        if self.q is not None:
            _check_probability("q", self.q)
        _check_probability("reset_flip", self.reset_flip)
        if self.kind is NoiseKind.PHENOMENOLOGICAL and self.q is None:
            object.__setattr__(self, "q", float(self.p))

    @classmethod
    def code_capacity(cls, p: float) -> NoiseModel:
        return cls(NoiseKind.CODE_CAPACITY, p)

    @classmethod
    def phenomenological(cls, p: float, q: float | None = None) -> NoiseModel:
        return cls(NoiseKind.PHENOMENOLOGICAL, p, q)

    @classmethod
    def circuit_level(cls, p: float, reset_flip: float = 0.0) -> NoiseModel:
        return cls(NoiseKind.CIRCUIT_LEVEL, p, reset_flip=reset_flip)

    @classmethod
    def from_preset(cls, name: str) -> NoiseModel:
        """Circuit-level model at a named hardware gate-error figure."""
        try:
            return cls.circuit_level(NOISE_PRESETS[name])
        except KeyError:
            raise NoiseError(f"unknown preset {name!r}; choose from {', '.join(sorted(NOISE_PRESETS))}") from None

    @property
    def measurement_rate(self) -> float:
        """Syndrome-bit flip probability per measurement."""
        if self.kind is NoiseKind.CODE_CAPACITY:
            return 0.0
        if self.kind is NoiseKind.PHENOMENOLOGICAL:
            assert self.q is not None
            return self.q
        return self.p

    def with_p(self, p: float) -> NoiseModel:
        """Same model at another rate; a phenomenological q that tracked p keeps tracking it."""
        q = self.q
        if self.kind is NoiseKind.PHENOMENOLOGICAL and self.q == self.p:
            q = None
        return NoiseModel(self.kind, p, q, self.reset_flip)

    def to_dict(self) -> dict[str, object]:
        return {"kind": self.kind.value, "p": self.p, "q": self.q, "reset_flip": self.reset_flip}


# =============================================================================
# Streams
# =============================================================================


def shot_stream(seed: int, shot: int, purpose: StreamPurpose = StreamPurpose.FAULTS) -> np.random.Generator:
    """Independent Philox stream for one shot."""
    if seed < 0 or shot < 0:
        raise NoiseError(f"seed and shot must be non-negative, got seed={seed} shot={shot}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(purpose), shot))))


def draw_uniforms(seed: int, shots: range, shape: tuple[int, ...], purpose: StreamPurpose = StreamPurpose.FAULTS) -> np.ndarray:
    """Stack one ``shape`` block of uniforms per shot: result is (len(shots), *shape)."""
    out = np.empty((len(shots), *shape), dtype=np.float64)
    for i, shot in enumerate(shots):
        out[i] = shot_stream(seed, shot, purpose).random(shape)
    return out


def select_faults(u: np.ndarray, p: float, domain_sizes: np.ndarray | int) -> np.ndarray:
    """Fault index per draw: -1 for no fault, else an index into the location's domain."""
    hit = u < p
    if p <= 0.0:
        return np.full(u.shape, -1, dtype=np.int64)
    idx = np.minimum((u / p * domain_sizes).astype(np.int64), np.asarray(domain_sizes) - 1)
    return np.where(hit, idx, -1)


def location_code_table(locations: list[FaultLocation]) -> tuple[np.ndarray, np.ndarray]:
    """(codes, sizes): codes[l, k] is the k-th fault code of location l, padded with 0."""
    width = max((len(loc.domain) for loc in locations), default=1)
    codes = np.zeros((len(locations), width), dtype=np.uint8)
    sizes = np.ones(len(locations), dtype=np.int64)
    for i, loc in enumerate(locations):
        codes[i, : len(loc.domain)] = loc.domain
        sizes[i] = len(loc.domain)
    return codes, sizes


def codes_from_draws(u: np.ndarray, p: float, table: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Map uniforms (..., L) to fault codes (..., L) under the per-location domains."""
    idx = select_faults(u, p, sizes)
    cols = np.arange(u.shape[-1])
    codes = table[cols, np.maximum(idx, 0)]
    return np.where(idx >= 0, codes, 0).astype(np.uint8)


_DEPOLARIZING = np.array(SINGLE_QUBIT_DOMAIN, dtype=np.uint8)


def depolarizing_codes(u: np.ndarray, p: float) -> np.ndarray:
    """Single-qubit depolarizing codes for every draw of ``u``."""
    idx = select_faults(u, p, len(_DEPOLARIZING))
    return np.where(idx >= 0, _DEPOLARIZING[np.maximum(idx, 0)], 0).astype(np.uint8)


def _frame_from_codes(codes: np.ndarray) -> PauliFrame:
    x = z = 0
    for q, code in enumerate(codes.tolist()):
        x |= (code & 1) << q
        z |= ((code >> 1) & 1) << q
    return PauliFrame(len(codes), x, z)


# =============================================================================
# Samplers
# =============================================================================


def sample_code_capacity(lattice: RscLattice, p: float, rng: np.random.Generator) -> PauliFrame:
    """Static data-qubit errors: each qubit gets a uniform X/Y/Z with probability p."""
    p = _check_probability("p", p)
    return _frame_from_codes(depolarizing_codes(rng.random(lattice.n_data), p))


def sample_circuit_level(schedule: RoundSchedule, p: float, rng: np.random.Generator) -> list[tuple[FaultLocation, int]]:
    """Faults of one extraction cycle: (location, code) for every location that faulted."""
    p = _check_probability("p", p)
    locations = fault_locations(schedule)
    if not locations:
        return []
    table, sizes = location_code_table(locations)
    codes = codes_from_draws(rng.random(len(locations)), p, table, sizes)
    return [(loc, int(c)) for loc, c in zip(locations, codes.tolist()) if c]


def sample_phenomenological_round(
    lattice: RscLattice, p: float, q: float, rng: np.random.Generator
) -> tuple[PauliFrame, list[int]]:
    """Data depolarizing at p and one syndrome-bit flip mask at q for one round."""
    p = _check_probability("p", p)
    q = _check_probability("q", q)
    u = rng.random(lattice.n_data + len(lattice.stabilizers))
    frame = _frame_from_codes(depolarizing_codes(u[: lattice.n_data], p))
    flips = (u[lattice.n_data :] < q).astype(int).tolist()
    return frame, flips
