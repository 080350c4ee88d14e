#!/usr/bin/env python3
"""
RSC Matching Decoder

Builds the space-time matching graph of a memory experiment from single-fault
analysis and decodes detection events with minimum-weight perfect matching.

Graph construction injects every single fault mechanism of the noise model
(one fault per shot, no background noise) and records which detectors it
lights up and whether it flips the stored logical. A mechanism that lights
one detector becomes a boundary edge, two detectors an ordinary edge; more
than two are split into edges that already exist. Edge probabilities merge
per node pair: alternatives at one location add, independent locations
combine as p1(1-p2) + p2(1-p1). Weights are -ln(p/(1-p)), discretised to
integers so the blossom matcher and the brute-force oracle agree exactly.

Matching works on the complete graph over the defects (plus one boundary
vertex when their number is odd), weighted by shortest-path distances in the
matching graph; two defects may also pair "through" the boundary.

Usage:
    from rsc_decoder import build_matching_graph, decode
    graph = build_matching_graph(lattice, schedule, model, rounds=3)
    parity = decode(graph, events)
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Literal

import networkx as nx
import numpy as np

from rsc_circuit import AncillaPrep, RoundSchedule, fault_locations
from rsc_lattice import Basis, RscLattice
from rsc_noise import NoiseKind, NoiseModel
from rsc_pauli import CODE_X, CODE_Y, CODE_Z
from rsc_sim import (
    DetectionEventSet,
    FaultInjection,
    detector_layers,
    detector_stabilizers,
    noise_schedule,
    simulate_batch,
)
from rsc_thresholds import BRUTE_FORCE_MAX_DEFECTS, WEIGHT_RESOLUTION

logger = logging.getLogger(__name__)

WeightMode = Literal["log", "unit"]

# Injected faults simulated per batch during graph construction
_ANALYSIS_CHUNK = 2048

# Marks the boundary side of a matched pair
BOUNDARY = -1


class DecoderError(ValueError):
    """Raised for disconnected defects, oversize oracle inputs or bad graph files."""


@dataclass(frozen=True)
class GraphEdge:
    """One edge of the matching graph; ``v`` is None for a boundary edge."""

    u: int
    v: int | None
    weight: int
    probability: float
    parity: int


@dataclass(frozen=True)
class FaultMechanism:
    """A single fault with its probability; ``group`` names its location and round."""

    group: tuple[Any, ...]
    probability: float
    injection: FaultInjection


@dataclass(frozen=True)
class FaultSignature:
    """Detector nodes lit by a mechanism and its logical-flip parity."""

    mechanism: FaultMechanism
    nodes: tuple[int, ...]
    parity: int


@dataclass
class MatchingGraph:
    """Space-time matching graph of one basis.

    Detector node ``layer * detectors_per_layer + k`` is the k-th stabilizer of
    ``stabilizer_ids`` in that layer; node ``n_detectors`` is the boundary.
    ``scale`` is the number of integer weight units per unit of weight.
    """

    basis: Basis
    layers: int
    stabilizer_ids: tuple[int, ...]
    edges: dict[tuple[int, int | None], GraphEdge]
    scale: int = WEIGHT_RESOLUTION
    weights: WeightMode = "log"
    unexplained: int = 0
    _paths: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    @property
    def detectors_per_layer(self) -> int:
        return len(self.stabilizer_ids)

    @property
    def n_detectors(self) -> int:
        return self.layers * self.detectors_per_layer

    @property
    def boundary(self) -> int:
        return self.n_detectors

    def node(self, stabilizer_id: int, layer: int) -> int:
        return layer * self.detectors_per_layer + self.stabilizer_ids.index(stabilizer_id)

    def node_label(self, node: int) -> tuple[int, int] | None:
        """(stabilizer_id, layer) of a detector node; None for the boundary."""
        if node == self.boundary:
            return None
        layer, k = divmod(node, self.detectors_per_layer)
        return self.stabilizer_ids[k], layer

    def edge(self, u: int, v: int | None) -> GraphEdge | None:
        return self.edges.get(_edge_key(u, v))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_detectors + 1))
        for e in self.edges.values():
            g.add_edge(e.u, self.boundary if e.v is None else e.v, weight=e.weight, parity=e.parity)
        return g

    def is_connected(self) -> bool:
        return self.n_detectors == 0 or nx.is_connected(self.to_networkx())

    def shortest_paths(self) -> tuple[np.ndarray, np.ndarray]:
        """(distance, parity) over all node pairs; distance -1 where unreachable. Memoized."""
        if self._paths is None:
            n = self.n_detectors + 1
            dist = np.full((n, n), -1, dtype=np.int64)
            parity = np.zeros((n, n), dtype=np.uint8)
            g = self.to_networkx()
            for source in range(n):
                lengths, paths = nx.single_source_dijkstra(g, source, weight="weight")
                for target, length in lengths.items():
                    dist[source, target] = int(length)
                    path = paths[target]
                    parity[source, target] = sum(g.edges[a, b]["parity"] for a, b in zip(path, path[1:])) & 1
            self._paths = (dist, parity)
        return self._paths


def _edge_key(u: int, v: int | None) -> tuple[int, int | None]:
    if v is None:
        return (u, None)
    return (u, v) if u < v else (v, u)


def edge_weight(probability: float, mode: WeightMode = "log", scale: int = WEIGHT_RESOLUTION) -> int:
    """Integer weight of an edge with firing probability ``probability``."""
    if mode == "unit":
        return 1
    if probability >= 0.5:
        logger.warning("edge probability %.3g >= 0.5 clamped to weight 0", probability)
        return 0
    return int(round(-math.log(probability / (1.0 - probability)) * scale))


# =============================================================================
# Single-fault analysis
# =============================================================================


def fault_mechanisms(lattice: RscLattice, schedule: RoundSchedule, model: NoiseModel, rounds: int) -> list[FaultMechanism]:
    """Every single fault of the noise model over ``rounds`` cycles, in a stable order."""
    out: list[FaultMechanism] = []
    if model.kind is NoiseKind.CODE_CAPACITY:
        for q in range(lattice.n_data):
            for code in (CODE_X, CODE_Y, CODE_Z):
                out.append(FaultMechanism((0, "data", q), model.p / 3, FaultInjection(0, code, data_qubit=q)))
        return out

    if model.kind is NoiseKind.PHENOMENOLOGICAL:
        for t in range(rounds):
            for q in range(lattice.n_data):
                for code in (CODE_X, CODE_Y, CODE_Z):
                    out.append(FaultMechanism((t, "data", q), model.p / 3, FaultInjection(t, code, data_qubit=q)))
            for s in lattice.stabilizers:
                out.append(FaultMechanism((t, "measure", s.id), model.measurement_rate, FaultInjection(t, 1, measurement=s.id)))
        return out

    locations = fault_locations(noise_schedule(lattice, schedule))
    for t in range(rounds):
        for loc in locations:
            share = model.p / len(loc.domain)
            for code in loc.domain:
                out.append(FaultMechanism((t, "location", loc.index), share, FaultInjection(t, code, location=loc.index)))
            if model.reset_flip > 0 and isinstance(loc.gate, AncillaPrep):
                flip = CODE_X if loc.gate.basis is Basis.Z else CODE_Z
                out.append(FaultMechanism((t, "reset", loc.index), model.reset_flip, FaultInjection(t, flip, location=loc.index)))
    return out


def analyse_faults(
    lattice: RscLattice,
    schedule: RoundSchedule,
    model: NoiseModel,
    rounds: int,
    basis: Basis = Basis.Z,
) -> list[FaultSignature]:
    """Detector nodes and logical parity of every single fault mechanism."""
    sim_rounds = 1 if model.kind is NoiseKind.CODE_CAPACITY else rounds
    mechanisms = fault_mechanisms(lattice, schedule, model, sim_rounds)
    signatures: list[FaultSignature] = []
    for start in range(0, len(mechanisms), _ANALYSIS_CHUNK):
        chunk = mechanisms[start : start + _ANALYSIS_CHUNK]
        batch = simulate_batch(
            lattice, schedule, model, sim_rounds, basis=basis, injections=[[m.injection] for m in chunk]
        )
        events = batch.detection_events().reshape(len(chunk), -1)
        flips = batch.logical_flips()
        for m, row, flip in zip(chunk, events, flips.tolist()):
            signatures.append(FaultSignature(m, tuple(np.flatnonzero(row).tolist()), int(flip)))
    return signatures


def _decompose(
    nodes: tuple[int, ...], parity: int, known: dict[tuple[int, int | None], set[int]]
) -> list[tuple[tuple[int, int | None], int]] | None:
    """Split a many-detector fault into known edges whose parities sum to ``parity``."""
    if not nodes:
        return [] if parity == 0 else None
    a, rest = nodes[0], nodes[1:]
    options: list[tuple[tuple[int, int | None], tuple[int, ...]]] = [((a, None), rest)]
    options += [(_edge_key(a, b), rest[:i] + rest[i + 1 :]) for i, b in enumerate(rest)]
    for key, remaining in options:
        for p in sorted(known.get(key, ())):
            tail = _decompose(remaining, parity ^ p, known)
            if tail is not None:
                return [(key, p)] + tail
    return None


def build_matching_graph(
    lattice: RscLattice,
    schedule: RoundSchedule,
    model: NoiseModel,
    rounds: int,
    basis: Basis = Basis.Z,
    weights: WeightMode = "log",
) -> MatchingGraph:
    """Matching graph of the ``basis`` memory under ``model`` over ``rounds`` cycles."""
    basis = Basis(basis)
    if weights not in ("log", "unit"):
        raise DecoderError(f"unknown weight mode {weights!r}")
    signatures = analyse_faults(lattice, schedule, model, rounds, basis)
    use_probability = weights == "log"

    graphlike = [s for s in signatures if 1 <= len(s.nodes) <= 2]
    known: dict[tuple[int, int | None], set[int]] = {}
    for s in graphlike:
        key = _edge_key(s.nodes[0], s.nodes[1] if len(s.nodes) == 2 else None)
        if s.mechanism.probability > 0 or not use_probability:
            known.setdefault(key, set()).add(s.parity)

    # (edge key, parity) -> probability, first per location group, then merged across groups
    grouped: dict[tuple[Any, ...], dict[tuple[tuple[int, int | None], int], float]] = {}
    unexplained = 0
    undetectable = 0
    for s in signatures:
        prob = s.mechanism.probability
        if use_probability and prob <= 0:
            continue
        if not s.nodes:
            undetectable += s.parity
            continue
        if len(s.nodes) <= 2:
            parts = [(_edge_key(s.nodes[0], s.nodes[1] if len(s.nodes) == 2 else None), s.parity)]
        else:
            parts = _decompose(s.nodes, s.parity, known)
            if parts is None:
                unexplained += 1
                continue
        bucket = grouped.setdefault(s.mechanism.group, {})
        for part in parts:
            bucket[part] = bucket.get(part, 0.0) + prob

    merged: dict[tuple[tuple[int, int | None], int], float] = {}
    for bucket in grouped.values():
        for part, prob in bucket.items():
            old = merged.get(part, 0.0)
            merged[part] = old * (1.0 - prob) + prob * (1.0 - old)

    scale = WEIGHT_RESOLUTION if use_probability else 1
    edges: dict[tuple[int, int | None], GraphEdge] = {}
    for (key, parity), prob in sorted(merged.items(), key=lambda kv: (kv[0][0][0], _sort_v(kv[0][0][1]), kv[0][1])):
        candidate = GraphEdge(key[0], key[1], edge_weight(prob, weights, scale), prob, parity)
        current = edges.get(key)
        if current is None or candidate.probability > current.probability:
            edges[key] = candidate

    if unexplained:
        logger.warning("%d fault mechanisms could not be split into matching-graph edges", unexplained)
    if undetectable:
        logger.info("%d fault mechanisms flip the logical without any detector", undetectable)

    return MatchingGraph(
        basis=basis,
        layers=detector_layers(model.kind, rounds),
        stabilizer_ids=detector_stabilizers(lattice, basis),
        edges=edges,
        scale=scale,
        weights=weights,
        unexplained=unexplained,
    )


def _sort_v(v: int | None) -> int:
    return -1 if v is None else v


# =============================================================================
# Matching
# =============================================================================


@dataclass(frozen=True)
class Matching:
    """A perfect matching of defects.

    ``pairs`` holds (a, b) with a < b, or (a, BOUNDARY) for a defect matched
    to the boundary. ``total_weight`` is in integer weight units.
    """

    pairs: tuple[tuple[int, int], ...]
    total_weight: int
    parity: int
    scale: int = 1

    @property
    def weight(self) -> float:
        return self.total_weight / self.scale


def _check_defects(graph: MatchingGraph, defects: Iterable[int]) -> list[int]:
    nodes = sorted(set(int(d) for d in defects))
    for n in nodes:
        if not 0 <= n < graph.n_detectors:
            raise DecoderError(f"defect {n} is not a detector of this graph")
    return nodes


def _pair_cost(dist: np.ndarray, par: np.ndarray, a: int, b: int, boundary: int) -> tuple[int, int, bool] | None:
    """Cheapest way to pair a with b: (weight, parity, via_boundary).

    On equal weight the boundary route wins: (a, BOUNDARY) sorts before (a, b).
    """
    direct = int(dist[a, b])
    da, db = int(dist[a, boundary]), int(dist[b, boundary])
    via = da + db if da >= 0 and db >= 0 else -1
    if direct >= 0 and (via < 0 or direct < via):
        return direct, int(par[a, b]), False
    if via >= 0:
        return via, int(par[a, boundary] ^ par[b, boundary]), True
    return None


def _tie_break_keys(
    costs: dict[tuple[int, int], tuple[int, int, bool]], k: int
) -> dict[tuple[int, int], int]:
    """Integer matching keys that order equal-weight matchings lexicographically.

    A pair (i, j) adds the partner rank of defect i (0 for the boundary, j + 1
    otherwise) times base**(k - i). With base = k + 2 a smaller partner for an
    earlier defect outweighs every later choice, and the whole term stays below
    one weight unit, so the minimum key is the lexicographically smallest
    among the minimum-weight matchings.
    """
    base = k + 2
    unit = base ** (k + 1)
    keys: dict[tuple[int, int], int] = {}
    for (i, j), (w, _, via) in costs.items():
        partner = 0 if via or j == k else j + 1
        keys[(i, j)] = w * unit + partner * base ** (k - i)
    return keys


def mwpm(graph: MatchingGraph, defects: Iterable[int]) -> Matching:
    """Minimum-weight perfect matching of ``defects`` (Edmonds' blossom algorithm).

    Among equal-weight matchings the one whose sorted ``pairs`` is
    lexicographically smallest wins, which is also what brute_force_mwpm
    returns.

    Raises:
        DecoderError: If some defect can reach neither another defect nor the boundary.
    """
    nodes = _check_defects(graph, defects)
    if not nodes:
        return Matching((), 0, 0, graph.scale)
    dist, par = graph.shortest_paths()
    boundary = graph.boundary

    costs: dict[tuple[int, int], tuple[int, int, bool]] = {}
    for i, j in itertools.combinations(range(len(nodes)), 2):
        cost = _pair_cost(dist, par, nodes[i], nodes[j], boundary)
        if cost is not None:
            costs[(i, j)] = cost
    if len(nodes) % 2:
        b = len(nodes)
        for i, n in enumerate(nodes):
            if dist[n, boundary] >= 0:
                costs[(i, b)] = (int(dist[n, boundary]), int(par[n, boundary]), False)

    if len(nodes) <= 2:
        matched = {(0, 1)} if (0, 1) in costs else set()
    else:
        keys = _tie_break_keys(costs, len(nodes))
        top = max(keys.values()) + 1 if keys else 1
        g = nx.Graph()
        g.add_nodes_from(range(len(nodes) + len(nodes) % 2))
        for (i, j), key in keys.items():
            g.add_edge(i, j, weight=top - key)
        matched = {(min(i, j), max(i, j)) for i, j in nx.max_weight_matching(g, maxcardinality=True)}

    if 2 * len(matched) != len(nodes) + len(nodes) % 2:
        raise DecoderError(f"no perfect matching for defects {nodes}")
    return _assemble(nodes, sorted(matched), costs, graph.scale)


def _assemble(
    nodes: list[int], matched: list[tuple[int, int]], costs: dict[tuple[int, int], tuple[int, int, bool]], scale: int
) -> Matching:
    pairs: list[tuple[int, int]] = []
    total = parity = 0
    for i, j in matched:
        w, p, via = costs[(i, j)]
        total += w
        parity ^= p
        if j == len(nodes):
            pairs.append((nodes[i], BOUNDARY))
        elif via:
            pairs += [(nodes[i], BOUNDARY), (nodes[j], BOUNDARY)]
        else:
            pairs.append((nodes[i], nodes[j]))
    return Matching(tuple(sorted(pairs)), total, parity, scale)


def brute_force_mwpm(graph: MatchingGraph, defects: Iterable[int]) -> Matching:
    """Exhaustive minimum-weight matching, each defect paired or sent to the boundary.

    The lowest remaining defect tries the boundary first and then its partners
    in ascending order, keeping the first optimum, so ties resolve to the
    lexicographically smallest ``pairs``.

    Raises:
        DecoderError: For more than BRUTE_FORCE_MAX_DEFECTS defects or an infeasible set.
    """
    nodes = _check_defects(graph, defects)
    if len(nodes) > BRUTE_FORCE_MAX_DEFECTS:
        raise DecoderError(f"brute force handles at most {BRUTE_FORCE_MAX_DEFECTS} defects, got {len(nodes)}")
    dist, par = graph.shortest_paths()
    boundary = graph.boundary

    @functools.lru_cache(maxsize=None)
    def best(remaining: frozenset[int]) -> tuple[int, tuple[tuple[int, int], ...]] | None:
        if not remaining:
            return 0, ()
        a = min(remaining)
        rest = remaining - {a}
        found: tuple[int, tuple[tuple[int, int], ...]] | None = None
        options = [(BOUNDARY, int(dist[a, boundary]))] + [(b, int(dist[a, b])) for b in sorted(rest)]
        for b, w in options:
            if w < 0:
                continue
            sub = best(rest if b == BOUNDARY else rest - {b})
            if sub is None:
                continue
            total = w + sub[0]
            if found is None or total < found[0]:
                found = (total, ((a, b),) + sub[1])
        return found

    result = best(frozenset(nodes))
    if result is None:
        raise DecoderError(f"no perfect matching for defects {nodes}")
    total, pairs = result
    parity = 0
    for a, b in pairs:
        parity ^= int(par[a, boundary if b == BOUNDARY else b])
    return Matching(tuple(sorted(pairs)), total, parity, graph.scale)


# =============================================================================
# Decoding
# =============================================================================


def decode(graph: MatchingGraph, events: DetectionEventSet) -> int:
    """Correction parity for the stored logical: XOR of matched path parities.

    Pure function of (graph, events); only the classical record is touched.
    """
    if events.stabilizer_ids != graph.stabilizer_ids or events.layers != graph.layers:
        raise DecoderError("events do not belong to this matching graph")
    return mwpm(graph, events.nodes()).parity


def decode_batch(graph: MatchingGraph, events: np.ndarray) -> np.ndarray:
    """Correction parities for a (S, layers, detectors) defect matrix."""
    flat = events.reshape(events.shape[0], -1)
    if flat.shape[1] != graph.n_detectors:
        raise DecoderError(f"defect matrix has {flat.shape[1]} detectors, graph has {graph.n_detectors}")
    out = np.zeros(flat.shape[0], dtype=np.uint8)
    for i, row in enumerate(flat):
        nodes = np.flatnonzero(row)
        if nodes.size:
            out[i] = mwpm(graph, nodes.tolist()).parity
    return out


# =============================================================================
# Serialization
# =============================================================================


def graph_to_dict(graph: MatchingGraph) -> dict[str, Any]:
    """JSON-ready dump (schema ``rsc.graph/1``); boundary edges use ``"boundary"``."""
    return {
        "schema": "rsc.graph/1",
        "basis": graph.basis.value,
        "layers": graph.layers,
        "stabilizer_ids": list(graph.stabilizer_ids),
        "scale": graph.scale,
        "weights": graph.weights,
        "unexplained": graph.unexplained,
        "edges": [
            {
                "u": e.u,
                "v": "boundary" if e.v is None else e.v,
                "weight": e.weight,
                "probability": e.probability,
                "parity": e.parity,
            }
            for e in graph.edges.values()
        ],
    }


def graph_from_dict(data: dict[str, Any]) -> MatchingGraph:
    if data.get("schema") != "rsc.graph/1":
        raise DecoderError(f"unsupported graph schema {data.get('schema')!r}")
    try:
        edges: dict[tuple[int, int | None], GraphEdge] = {}
        for raw in data["edges"]:
            v = None if raw["v"] == "boundary" else int(raw["v"])
            e = GraphEdge(int(raw["u"]), v, int(raw["weight"]), float(raw["probability"]), int(raw["parity"]))
            edges[_edge_key(e.u, e.v)] = e
        return MatchingGraph(
            basis=Basis(data["basis"]),
            layers=int(data["layers"]),
            stabilizer_ids=tuple(int(s) for s in data["stabilizer_ids"]),
            edges=edges,
            scale=int(data["scale"]),
            weights=data.get("weights", "log"),
            unexplained=int(data.get("unexplained", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DecoderError(f"malformed graph file: {exc}") from exc
