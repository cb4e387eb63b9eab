"""Compilation for nearest-neighbour targets.

Pipeline: :func:`decompose` -> :func:`place_initial` -> :func:`route` ->
:func:`schedule_asap`, wrapped by :func:`compile_circuit`. Routing is a
greedy shortest-path SWAP insertion: for a two-qubit gate on non-adjacent
positions the first operand walks along a BFS shortest path toward the
second, taking the lowest-numbered next position on ties, until the two
are neighbours. MOVE is realised as SWAP with an unoccupied position.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import NotRoutedError, TooManyQubitsError
from .ir import Bundle, Circuit, Gate, Opcode

DEFAULT_DURATIONS = {op: 1 for op in Opcode}
DEFAULT_DURATIONS.update(
    {Opcode.CNOT: 2, Opcode.CZ: 2, Opcode.SWAP: 2, Opcode.MCZ: 2, Opcode.PREP_Z: 4, Opcode.MEASURE_Z: 4}
)

_OPCODE_NAMES = {op.value: op for op in Opcode}
_OPCODE_NAMES.update({op.name.lower(): op for op in Opcode})


@dataclass(frozen=True)
class Topology:
    num_positions: int
    edges: frozenset
    durations: dict = field(default_factory=lambda: dict(DEFAULT_DURATIONS), compare=False)
    native_swap: bool = True

    def __post_init__(self):
        if self.num_positions < 1:
            raise ValueError("topology needs at least one position")
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-edge on position {a}")
            if not (0 <= a < self.num_positions and 0 <= b < self.num_positions):
                raise ValueError(f"edge ({a}, {b}) references a missing position")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))
        durations = dict(DEFAULT_DURATIONS)
        durations.update(self.durations)
        for op, cycles in durations.items():
            if int(cycles) < 1:
                raise ValueError(f"duration of {op.value} must be a positive integer")
        object.__setattr__(self, "durations", durations)
        if any(d < 0 for d in self.distances[0]):
            raise ValueError("topology graph is not connected")

    @classmethod
    def grid(cls, rows: int, cols: int, **kwargs) -> Topology:
        """Row-major ``rows x cols`` lattice with 4-neighbour edges."""
        edges = set()
        for r in range(rows):
            for c in range(cols):
                p = r * cols + c
                if c + 1 < cols:
                    edges.add((p, p + 1))
                if r + 1 < rows:
                    edges.add((p, p + cols))
        return cls(rows * cols, frozenset(edges), **kwargs)

    @classmethod
    def line(cls, length: int, **kwargs) -> Topology:
        return cls.grid(1, length, **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> Topology:
        durations = {}
        for name, cycles in (data.get("durations") or {}).items():
            op = _OPCODE_NAMES.get(str(name).lower())
            if op is None:
                raise ValueError(f"unknown opcode {name!r} in durations")
            if not isinstance(cycles, int) or isinstance(cycles, bool):
                raise ValueError(f"duration for {name!r} must be an integer")
            durations[op] = cycles
        native_swap = data.get("native_swap", True)
        if not isinstance(native_swap, bool):
            raise ValueError("native_swap must be a boolean")
        opts = dict(durations=durations, native_swap=native_swap)
        if "grid" in data:
            grid = data["grid"]
            rows, cols = (grid["rows"], grid["cols"]) if isinstance(grid, dict) else grid
            return cls.grid(int(rows), int(cols), **opts)
        if "edges" in data:
            edges = [tuple(e) for e in data["edges"]]
            if any(len(e) != 2 for e in edges):
                raise ValueError("each edge must be a pair")
            n = data.get("num_positions")
            if n is None:
                n = 1 + max((max(e) for e in edges), default=0)
            return cls(int(n), frozenset(edges), **opts)
        raise ValueError("topology needs 'grid' or 'edges'")

    @classmethod
    def load(cls, path) -> Topology:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def duration(self, op: Opcode) -> int:
        return self.durations[op]

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj = [[] for _ in range(self.num_positions)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop counts by BFS; -1 marks unreachable pairs."""
        n = self.num_positions
        dist = np.full((n, n), -1, dtype=np.int64)
        for src in range(n):
            dist[src, src] = 0
            queue = deque([src])
            while queue:
                p = queue.popleft()
                for nb in self.neighbors[p]:
                    if dist[src, nb] < 0:
                        dist[src, nb] = dist[src, p] + 1
                        queue.append(nb)
        return dist


@dataclass(frozen=True)
class Placement:
    """Logical qubit ``i`` sits on physical position ``positions[i]``."""

    positions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if len(set(self.positions)) != len(self.positions):
            raise ValueError("placement is not injective")
        if any(p < 0 for p in self.positions):
            raise ValueError("negative position")

    @classmethod
    def identity(cls, n: int) -> Placement:
        return cls(tuple(range(n)))

    def __getitem__(self, logical: int) -> int:
        return self.positions[logical]

    def __len__(self) -> int:
        return len(self.positions)

    def inverse(self) -> dict[int, int]:
        return {p: i for i, p in enumerate(self.positions)}

    def to_dict(self) -> dict[str, int]:
        return {str(i): p for i, p in enumerate(self.positions)}


@dataclass(frozen=True)
class ScheduledCircuit:
    circuit: Circuit
    start_cycles: tuple[int, ...]
    latency: int
    final_placement: Placement
    initial_placement: Placement
    swaps: int = 0

    def timed_gates(self, topo: Topology):
        """Yield ``(start, end, gate)`` for every gate."""
        for start, bundle in zip(self.start_cycles, self.circuit.bundles):
            for g in bundle.gates:
                yield start, start + topo.duration(g.opcode), g


# ---------------------------------------------------------------- decompose


def _mcz_gates(qubits) -> list[Gate]:
    """Ancilla-free MCZ from parity phases; equals MCZ times the global phase e^{-i*pi/2^k}."""
    k = len(qubits)
    if k == 1:
        return [Gate(Opcode.Z, qubits)]
    if k == 2:
        return [Gate(Opcode.CZ, qubits)]
    # x1*...*xk = 2^(1-k) * sum over nonempty subsets S of (-1)^(|S|-1) * parity(S)
    out = []
    scale = math.pi / 2 ** (k - 1)
    for size in range(1, k + 1):
        theta = scale if size % 2 else -scale
        for subset in combinations(qubits, size):
            target = subset[-1]
            ladder = [Gate(Opcode.CNOT, (c, target)) for c in subset[:-1]]
            out.extend(ladder)
            out.append(Gate(Opcode.RZ, (target,), theta))
            out.extend(reversed(ladder))
    return out


def _expand(gate: Gate, native_swap: bool) -> list[Gate] | None:
    if gate.opcode is Opcode.SWAP and not native_swap:
        a, b = gate.qubits
        return [Gate(Opcode.CNOT, (a, b)), Gate(Opcode.CNOT, (b, a)), Gate(Opcode.CNOT, (a, b))]
    if gate.opcode is Opcode.MCZ:
        return _mcz_gates(gate.qubits)
    return None


def decompose(circuit: Circuit, native_swap: bool = True) -> Circuit:
    """Rewrite gates the backend lacks: MCZ always, SWAP unless ``native_swap``."""
    bundles: list[Bundle] = []
    changed = False
    for bundle in circuit.bundles:
        keep, expanded = [], []
        for gate in bundle.gates:
            seq = _expand(gate, native_swap)
            if seq is None:
                keep.append(gate)
            else:
                expanded.extend(seq)
        if not expanded:
            bundles.append(bundle)
            continue
        changed = True
        if keep:
            bundles.append(Bundle(tuple(keep)))
        bundles.extend(Bundle((g,)) for g in expanded)
    if not changed:
        return circuit
    return Circuit(circuit.num_qubits, tuple(bundles), circuit.version)


# ---------------------------------------------------------------- placement


def interaction_counts(circuit: Circuit) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for g in circuit.gates():
        if len(g.qubits) >= 2:
            for a, b in combinations(sorted(g.qubits), 2):
                counts[(a, b)] = counts.get((a, b), 0) + 1
    return counts


def place_initial(circuit: Circuit, topo: Topology, strategy: str = "identity") -> Placement:
    """Initial logical -> physical map.

    ``identity`` puts qubit i on position i. ``interaction`` puts the most
    interacting pair on an edge at the best-connected position, then
    places the other qubits by descending interaction count, each on the
    free position closest (weighted by interaction) to its placed partners.
    """
    n = circuit.num_qubits
    if n > topo.num_positions:
        raise TooManyQubitsError(f"{n} qubits do not fit on {topo.num_positions} positions")
    if strategy == "identity":
        return Placement.identity(n)
    if strategy != "interaction":
        raise ValueError(f"unknown placement strategy {strategy!r}")
    counts = interaction_counts(circuit)
    if not counts:
        return Placement.identity(n)

    weight = np.zeros((n, n), dtype=np.int64)
    for (a, b), c in counts.items():
        weight[a, b] = weight[b, a] = c
    (a, b), _ = max(counts.items(), key=lambda kv: (kv[1], -kv[0][0], -kv[0][1]))
    degree = [len(nb) for nb in topo.neighbors]
    p0 = max(range(topo.num_positions), key=lambda p: (degree[p], -p))
    p1 = topo.neighbors[p0][0]
    pos = {a: p0, b: p1}
    free = set(range(topo.num_positions)) - {p0, p1}
    dist = topo.distances
    rest = sorted((q for q in range(n) if q not in pos), key=lambda q: (-int(weight[q].sum()), q))
    for q in rest:
        def cost(p, q=q):
            return sum(int(weight[q, j]) * int(dist[p, pj]) for j, pj in pos.items())

        best = min(sorted(free), key=cost)
        pos[q] = best
        free.discard(best)
    return Placement(tuple(pos[q] for q in range(n)))


# ---------------------------------------------------------------- routing


def route(circuit: Circuit, topo: Topology, initial: Placement) -> tuple[Circuit, Placement]:
    """Insert SWAPs so every two-qubit gate acts on adjacent positions.

    The output circuit has ``topo.num_positions`` qubits and physical
    indices; the returned placement is where each logical qubit ends up.
    """
    if len(initial) != circuit.num_qubits:
        raise ValueError("placement size does not match the circuit")
    if any(p >= topo.num_positions for p in initial.positions):
        raise ValueError("placement uses a position outside the topology")
    pos = list(initial.positions)
    occupant: dict[int, int] = {p: q for q, p in enumerate(pos)}
    dist = topo.distances
    bundles: list[Bundle] = []

    for bundle in circuit.bundles:
        pending: list[Gate] = []
        for gate in bundle.gates:
            if len(gate.qubits) > 2:
                raise NotRoutedError(f"{gate.opcode.value} on {len(gate.qubits)} qubits must be decomposed first")
            if len(gate.qubits) == 2:
                a, b = gate.qubits
                pa, pb = pos[a], pos[b]
                if dist[pa, pb] > 1:
                    if pending:
                        bundles.append(Bundle(tuple(pending)))
                        pending = []
                    while dist[pa, pb] > 1:
                        step = min(nb for nb in topo.neighbors[pa] if dist[nb, pb] == dist[pa, pb] - 1)
                        bundles.append(Bundle((Gate(Opcode.SWAP, (pa, step)),)))
                        moved = occupant.pop(step, None)
                        occupant[step] = a
                        pos[a] = step
                        if moved is None:
                            occupant.pop(pa, None)
                        else:
                            occupant[pa] = moved
                            pos[moved] = pa
                        pa = step
            pending.append(gate.remap(pos))
        if pending:
            bundles.append(Bundle(tuple(pending)))
    routed = Circuit(topo.num_positions, tuple(bundles), circuit.version)
    return routed, Placement(tuple(pos))


# ---------------------------------------------------------------- scheduling


def schedule_asap(
    circuit: Circuit,
    topo: Topology,
    initial: Placement | None = None,
    final: Placement | None = None,
    swaps: int = 0,
) -> ScheduledCircuit:
    """ASAP list scheduling: each gate starts once all its qubits are free.

    Gates that start in the same cycle are merged into one bundle.
    """
    if circuit.num_qubits > topo.num_positions:
        raise NotRoutedError(f"circuit uses {circuit.num_qubits} qubits, topology has {topo.num_positions}")
    ready = [0] * circuit.num_qubits
    timed: list[tuple[int, int, Gate]] = []
    latency = 0
    for order, gate in enumerate(circuit.gates()):
        if len(gate.qubits) > 2 or (len(gate.qubits) == 2 and not topo.adjacent(*gate.qubits)):
            raise NotRoutedError(f"{gate.opcode.value} on {gate.qubits} is not on a topology edge")
        start = max(ready[q] for q in gate.qubits)
        end = start + topo.duration(gate.opcode)
        for q in gate.qubits:
            ready[q] = end
        latency = max(latency, end)
        timed.append((start, order, gate))
    timed.sort(key=lambda x: (x[0], x[1]))
    bundles: list[Bundle] = []
    starts: list[int] = []
    for start, _, gate in timed:
        if starts and starts[-1] == start:
            bundles[-1] = Bundle(bundles[-1].gates + (gate,))
        else:
            bundles.append(Bundle((gate,)))
            starts.append(start)
    identity = Placement.identity(circuit.num_qubits)
    return ScheduledCircuit(
        Circuit(circuit.num_qubits, tuple(bundles), circuit.version),
        tuple(starts),
        latency,
        final or initial or identity,
        initial or identity,
        swaps,
    )


@dataclass(frozen=True)
class CompileOptions:
    placement: str = "identity"


def compile_circuit(circuit: Circuit, topo: Topology, options: CompileOptions | None = None) -> ScheduledCircuit:
    """decompose -> place_initial -> route -> schedule_asap."""
    options = options or CompileOptions()
    lowered = decompose(circuit, native_swap=topo.native_swap)
    initial = place_initial(lowered, topo, options.placement)
    routed, final = route(lowered, topo, initial)
    swaps = _count(routed, Opcode.SWAP) - _count(lowered, Opcode.SWAP)
    if not topo.native_swap:
        routed = decompose(routed, native_swap=False)
    return schedule_asap(routed, topo, initial, final, swaps)


def _count(circuit: Circuit, op: Opcode) -> int:
    return sum(1 for g in circuit.gates() if g.opcode is op)


def logical_amplitudes(physical: np.ndarray, placement: Placement) -> np.ndarray:
    """Undo a placement: amplitudes of the logical register read off a physical state.

    Logical basis state ``b`` corresponds to the physical index with bit
    ``placement[l]`` set iff bit ``l`` of ``b`` is set; unoccupied
    positions are assumed to be |0>.
    """
    n = len(placement)
    idx = np.zeros(1 << n, dtype=np.int64)
    basis = np.arange(1 << n)
    for l, p in enumerate(placement.positions):
        idx |= ((basis >> l) & 1) << p
    return physical[idx]


def compile_report(scheduled: ScheduledCircuit) -> dict:
    return {
        "swaps": scheduled.swaps,
        "latency": scheduled.latency,
        "bundles": len(scheduled.circuit.bundles),
        "gates": scheduled.circuit.gate_count,
        "initial_placement": scheduled.initial_placement.to_dict(),
        "final_placement": scheduled.final_placement.to_dict(),
    }
