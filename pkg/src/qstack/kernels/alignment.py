"""Read alignment by Grover search over an indexed reference.

The reference is cut into non-overlapping slices of the read length and
padded with never-matching entries up to a power of two. A slice is marked
when its Hamming distance to the read is within the mismatch tolerance;
Grover amplification then makes matching indices the likely outcomes, and
indices are ranked by how often they were measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..compiler import Topology, compile_circuit
from ..errors import NoMatchKnownError, NotPowerOfTwoError
from ..simulator import PERFECT, NoiseModel, run
from .grover import grover_build, optimal_iterations, success_probability

ALPHABET = "ACGT"


def hamming(a: str, b: str) -> int:
    return sum(x != y for x, y in zip(a, b)) + abs(len(a) - len(b))


def random_reference(length: int, seed: int) -> str:
    """Uniform i.i.d. bases; a stand-in for real genome data."""
    rng = np.random.default_rng(seed)
    return "".join(rng.choice(list(ALPHABET), size=length))


def _check_bases(text: str, what: str) -> str:
    text = text.strip().upper()
    bad = set(text) - set(ALPHABET)
    if bad:
        raise ValueError(f"{what} contains non-ACGT symbols: {''.join(sorted(bad))}")
    return text


@dataclass
class ReferenceIndex:
    reference: str
    slice_width: int
    slices: list = field(default_factory=list)  # None marks padding

    @classmethod
    def build(cls, reference: str, slice_width: int) -> ReferenceIndex:
        reference = _check_bases("".join(reference.split()), "reference")
        if slice_width < 1:
            raise ValueError("slice width must be positive")
        count = len(reference) // slice_width
        if count == 0:
            raise ValueError("reference is shorter than one slice")
        slices = [reference[i * slice_width:(i + 1) * slice_width] for i in range(count)]
        size = 1 << max(1, math.ceil(math.log2(count)))
        return cls(reference, slice_width, slices + [None] * (size - count))

    @property
    def size(self) -> int:
        return len(self.slices)


@dataclass(frozen=True)
class AlignmentQuery:
    read: str
    max_mismatch: int = 0

    def __post_init__(self):
        object.__setattr__(self, "read", _check_bases(self.read, "read"))
        if self.max_mismatch < 0:
            raise ValueError("mismatch tolerance must be nonnegative")


@dataclass
class AlignmentResult:
    ranking: list  # dicts: index, count, frequency, slice
    marked: list
    iterations: int
    shots: int
    seed: int
    expected_success: float | None

    def top(self) -> int | None:
        return self.ranking[0]["index"] if self.ranking else None

    def to_dict(self) -> dict:
        return {
            "ranking": self.ranking,
            "marked": self.marked,
            "iterations": self.iterations,
            "shots": self.shots,
            "seed": self.seed,
            "expected_success": self.expected_success,
        }


def mark(index: ReferenceIndex, query: AlignmentQuery) -> list[int]:
    if len(query.read) != index.slice_width:
        raise ValueError(f"read length {len(query.read)} differs from slice width {index.slice_width}")
    return [
        i for i, s in enumerate(index.slices) if s is not None and hamming(s, query.read) <= query.max_mismatch
    ]


def grover_align(
    index: ReferenceIndex,
    query: AlignmentQuery,
    noise: NoiseModel = PERFECT,
    shots: int = 1024,
    seed: int = 0,
    iterations="exact",
    topology: Topology | None = None,
) -> AlignmentResult:
    """Rank reference indices by measured frequency after Grover amplification.

    ``iterations`` is ``"exact"`` (uses the true match count, fails with
    NO_MATCH_KNOWN when there is none), ``"unknown"`` (assumes one match)
    or an explicit integer. With ``topology`` the circuit is compiled and
    routed first and outcomes are mapped back through the final placement.
    """
    n_items = index.size
    k = n_items.bit_length() - 1
    if n_items < 2 or (1 << k) != n_items:
        raise NotPowerOfTwoError(f"index size {n_items} is not a power of two")
    marked = mark(index, query)
    if iterations == "exact":
        if not marked:
            raise NoMatchKnownError("no slice matches the read; exact iteration count is undefined")
        r = optimal_iterations(n_items, len(marked))
    elif iterations == "unknown":
        r = optimal_iterations(n_items, None)
    else:
        r = int(iterations)
    circuit = grover_build(k, marked, r)

    if topology is None:
        summary = run(circuit, noise, shots, seed)
        counts = {int(key, 2): c for key, c in summary.histogram.items()}
    else:
        scheduled = compile_circuit(circuit, topology)
        summary = run(scheduled, noise, shots, seed)
        counts = _logical_counts(summary.histogram, scheduled.circuit.measured_qubits(), scheduled.final_placement)

    ranking = [
        {"index": i, "count": c, "frequency": c / shots, "slice": index.slices[i]}
        for i, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    expected = success_probability(n_items, len(marked), r) if marked else None
    return AlignmentResult(ranking, marked, r, shots, seed, expected)


def _logical_counts(histogram, measured_positions, placement) -> dict[int, int]:
    """Re-key a histogram over physical positions by logical register value."""
    measured_positions = sorted(measured_positions)
    bit_of = {p: len(measured_positions) - 1 - j for j, p in enumerate(measured_positions)}
    counts: dict[int, int] = {}
    for key, c in histogram.items():
        value = 0
        for logical, p in enumerate(placement.positions):
            if key[bit_of[p]] == "1":
                value |= 1 << logical
        counts[value] = counts.get(value, 0) + c
    return counts
