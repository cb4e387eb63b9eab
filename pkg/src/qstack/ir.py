"""Circuit intermediate representation.

A :class:`Circuit` is an ordered sequence of :class:`Bundle` objects; each
bundle holds gates on pairwise-disjoint qubits that start together. All
three types validate on construction, so an invalid circuit cannot exist.

Basis ordering used everywhere in the stack: qubit 0 is the least
significant bit of a basis-state index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator


class Opcode(Enum):
    PREP_Z = "prep_z"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDAG = "sdag"
    T = "t"
    TDAG = "tdag"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CNOT = "cnot"
    CZ = "cz"
    SWAP = "swap"
    MEASURE_Z = "measure"
    # composite: Z on |1...1> of all listed qubits; expanded by the compiler
    MCZ = "mcz"

    @property
    def arity(self) -> int | None:
        """Fixed operand count, or None for the variadic MCZ."""
        if self is Opcode.MCZ:
            return None
        if self in TWO_QUBIT:
            return 2
        return 1

    @property
    def has_angle(self) -> bool:
        return self in ROTATIONS


ROTATIONS = frozenset({Opcode.RX, Opcode.RY, Opcode.RZ})
TWO_QUBIT = frozenset({Opcode.CNOT, Opcode.CZ, Opcode.SWAP})
NON_UNITARY = frozenset({Opcode.PREP_Z, Opcode.MEASURE_Z})


@dataclass(frozen=True)
class Gate:
    opcode: Opcode
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = self.opcode.arity
        if arity is None:
            if len(self.qubits) < 1:
                raise ValueError("mcz needs at least one qubit")
        elif len(self.qubits) != arity:
            raise ValueError(f"{self.opcode.value} takes {arity} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.opcode.value} {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit indices must be nonnegative")
        if self.opcode.has_angle:
            if self.angle is None:
                raise ValueError(f"{self.opcode.value} requires an angle")
            object.__setattr__(self, "angle", float(self.angle))
            if not math.isfinite(self.angle):
                raise ValueError("angle must be finite")
        elif self.angle is not None:
            raise ValueError(f"{self.opcode.value} takes no angle")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def remap(self, mapping) -> Gate:
        """Return the same gate with every qubit ``q`` replaced by ``mapping[q]``."""
        return Gate(self.opcode, tuple(mapping[q] for q in self.qubits), self.angle)


@dataclass(frozen=True)
class Bundle:
    gates: tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise ValueError("a bundle must contain at least one gate")
        seen: set[int] = set()
        for g in self.gates:
            overlap = seen.intersection(g.qubits)
            if overlap:
                raise ValueError(f"qubit {min(overlap)} used twice in one bundle")
            seen.update(g.qubits)

    @property
    def qubits(self) -> frozenset[int]:
        return frozenset(q for g in self.gates for q in g.qubits)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    bundles: tuple[Bundle, ...] = ()
    version: str = "1.0"

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(self.bundles))
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        for b in self.bundles:
            for g in b.gates:
                for q in g.qubits:
                    if q >= self.num_qubits:
                        raise ValueError(f"qubit index {q} out of range for {self.num_qubits} qubits")

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Iterable[Gate], version: str = "1.0") -> Circuit:
        """Sequential circuit: one singleton bundle per gate."""
        return cls(num_qubits, tuple(Bundle((g,)) for g in gates), version)

    def gates(self) -> Iterator[Gate]:
        for b in self.bundles:
            yield from b.gates

    @property
    def gate_count(self) -> int:
        return sum(len(b.gates) for b in self.bundles)

    def measured_qubits(self) -> list[int]:
        return sorted({g.qubits[0] for g in self.gates() if g.opcode is Opcode.MEASURE_Z})
