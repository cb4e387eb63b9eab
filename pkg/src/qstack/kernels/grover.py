"""Grover search circuits over an index register.

Index ``i`` is the basis state whose qubit ``b`` holds bit ``b`` of ``i``.
The phase oracle flips the sign of each marked index with one block per
marked value: X on the qubits whose bit is 0, a multi-controlled Z on all
qubits, X again. Diffusion is ``H X MCZ X H`` on the whole register.
"""

from __future__ import annotations

import math

from ..ir import Bundle, Circuit, Gate, Opcode


def optimal_iterations(n_items: int, n_marked: int | None) -> int:
    """``floor(pi/4 * sqrt(N/M))``; with ``M`` unknown (None) assume ``M = 1``."""
    m = 1 if n_marked is None else n_marked
    if m <= 0:
        raise ValueError("need at least one marked item")
    return int(math.floor(math.pi / 4 * math.sqrt(n_items / m)))


def success_probability(n_items: int, n_marked: int, iterations: int) -> float:
    """Probability of measuring some marked index: sin^2((2r+1) * asin(sqrt(M/N)))."""
    theta = math.asin(math.sqrt(n_marked / n_items))
    return math.sin((2 * iterations + 1) * theta) ** 2


def _layer(op: Opcode, qubits) -> list[Bundle]:
    qubits = tuple(qubits)
    return [Bundle(tuple(Gate(op, (q,)) for q in qubits))] if qubits else []


def phase_oracle(k: int, marked) -> list[Bundle]:
    everyone = tuple(range(k))
    out: list[Bundle] = []
    for m in sorted(set(marked)):
        if not 0 <= m < (1 << k):
            raise ValueError(f"marked index {m} outside [0, {1 << k})")
        zeros = [q for q in everyone if not (m >> q) & 1]
        out += _layer(Opcode.X, zeros)
        out.append(Bundle((Gate(Opcode.MCZ, everyone),)))
        out += _layer(Opcode.X, zeros)
    return out


def diffusion(k: int) -> list[Bundle]:
    everyone = tuple(range(k))
    return (
        _layer(Opcode.H, everyone)
        + _layer(Opcode.X, everyone)
        + [Bundle((Gate(Opcode.MCZ, everyone),))]
        + _layer(Opcode.X, everyone)
        + _layer(Opcode.H, everyone)
    )


def grover_build(k: int, marked, iterations: int | None = None, measure: bool = True) -> Circuit:
    """Uniform superposition, ``iterations`` rounds of oracle + diffusion, measure all.

    ``iterations`` defaults to the optimum for the size of ``marked``.
    """
    if k < 1:
        raise ValueError("need at least one index qubit")
    marked = sorted(set(marked))
    if iterations is None:
        iterations = optimal_iterations(1 << k, len(marked) or None)
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    bundles = _layer(Opcode.H, range(k))
    oracle = phase_oracle(k, marked)
    for _ in range(iterations):
        bundles += oracle + diffusion(k)
    if measure:
        bundles += _layer(Opcode.MEASURE_Z, range(k))
    return Circuit(k, tuple(bundles))
