"""The 24-element single-qubit Clifford group as gate words.

Elements are found by breadth-first search from the identity over
{X, Y, Z, H, S, SDAG}, so every element carries a shortest word (the
identity's word is empty). ``COMPOSE[a][b]`` is the element obtained by
applying ``a`` and then ``b``; ``INVERSE[a]`` undoes ``a``.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..ir import Gate, Opcode
from ..simulator import gate_matrix

GENERATORS = (Opcode.X, Opcode.Y, Opcode.Z, Opcode.H, Opcode.S, Opcode.SDAG)


def _key(u: np.ndarray) -> tuple:
    """Matrix fingerprint that ignores global phase."""
    flat = u.reshape(-1)
    lead = flat[np.argmax(np.abs(flat) > 1e-9)]
    v = flat * (abs(lead) / lead)
    return tuple(np.round(v.real, 8) + 0.0) + tuple(np.round(v.imag, 8) + 0.0)


def _build():
    mats = {op: gate_matrix(Gate(op, (0,))) for op in GENERATORS}
    words: list[tuple[Opcode, ...]] = [()]
    unitaries = [np.eye(2, dtype=complex)]
    index = {_key(unitaries[0]): 0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for op in GENERATORS:
            u = mats[op] @ unitaries[a]
            k = _key(u)
            if k not in index:
                index[k] = len(words)
                words.append(words[a] + (op,))
                unitaries.append(u)
                queue.append(index[k])
    size = len(words)
    compose = [[index[_key(unitaries[b] @ unitaries[a])] for b in range(size)] for a in range(size)]
    inverse = [compose[a].index(0) for a in range(size)]
    return tuple(words), tuple(unitaries), compose, inverse


WORDS, UNITARIES, COMPOSE, INVERSE = _build()
SIZE = len(WORDS)
assert SIZE == 24


def word_gates(element: int, qubit: int = 0) -> list[Gate]:
    return [Gate(op, (qubit,)) for op in WORDS[element]]


def mean_word_length() -> float:
    return sum(len(w) for w in WORDS) / SIZE
