"""QUBO and Ising models, exact evaluation and exhaustive minimisation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import LengthMismatchError, TooLargeError

BRUTE_FORCE_MAX_N = 24
_CHUNK = 1 << 16


def _finite(value) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"coefficient {value} is not finite")
    return value


@dataclass
class QuboModel:
    """Minimise ``sum_{i<=j} Q[i,j] x_i x_j + offset`` over binary ``x``.

    ``coeffs`` is keyed by ``(i, j)`` with ``i <= j``; the diagonal holds
    the linear terms. Pairs given as ``(j, i)`` are folded onto ``(i, j)``.
    """

    n: int
    coeffs: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("variable count must be nonnegative")
        folded: dict[tuple[int, int], float] = {}
        for (i, j), v in self.coeffs.items():
            i, j = int(i), int(j)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"term ({i}, {j}) out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            folded[key] = folded.get(key, 0.0) + _finite(v)
        self.coeffs = folded
        self.offset = _finite(self.offset)

    def add(self, i: int, j: int, value: float) -> None:
        key = (min(i, j), max(i, j))
        if not (0 <= key[0] and key[1] < self.n):
            raise ValueError(f"term {key} out of range for n={self.n}")
        self.coeffs[key] = self.coeffs.get(key, 0.0) + _finite(value)

    def matrix(self) -> np.ndarray:
        """Upper-triangular coefficient matrix."""
        q = np.zeros((self.n, self.n))
        for (i, j), v in self.coeffs.items():
            q[i, j] = v
        return q

    @classmethod
    def from_matrix(cls, q, offset: float = 0.0) -> QuboModel:
        """Accepts a symmetric or upper-triangular square matrix."""
        q = np.asarray(q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("Q must be square")
        n = q.shape[0]
        coeffs = {}
        for i in range(n):
            for j in range(i, n):
                v = q[i, i] if i == j else q[i, j] + q[j, i]
                if v != 0:
                    coeffs[(i, j)] = float(v)
        return cls(n, coeffs, offset)

    def to_dict(self) -> dict:
        terms = [[i, j, v] for (i, j), v in sorted(self.coeffs.items())]
        out = {"n": self.n, "terms": terms}
        if self.offset:
            out["offset"] = self.offset
        return out

    @classmethod
    def from_dict(cls, data: dict) -> QuboModel:
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ValueError("'n' must be an integer")
        model = cls(n, {}, float(data.get("offset", 0.0)))
        for term in data.get("terms", []):
            if len(term) != 3:
                raise ValueError(f"term {term!r} is not [i, j, coeff]")
            i, j, v = term
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j)):
                raise ValueError(f"term indices must be integers: {term!r}")
            model.add(i, j, float(v))
        return model

    @classmethod
    def load(cls, path) -> QuboModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class IsingModel:
    """Energy ``sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset`` over spins in {-1, +1}."""

    n: int
    h: list = field(default_factory=list)
    J: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        self.h = [_finite(v) for v in self.h] or [0.0] * self.n
        if len(self.h) != self.n:
            raise ValueError("need one field per spin")
        couplings = {}
        for (i, j), v in self.J.items():
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"bad coupling ({i}, {j})")
            key = (min(i, j), max(i, j))
            couplings[key] = couplings.get(key, 0.0) + _finite(v)
        self.J = couplings
        self.offset = _finite(self.offset)


@dataclass(frozen=True)
class Assignment:
    bits: tuple[int, ...]
    energy: float

    def as_int(self) -> int:
        """Bits read as an unsigned integer with bit 0 least significant."""
        return sum(b << i for i, b in enumerate(self.bits))

    def to_dict(self) -> dict:
        return {"bits": "".join(map(str, self.bits)), "energy": self.energy}


def evaluate(model: QuboModel, bits) -> float:
    bits = [int(b) for b in bits]
    if len(bits) != model.n:
        raise LengthMismatchError(f"expected {model.n} bits, got {len(bits)}")
    total = 0.0
    for (i, j), v in sorted(model.coeffs.items()):
        if bits[i] and bits[j]:
            total += v
    return total + model.offset


def energies(model: QuboModel, x: np.ndarray) -> np.ndarray:
    """Vectorised energies for the rows of a 0/1 matrix."""
    x = np.asarray(x, dtype=float)
    return ((x @ model.matrix()) * x).sum(axis=1) + model.offset


def ising_energy(model: IsingModel, spins) -> float:
    s = [int(v) for v in spins]
    if len(s) != model.n:
        raise LengthMismatchError(f"expected {model.n} spins, got {len(s)}")
    total = sum(h * si for h, si in zip(model.h, s))
    for (i, j), v in sorted(model.J.items()):
        total += v * s[i] * s[j]
    return total + model.offset


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Substitute x = (1 + s) / 2; the constant lands in ``offset``."""
    h = [0.0] * model.n
    J: dict[tuple[int, int], float] = {}
    offset = model.offset
    for (i, j), q in model.coeffs.items():
        if i == j:
            h[i] += q / 2
            offset += q / 2
        else:
            quarter = q / 4
            h[i] += quarter
            h[j] += quarter
            J[(i, j)] = J.get((i, j), 0.0) + quarter
            offset += quarter
    return IsingModel(model.n, h, J, offset)


def ising_to_qubo(model: IsingModel) -> QuboModel:
    """Substitute s = 2x - 1."""
    q = QuboModel(model.n, {}, model.offset)
    for i, h in enumerate(model.h):
        if h:
            q.add(i, i, 2 * h)
            q.offset -= h
    for (i, j), v in model.J.items():
        q.add(i, j, 4 * v)
        q.add(i, i, -2 * v)
        q.add(j, j, -2 * v)
        q.offset += v
    return q


def index_bits(values: np.ndarray, n: int) -> np.ndarray:
    """Rows of bits for integer assignments; bit i of the value is x_i."""
    return ((values[:, None] >> np.arange(n)) & 1).astype(np.int8)


def brute_force(model: QuboModel, max_n: int = BRUTE_FORCE_MAX_N) -> Assignment:
    """Global minimiser; ties go to the lowest assignment integer."""
    n = model.n
    if n > max_n:
        raise TooLargeError(f"brute force is capped at n={max_n}, got {n}")
    q = model.matrix()
    scale = 1.0 + float(np.abs(q).sum())
    tol = 1e-9 * scale
    best = np.inf
    candidates: list[int] = []
    for start in range(0, 1 << n, _CHUNK):
        values = np.arange(start, min(1 << n, start + _CHUNK), dtype=np.int64)
        x = index_bits(values, n).astype(float)
        e = ((x @ q) * x).sum(axis=1)
        low = float(e.min())
        if low < best - tol:
            best = low
            candidates = []
        if low <= best + tol:
            best = min(best, low)
            candidates.extend(int(v) for v in values[e <= best + tol])
    exact = [(evaluate(model, [(v >> i) & 1 for i in range(n)]), v) for v in candidates]
    floor = min(e for e, _ in exact)
    winner = min(v for e, v in exact if e <= floor + 1e-12 * scale)
    bits = tuple((winner >> i) & 1 for i in range(n))
    return Assignment(bits, evaluate(model, bits))
