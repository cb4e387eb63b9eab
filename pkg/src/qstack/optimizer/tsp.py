"""Travelling-salesman instances and their one-hot QUBO encoding.

Variable ``x[c, t]`` (index ``c * N + t``) says city ``c`` is visited in
time slot ``t``. The energy is

    A * sum_c (1 - sum_t x[c,t])^2 + A * sum_t (1 - sum_c x[c,t])^2
      + sum_{c != c'} sum_t w[c,c'] * x[c,t] * x[c',(t+1) mod N]

so tours are closed cycles. The constant ``2*A*N`` is kept in the model
offset, which makes the energy of a feasible bitstring equal its tour cost.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import BadPenaltyError
from .qubo import QuboModel


@dataclass(eq=False)
class TspInstance:
    weights: np.ndarray
    names: list = field(default_factory=list)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not np.allclose(w, w.T, rtol=0, atol=1e-12):
            raise ValueError("weights must be symmetric")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have a zero diagonal")
        self.weights = w
        if not self.names:
            self.names = [str(i) for i in range(len(w))]
        elif len(self.names) != len(w):
            raise ValueError("one name per city")

    @property
    def num_cities(self) -> int:
        return len(self.weights)

    @classmethod
    def from_coordinates(cls, coords, names=None) -> TspInstance:
        pts = np.asarray(coords, dtype=float)
        diff = pts[:, None, :] - pts[None, :, :]
        return cls(np.sqrt((diff**2).sum(axis=-1)), list(names or []))

    @classmethod
    def load_csv(cls, path) -> TspInstance:
        """Rows of ``city_id,x,y``; a header row is optional."""
        names, coords = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or not "".join(row).strip():
                    continue
                if len(row) != 3:
                    raise ValueError(f"expected city_id,x,y, got {row!r}")
                try:
                    x, y = float(row[1]), float(row[2])
                except ValueError:
                    if not coords and not names:
                        continue  # header
                    raise
                names.append(row[0].strip())
                coords.append((x, y))
        if not coords:
            raise ValueError("no cities in file")
        return cls.from_coordinates(coords, names)

    @classmethod
    def load_json(cls, path) -> TspInstance:
        """``{"weights": [[...]], "names": [...]}`` or a bare matrix."""
        data = json.loads(Path(path).read_text())
        if isinstance(data, dict):
            return cls(np.asarray(data["weights"], dtype=float), list(data.get("names") or []))
        return cls(np.asarray(data, dtype=float))

    def tour_cost(self, tour) -> float:
        return float(sum(self.weights[tour[i], tour[(i + 1) % len(tour)]] for i in range(len(tour))))


def brute_force_tour(instance: TspInstance) -> tuple[list[int], float]:
    """Exhaustive search over cycles starting at city 0 (lexicographic ties)."""
    n = instance.num_cities
    if n == 1:
        return [0], 0.0
    best, best_cost = None, np.inf
    for rest in itertools.permutations(range(1, n)):
        tour = [0, *rest]
        cost = instance.tour_cost(tour)
        if cost < best_cost - 1e-12:
            best, best_cost = tour, cost
    return best, best_cost


def default_penalty(instance: TspInstance) -> float:
    wmax = float(instance.weights.max())
    return 2.0 * instance.num_cities * (wmax if wmax > 0 else 1.0)


@dataclass(frozen=True)
class TspDecoder:
    num_cities: int

    def var(self, city: int, slot: int) -> int:
        return city * self.num_cities + slot

    def decode(self, bits) -> list[int] | None:
        """City order for a one-hot-feasible bitstring, else None."""
        n = self.num_cities
        x = np.asarray([int(b) for b in bits], dtype=np.int64)
        if x.size != n * n:
            raise ValueError(f"expected {n * n} bits")
        grid = x.reshape(n, n)
        if np.any(grid.sum(axis=0) != 1) or np.any(grid.sum(axis=1) != 1):
            return None
        return [int(np.argmax(grid[:, t])) for t in range(n)]

    def encode(self, tour) -> tuple[int, ...]:
        bits = [0] * self.num_cities**2
        for t, c in enumerate(tour):
            bits[self.var(c, t)] = 1
        return tuple(bits)


def encode_tsp(instance: TspInstance, penalty: float | None = None) -> tuple[QuboModel, TspDecoder]:
    n = instance.num_cities
    if n < 3:
        raise ValueError("TSP encoding needs at least 3 cities")
    a = default_penalty(instance) if penalty is None else float(penalty)
    if not (a > 0 and math.isfinite(2 * a * n * n)):
        raise BadPenaltyError(f"penalty must be positive and finite, got {penalty}")
    dec = TspDecoder(n)
    model = QuboModel(n * n, {}, 2 * a * n)
    for c in range(n):
        for t in range(n):
            model.add(dec.var(c, t), dec.var(c, t), -2 * a)
    for c in range(n):
        for t, t2 in itertools.combinations(range(n), 2):
            model.add(dec.var(c, t), dec.var(c, t2), 2 * a)
    for t in range(n):
        for c, c2 in itertools.combinations(range(n), 2):
            model.add(dec.var(c, t), dec.var(c2, t), 2 * a)
    w = instance.weights
    for c in range(n):
        for c2 in range(n):
            if c != c2 and w[c, c2]:
                for t in range(n):
                    model.add(dec.var(c, t), dec.var(c2, (t + 1) % n), w[c, c2])
    return model, dec
