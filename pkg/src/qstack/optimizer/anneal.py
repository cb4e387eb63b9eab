"""Simulated annealing for QUBO models.

Single-bit-flip Metropolis with geometric cooling ``T_k = T0 * alpha**k``
(one temperature per sweep, sites visited in index order). Restarts are
independent: restart ``r`` draws from its own stream seeded by
``derive_seed(seed, 1, r)``, so the best of the first ``R`` restarts never
depends on how many restarts follow. All restarts advance in lockstep as
rows of numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import derive_seed
from .qubo import Assignment, QuboModel, evaluate

_SWEEP_BLOCK = 256


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 5000
    alpha: float = 0.99
    t0: float | None = None  # None: max |dE| over 100 random single flips

    def __post_init__(self):
        if self.sweeps < 0:
            raise ValueError("sweeps must be nonnegative")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


def estimate_t0(model: QuboModel, seed: int, samples: int = 100) -> float:
    """Largest |dE| seen over random single-bit flips of random states."""
    rng = np.random.default_rng(derive_seed(seed, 0))
    n = model.n
    q = model.matrix()
    sym = q + q.T - 2 * np.diag(np.diag(q))
    x = rng.integers(0, 2, size=(samples, n)).astype(float)
    site = rng.integers(0, n, size=samples)
    rows = np.arange(samples)
    field = np.diag(q)[site] + np.einsum("rj,rj->r", x, sym[site])
    d_e = np.abs((1 - 2 * x[rows, site]) * field)
    t0 = float(d_e.max()) if samples else 0.0
    return t0 if t0 > 0 else 1.0


def anneal_restarts(
    model: QuboModel, schedule: AnnealSchedule | None = None, restarts: int = 25, seed: int = 0
) -> list[Assignment]:
    """Best assignment seen by each restart, in restart order."""
    schedule = schedule or AnnealSchedule()
    n = model.n
    if n < 1:
        raise ValueError("model has no variables")
    if restarts < 1:
        raise ValueError("need at least one restart")
    t0 = schedule.t0 if schedule.t0 is not None else estimate_t0(model, seed)
    q = model.matrix()
    diag = np.diag(q).copy()
    sym = q + q.T - 2 * np.diag(diag)

    gens = [np.random.default_rng(derive_seed(seed, 1, r)) for r in range(restarts)]
    x = np.stack([g.integers(0, 2, size=n) for g in gens]).astype(float)
    field = x @ sym
    energy = ((x @ q) * x).sum(axis=1)
    best_energy = energy.copy()
    best_x = x.copy()
    rows = np.arange(restarts)

    temp = t0
    done = 0
    while done < schedule.sweeps:
        block = min(_SWEEP_BLOCK, schedule.sweeps - done)
        # accept a move iff dE < T * -log(u)  <=>  u < exp(-dE / T)
        thresholds = -np.log1p(-np.stack([g.random((block, n)) for g in gens]))
        for s in range(block):
            th = thresholds[:, s, :] * temp
            for i in range(n):
                direction = 1 - 2 * x[:, i]
                d_e = direction * (diag[i] + field[:, i])
                accept = d_e < th[:, i]
                if accept.any():
                    step = direction * accept
                    x[:, i] += step
                    field += step[:, None] * sym[i]
                    energy += d_e * accept
                    better = energy < best_energy
                    if better.any():
                        best_energy = np.where(better, energy, best_energy)
                        best_x[better] = x[better]
            temp *= schedule.alpha
        done += block

    out = []
    for r in rows:
        bits = tuple(int(b) for b in best_x[r])
        out.append(Assignment(bits, evaluate(model, bits)))
    return out


def anneal(model: QuboModel, schedule: AnnealSchedule | None = None, restarts: int = 25, seed: int = 0) -> Assignment:
    """Lowest-energy result over all restarts (ties: earliest restart)."""
    results = anneal_restarts(model, schedule, restarts, seed)
    return min(results, key=lambda a: a.energy)
