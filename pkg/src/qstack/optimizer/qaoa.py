"""QAOA for Ising models on the state-vector simulator.

Circuit per layer k: ``rz(2*gamma_k*h_i)`` for every nonzero field,
``cnot; rz(2*gamma_k*J_ij); cnot`` for every nonzero coupling, then
``rx(2*beta_k)`` on every qubit. Spin ``s_i = +1`` is measured ``0`` (the
Z eigenvalue). Returned assignments use QUBO bits ``x_i = (1 + s_i) / 2``,
so they plug straight into :func:`qubo.evaluate` for a converted model.

The classical loop is derivative-free and budgeted in circuit
evaluations: an 8x8 grid over ``gamma in [0, pi)``, ``beta in [0, pi/2)``
per layer, then coordinate descent with halving steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import TooManyQubitsError
from ..ir import Bundle, Circuit, Gate, Opcode
from ..rng import derive_seed
from ..simulator import PERFECT, NoiseModel, max_qubits, run
from .qubo import Assignment, IsingModel, ising_energy

GRID = 8
MIN_STEP = 1e-3


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise ValueError("need p >= 1 gammas and the same number of betas")

    @property
    def layers(self) -> int:
        return len(self.gammas)

    @classmethod
    def zeros(cls, layers: int) -> QaoaParams:
        return cls((0.0,) * layers, (0.0,) * layers)

    def to_dict(self) -> dict:
        return {"layers": self.layers, "gammas": list(self.gammas), "betas": list(self.betas)}


def qaoa_build(ising: IsingModel, params: QaoaParams, cap: int | None = None) -> Circuit:
    n = ising.n
    cap = max_qubits() if cap is None else cap
    if n > cap:
        raise TooManyQubitsError(f"{n} spins exceed the simulator cap of {cap}")
    if n < 1:
        raise ValueError("model has no spins")
    everyone = range(n)
    bundles = [Bundle(tuple(Gate(Opcode.H, (q,)) for q in everyone))]
    for gamma, beta in zip(params.gammas, params.betas):
        fields = [Gate(Opcode.RZ, (i,), 2 * gamma * h) for i, h in enumerate(ising.h) if h]
        if fields:
            bundles.append(Bundle(tuple(fields)))
        for (i, j), v in sorted(ising.J.items()):
            if v:
                bundles.append(Bundle((Gate(Opcode.CNOT, (i, j)),)))
                bundles.append(Bundle((Gate(Opcode.RZ, (j,), 2 * gamma * v),)))
                bundles.append(Bundle((Gate(Opcode.CNOT, (i, j)),)))
        bundles.append(Bundle(tuple(Gate(Opcode.RX, (q,), 2 * beta) for q in everyone)))
    bundles.append(Bundle(tuple(Gate(Opcode.MEASURE_Z, (q,)) for q in everyone)))
    return Circuit(n, tuple(bundles))


def spins_of(key: str) -> list[int]:
    """Histogram key (highest qubit first) to spins, qubit order."""
    return [1 - 2 * int(ch) for ch in reversed(key)]


@dataclass
class Evaluation:
    params: QaoaParams
    mean_energy: float
    best_key: str
    best_energy: float


def sample_energy(
    ising: IsingModel, params: QaoaParams, shots: int, seed: int, noise: NoiseModel = PERFECT
) -> Evaluation:
    """Mean Ising energy over ``shots`` samples plus the best sample seen."""
    summary = run(qaoa_build(ising, params), noise, shots, seed)
    total = 0.0
    best_key, best_energy = None, math.inf
    for key, count in sorted(summary.histogram.items()):
        e = ising_energy(ising, spins_of(key))
        total += e * count
        if e < best_energy:
            best_key, best_energy = key, e
    return Evaluation(params, total / shots, best_key, best_energy)


def qaoa_optimize(
    ising: IsingModel,
    layers: int = 1,
    shots_per_eval: int = 512,
    seed: int = 0,
    budget: int = 100,
    noise: NoiseModel = PERFECT,
    trace: list | None = None,
) -> tuple[QaoaParams, Assignment]:
    """Tune (gamma, beta) to minimise the sampled mean energy.

    Evaluation ``e`` samples with seed ``derive_seed(seed, e)``. Returns the
    best parameters found and the lowest-energy bitstring sampled over all
    evaluations. ``trace``, when given, receives every :class:`Evaluation`.
    """
    if budget < 1:
        raise ValueError("budget must allow at least one evaluation")
    if layers < 1:
        raise ValueError("need at least one layer")
    gammas = [0.0] * layers
    betas = [0.0] * layers
    used = 0
    best_sample: tuple[float, str] | None = None

    def evaluate(gs, bs) -> float:
        nonlocal used, best_sample
        ev = sample_energy(ising, QaoaParams(gs, bs), shots_per_eval, derive_seed(seed, used), noise)
        used += 1
        if trace is not None:
            trace.append(ev)
        if best_sample is None or ev.best_energy < best_sample[0]:
            best_sample = (ev.best_energy, ev.best_key)
        return ev.mean_energy

    current = math.inf
    for layer in range(layers):
        best_point = (gammas[layer], betas[layer])
        for gi in range(GRID):
            for bi in range(GRID):
                if used >= budget:
                    break
                gammas[layer] = math.pi * gi / GRID
                betas[layer] = (math.pi / 2) * bi / GRID
                value = evaluate(gammas, betas)
                if value < current:
                    current, best_point = value, (gammas[layer], betas[layer])
        gammas[layer], betas[layer] = best_point

    step_g, step_b = math.pi / GRID, math.pi / (2 * GRID)
    while used < budget and step_g > MIN_STEP:
        improved = False
        for layer in range(layers):
            for coords, step in ((gammas, step_g), (betas, step_b)):
                for sign in (1, -1):
                    if used >= budget:
                        break
                    old = coords[layer]
                    coords[layer] = old + sign * step
                    value = evaluate(gammas, betas)
                    if value < current:
                        current, improved = value, True
                        break
                    coords[layer] = old
        if not improved:
            step_g, step_b = step_g / 2, step_b / 2

    energy, key = best_sample
    bits = tuple(1 - int(ch) for ch in reversed(key))
    return QaoaParams(gammas, betas), Assignment(bits, energy)
