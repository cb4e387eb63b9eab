"""Single-qubit randomized benchmarking on the noisy simulator.

For each length ``m`` a set of random Clifford sequences is drawn, each
closed by the Clifford that inverts the product, and the survival
probability P(0) is estimated from shots. The decay ``A * f**m + B`` is
fitted by least squares and the error per Clifford is ``(1 - f) / 2``.

Under this simulator's depolarizing model every gate applies the channel
``rho -> l*rho + (1-l)*I/2`` with ``l = 1 - 4p/3``. The channel commutes
with every unitary, so a Clifford with a ``g``-gate word contributes
``l**g`` and the decay predicted by the noise model itself is
``f = mean over the group of l**g``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from ..errors import FitFailedError
from ..ir import Circuit, Gate, Opcode
from ..rng import derive_seed
from ..simulator import NoiseModel, run
from . import clifford


@dataclass(frozen=True)
class RbConfig:
    sequence_lengths: tuple[int, ...] = (2, 4, 8, 16, 32, 64, 128, 256)
    sequences_per_length: int = 30
    gate_error_p: float = 0.0
    shots: int = 500

    def __post_init__(self):
        lengths = tuple(int(m) for m in self.sequence_lengths)
        object.__setattr__(self, "sequence_lengths", lengths)
        if not lengths or lengths[0] < 1 or any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("sequence lengths must be positive and strictly increasing")
        if self.sequences_per_length < 1 or self.shots < 1:
            raise ValueError("need at least one sequence and one shot")
        if not 0.0 <= self.gate_error_p <= 1.0:
            raise ValueError("gate_error_p must lie in [0, 1]")


@dataclass
class RbResult:
    lengths: list
    survival_mean: list
    survival_std: list
    amplitude: float  # A
    baseline: float  # B
    decay: float  # f
    error_per_clifford: float
    predicted_decay: float
    predicted_error: float

    def to_dict(self) -> dict:
        return {
            "lengths": self.lengths,
            "survival_mean": self.survival_mean,
            "survival_std": self.survival_std,
            "fit": {"A": self.amplitude, "B": self.baseline, "f": self.decay},
            "error_per_clifford": self.error_per_clifford,
            "predicted": {"f": self.predicted_decay, "error_per_clifford": self.predicted_error},
        }


def random_sequence(length: int, rng: np.random.Generator) -> list[int]:
    """``length`` uniform Cliffords followed by their inverse."""
    seq = [int(c) for c in rng.integers(0, clifford.SIZE, size=length)]
    net = 0
    for c in seq:
        net = clifford.COMPOSE[net][c]
    return seq + [clifford.INVERSE[net]]


def sequence_circuit(sequence) -> Circuit:
    gates = [g for c in sequence for g in clifford.word_gates(c)]
    return Circuit.from_gates(1, gates + [Gate(Opcode.MEASURE_Z, (0,))])


def predicted_decay(p: float) -> float:
    lam = 1 - 4 * p / 3
    return sum(lam ** len(w) for w in clifford.WORDS) / clifford.SIZE


def _model(m, a, f, b):
    return a * np.power(f, m) + b


def fit_decay(lengths, survival) -> tuple[float, float, float]:
    """Least-squares ``A * f**m + B`` with all three parameters in [0, 1]."""
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(survival, dtype=float)
    try:
        with warnings.catch_warnings():
            # covariance is unused; three lengths give an exactly determined fit
            warnings.simplefilter("ignore", OptimizeWarning)
            (a, f, b), _ = curve_fit(_model, m, y, p0=(0.5, 0.99, 0.5), bounds=([0, 0, 0], [1, 1, 1]))
    except (RuntimeError, ValueError) as exc:
        raise FitFailedError(f"decay fit did not converge: {exc}") from exc
    return float(a), float(f), float(b)


def run_rb(config: RbConfig, seed: int = 0) -> RbResult:
    noise = NoiseModel.depolarizing(config.gate_error_p)
    means, stds = [], []
    for li, length in enumerate(config.sequence_lengths):
        survival = []
        for si in range(config.sequences_per_length):
            rng = np.random.default_rng(derive_seed(seed, li, si, 0))
            circuit = sequence_circuit(random_sequence(length, rng))
            summary = run(circuit, noise, config.shots, derive_seed(seed, li, si, 1))
            survival.append(summary.frequency("0"))
        means.append(float(np.mean(survival)))
        stds.append(float(np.std(survival, ddof=1)) if len(survival) > 1 else 0.0)

    k = config.sequences_per_length
    for i in range(len(means) - 1):
        band = 2 * math.hypot(stds[i], stds[i + 1]) / math.sqrt(k)
        if means[i + 1] > means[i] + band + 1e-12:
            raise FitFailedError(
                f"survival rises from length {config.sequence_lengths[i]} to {config.sequence_lengths[i + 1]}"
                " beyond statistical noise; increase sequences or shots"
            )
    a, f, b = fit_decay(config.sequence_lengths, means)
    f_pred = predicted_decay(config.gate_error_p)
    return RbResult(
        list(config.sequence_lengths), means, stds, a, b, f, (1 - f) / 2, f_pred, (1 - f_pred) / 2
    )
