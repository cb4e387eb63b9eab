"""State-vector execution backend with perfect and depolarizing qubits.

States are dense complex128 vectors with qubit 0 as the least significant
bit of the basis index. Internally a batch of trajectories is held as a
tensor of shape ``(shots,) + (2,) * n`` where qubit ``q`` lives on axis
``n - q``.

Per-shot randomness comes from :mod:`qstack.rng`; shot ``s`` of a run with
seed ``K`` uses the stream ``K ^ s``. Draws are consumed in a fixed
structural order, per gate in program order:

* unitary gate: if ``gate_error_p > 0``, one draw per touched qubit
  (u < p selects a Pauli, X/Y/Z by thirds of ``[0, p)``);
* ``measure``: one draw for the Born outcome, then one for the readout
  flip if ``measurement_flip_p > 0``;
* ``prep_z``: one draw for the collapse, then one for a preparation flip
  if ``measurement_flip_p > 0``.

Because the order never depends on outcomes, shots can be simulated in
lockstep batches and still match one-at-a-time execution exactly.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import TooManyQubitsError
from .ir import NON_UNITARY, Circuit, Gate, Opcode
from .rng import SplitMix64, StreamBatch

DEFAULT_MAX_QUBITS = 25
NORM_TOL = 1e-12
# Born probabilities this close to 0 or 1 are snapped, so impossible
# outcomes are never sampled because of rounding.
_SNAP = 1e-13
_BATCH_AMPLITUDES = 1 << 18

# Checked mode: assert unit norm after every bundle. Tests switch it on.
CHECK_NORMALIZATION = os.environ.get("QSTACK_CHECKED", "") not in ("", "0")


class NormalizationError(AssertionError):
    pass


def max_qubits() -> int:
    """Simulator cap; ``QSTACK_MAX_QUBITS`` overrides the default of 25."""
    value = os.environ.get("QSTACK_MAX_QUBITS")
    return int(value) if value else DEFAULT_MAX_QUBITS


_S2 = 1 / math.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_FIXED = {
    Opcode.X: PAULI_X,
    Opcode.Y: PAULI_Y,
    Opcode.Z: PAULI_Z,
    Opcode.H: np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    Opcode.S: np.diag([1, 1j]),
    Opcode.SDAG: np.diag([1, -1j]),
    Opcode.T: np.diag([1, np.exp(1j * math.pi / 4)]),
    Opcode.TDAG: np.diag([1, np.exp(-1j * math.pi / 4)]),
    # two-qubit matrices: the first listed qubit is the high bit of the row index
    Opcode.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    Opcode.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    Opcode.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_PHASES = {
    Opcode.Z: -1.0,
    Opcode.S: 1j,
    Opcode.SDAG: -1j,
    Opcode.T: np.exp(1j * math.pi / 4),
    Opcode.TDAG: np.exp(-1j * math.pi / 4),
}


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of ``gate`` in the ordering of ``gate.qubits`` (first = high bit)."""
    op = gate.opcode
    if op in NON_UNITARY:
        raise ValueError(f"{op.value} is not unitary")
    if op is Opcode.MCZ:
        d = np.ones(1 << len(gate.qubits), dtype=complex)
        d[-1] = -1
        return np.diag(d)
    if op in _FIXED:
        return _FIXED[op].copy()
    c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
    if op is Opcode.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if op is Opcode.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.diag([complex(c, -s), complex(c, s)])  # RZ


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "PERFECT"
    gate_error_p: float = 0.0
    measurement_flip_p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("PERFECT", "DEPOLARIZING"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        for name in ("gate_error_p", "measurement_flip_p"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.kind == "PERFECT" and (self.gate_error_p or self.measurement_flip_p):
            raise ValueError("PERFECT noise carries no error probabilities")

    @classmethod
    def perfect(cls) -> NoiseModel:
        return cls()

    @classmethod
    def depolarizing(cls, p: float, flip: float = 0.0) -> NoiseModel:
        return cls("DEPOLARIZING", float(p), float(flip))

    @classmethod
    def parse(cls, text: str) -> NoiseModel:
        """Parse ``perfect`` or ``depolarizing:<p>[:flip=<q>]``."""
        parts = text.strip().split(":")
        if parts[0].lower() == "perfect" and len(parts) == 1:
            return cls.perfect()
        if parts[0].lower() != "depolarizing" or len(parts) not in (2, 3):
            raise ValueError(f"bad noise spec {text!r}")
        p = float(parts[1])
        flip = 0.0
        if len(parts) == 3:
            key, _, value = parts[2].partition("=")
            if key != "flip" or not value:
                raise ValueError(f"bad noise option {parts[2]!r}")
            flip = float(value)
        if not (math.isfinite(p) and math.isfinite(flip)):
            raise ValueError("noise probabilities must be finite")
        return cls.depolarizing(p, flip)


PERFECT = NoiseModel()


@dataclass
class QuantumState:
    num_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, num_qubits: int) -> QuantumState:
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[0] = 1
        return cls(num_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> QuantumState:
        amps = np.asarray(amplitudes, dtype=complex).copy()
        n = int(round(math.log2(len(amps))))
        if n < 1 or 1 << n != len(amps):
            raise ValueError("amplitude count must be a power of two, at least 2")
        if abs(np.linalg.norm(amps) - 1) > 1e-10:
            raise ValueError("amplitudes must have unit 2-norm")
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((1,) + (2,) * self.num_qubits).copy()

    @classmethod
    def _from_tensor(cls, n: int, t: np.ndarray) -> QuantumState:
        return cls(n, np.ascontiguousarray(t).reshape(-1))


@dataclass
class RunSummary:
    shots: int
    seed: int
    histogram: dict[str, int] = field(default_factory=dict)

    def frequency(self, bitstring: str) -> float:
        return self.histogram.get(bitstring, 0) / self.shots if self.shots else 0.0

    def to_dict(self) -> dict:
        return {"shots": self.shots, "seed": self.seed, "histogram": dict(sorted(self.histogram.items()))}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def merge(self, other: RunSummary) -> RunSummary:
        hist = dict(self.histogram)
        for key, count in other.histogram.items():
            hist[key] = hist.get(key, 0) + count
        return RunSummary(self.shots + other.shots, self.seed, hist)


# ---------------------------------------------------------------- tensor kernels


def _apply_unitary(t: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    op, qs = gate.opcode, gate.qubits
    everything = (slice(None),) * (n + 1)
    if op in _PHASES:
        idx = list(everything)
        idx[n - qs[0]] = 1
        t[tuple(idx)] *= _PHASES[op]
        return t
    if op is Opcode.RZ:
        ax = n - qs[0]
        lo, hi = list(everything), list(everything)
        lo[ax], hi[ax] = 0, 1
        t[tuple(lo)] *= complex(math.cos(gate.angle / 2), -math.sin(gate.angle / 2))
        t[tuple(hi)] *= complex(math.cos(gate.angle / 2), math.sin(gate.angle / 2))
        return t
    if op is Opcode.X:
        return np.flip(t, axis=n - qs[0])
    if op in (Opcode.CZ, Opcode.MCZ):
        idx = list(everything)
        for q in qs:
            idx[n - q] = 1
        t[tuple(idx)] *= -1
        return t
    if op is Opcode.CNOT:
        c_ax, t_ax = n - qs[0], n - qs[1]
        idx = list(everything)
        idx[c_ax] = 1
        idx = tuple(idx)
        sub_ax = t_ax - 1 if t_ax > c_ax else t_ax
        t[idx] = np.flip(t[idx], axis=sub_ax).copy()
        return t
    if op is Opcode.SWAP:
        return np.swapaxes(t, n - qs[0], n - qs[1])
    return _apply_matrix(t, n, gate_matrix(gate), qs)


def _apply_matrix(t: np.ndarray, n: int, u: np.ndarray, qubits) -> np.ndarray:
    k = len(qubits)
    axes = [n - q for q in qubits]
    out = np.tensordot(u.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _measure(t: np.ndarray, n: int, q: int, u: np.ndarray):
    """Born-sample qubit ``q`` in every trajectory and collapse in place."""
    view = np.moveaxis(t, n - q, 1)
    shots = view.shape[0]
    p1 = np.sum(np.abs(view[:, 1].reshape(shots, -1)) ** 2, axis=1)
    p1 = np.where(p1 < _SNAP, 0.0, np.where(p1 > 1 - _SNAP, 1.0, p1))
    outcome = u < p1
    kept = np.where(outcome, p1, 1 - p1)
    view[outcome, 0] = 0
    view[~outcome, 1] = 0
    view *= (1 / np.sqrt(kept)).reshape((shots,) + (1,) * n)
    return outcome, t


def _flip_where(t: np.ndarray, n: int, q: int, mask: np.ndarray) -> np.ndarray:
    if mask.any():
        view = np.moveaxis(t, n - q, 1)
        view[mask] = np.flip(view[mask], axis=1)
    return t


def _depolarize(t: np.ndarray, n: int, q: int, u: np.ndarray, p: float) -> np.ndarray:
    hit = u < p
    if not hit.any():
        return t
    which = np.minimum((u * 3.0 / p).astype(np.int64), 2)
    view = np.moveaxis(t, n - q, 1)
    for code, pauli in enumerate((PAULI_X, PAULI_Y, PAULI_Z)):
        sel = hit & (which == code)
        if sel.any():
            block = view[sel]
            view[sel] = np.einsum("ab,sb...->sa...", pauli, block)
    return t


def _check_norm(t: np.ndarray) -> None:
    norms = np.sum(np.abs(t.reshape(t.shape[0], -1)) ** 2, axis=1)
    worst = float(np.max(np.abs(norms - 1))) if norms.size else 0.0
    if worst > NORM_TOL:
        raise NormalizationError(f"state norm drifted by {worst:.3e}")


def _execute(t, n, gate, noise, draw, record=None):
    """Apply one gate to a trajectory batch. ``draw()`` yields the next uniforms."""
    op = gate.opcode
    flip_p = noise.measurement_flip_p
    if op is Opcode.MEASURE_Z:
        q = gate.qubits[0]
        outcome, t = _measure(t, n, q, draw())
        reported = outcome
        if flip_p > 0:
            reported = outcome ^ (draw() < flip_p)
        if record is not None:
            record(q, reported)
        return t
    if op is Opcode.PREP_Z:
        q = gate.qubits[0]
        outcome, t = _measure(t, n, q, draw())
        t = _flip_where(t, n, q, outcome)
        if flip_p > 0:
            t = _flip_where(t, n, q, draw() < flip_p)
        return t
    t = _apply_unitary(t, n, gate)
    if noise.gate_error_p > 0:
        for q in gate.qubits:
            t = _depolarize(t, n, q, draw(), noise.gate_error_p)
    return t


# ---------------------------------------------------------------- single-state API


def apply_gate(state: QuantumState, gate: Gate, rng=None) -> QuantumState:
    """Apply ``gate`` to a copy of ``state``.

    ``measure`` and ``prep_z`` need ``rng`` (anything with ``random()``);
    unitary gates ignore it.
    """
    if any(q >= state.num_qubits for q in gate.qubits):
        raise ValueError(f"gate {gate} out of range for {state.num_qubits} qubits")
    n = state.num_qubits
    t = state._tensor()
    if gate.opcode in NON_UNITARY:
        if rng is None:
            raise ValueError(f"{gate.opcode.value} needs an rng")
        t = _execute(t, n, gate, PERFECT, lambda: np.array([rng.random()]))
    else:
        t = _apply_unitary(t, n, gate)
    return QuantumState._from_tensor(n, t)


def apply_depolarizing(state: QuantumState, qubits, p: float, rng) -> QuantumState:
    """Independently hit each listed qubit with X, Y or Z (p/3 each)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n = state.num_qubits
    t = state._tensor()
    if p > 0:
        for q in qubits:
            t = _depolarize(t, n, q, np.array([rng.random()]), p)
    return QuantumState._from_tensor(n, t)


def measure(state: QuantumState, qubit: int, rng, flip_p: float = 0.0) -> tuple[int, QuantumState]:
    """Measure ``qubit`` in Z; returns (reported bit, collapsed state).

    The collapse follows the true outcome; the reported bit is flipped
    with probability ``flip_p``.
    """
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range")
    outcome, t = _measure(state._tensor(), n, qubit, np.array([rng.random()]))
    bit = int(outcome[0])
    if flip_p > 0 and rng.random() < flip_p:
        bit ^= 1
    return bit, QuantumState._from_tensor(n, t)


def statevector(circuit: Circuit, skip_measurements: bool = False) -> QuantumState:
    """Final state of a measurement-free circuit run from |0...0>."""
    n = circuit.num_qubits
    t = QuantumState.zero(n)._tensor()
    for bundle in circuit.bundles:
        for gate in bundle.gates:
            if gate.opcode in NON_UNITARY:
                if skip_measurements and gate.opcode is Opcode.MEASURE_Z:
                    continue
                raise ValueError(f"statevector() cannot execute {gate.opcode.value}")
            t = _apply_unitary(t, n, gate)
        if CHECK_NORMALIZATION:
            _check_norm(t)
    return QuantumState._from_tensor(n, t)


def run_trajectory(circuit: Circuit, noise: NoiseModel, seed: int, shot: int):
    """Execute a single shot gate by gate through the public single-state API.

    Returns ``(bits, state)`` where ``bits`` maps measured qubit -> reported
    bit. Matches what :func:`run` does for shot ``shot``.
    """
    rng = SplitMix64.for_shot(seed, shot)
    n = circuit.num_qubits
    state = QuantumState.zero(n)
    bits: dict[int, int] = {}
    p, flip_p = noise.gate_error_p, noise.measurement_flip_p
    for bundle in circuit.bundles:
        for gate in bundle.gates:
            if gate.opcode is Opcode.MEASURE_Z:
                bit, state = measure(state, gate.qubits[0], rng, flip_p)
                bits[gate.qubits[0]] = bit
            elif gate.opcode is Opcode.PREP_Z:
                state = apply_gate(state, gate, rng)
                if flip_p > 0 and rng.random() < flip_p:
                    state = apply_gate(state, Gate(Opcode.X, gate.qubits))
            else:
                state = apply_gate(state, gate)
                state = apply_depolarizing(state, gate.qubits, p, rng)
        if CHECK_NORMALIZATION and abs(state.norm() ** 2 - 1) > NORM_TOL:
            raise NormalizationError(f"state norm drifted to {state.norm()}")
    return bits, state


# ---------------------------------------------------------------- shot engine


def run(circuit, noise: NoiseModel = PERFECT, shots: int = 1024, seed: int = 0, cap: int | None = None) -> RunSummary:
    """Execute ``shots`` independent shots from |0...0> and histogram them.

    Accepts a :class:`Circuit` or anything with a ``.circuit`` attribute
    (a scheduled circuit). Histogram keys list the measured qubits only,
    highest qubit index first.
    """
    circuit = getattr(circuit, "circuit", circuit)
    cap = max_qubits() if cap is None else cap
    if circuit.num_qubits > cap:
        raise TooManyQubitsError(f"circuit has {circuit.num_qubits} qubits, simulator cap is {cap}")
    if shots < 0:
        raise ValueError("shots must be nonnegative")
    measured = circuit.measured_qubits()
    plan = _terminal_plan(circuit, noise)
    if plan is not None:
        bits = _sample_terminal(circuit, noise, plan, shots, seed, measured)
    else:
        bits = _run_batched(circuit, noise, shots, seed, measured)
    return RunSummary(shots, seed, _histogram(bits, len(measured)))


def _histogram(bits: np.ndarray, m: int) -> dict[str, int]:
    if m == 0:
        return {"": int(bits.shape[0])} if bits.shape[0] else {}
    codes = bits.astype(np.int64) @ (np.int64(1) << np.arange(m, dtype=np.int64))
    values, counts = np.unique(codes, return_counts=True)
    return {format(int(v), f"0{m}b"): int(c) for v, c in zip(values, counts)}


def _run_batched(circuit: Circuit, noise: NoiseModel, shots: int, seed: int, measured) -> np.ndarray:
    n = circuit.num_qubits
    column = {q: j for j, q in enumerate(measured)}
    bits = np.zeros((shots, len(measured)), dtype=np.int8)
    chunk = max(1, _BATCH_AMPLITUDES >> n)
    for start in range(0, shots, chunk):
        stop = min(shots, start + chunk)
        streams = StreamBatch(seed, np.arange(start, stop))
        t = np.zeros((stop - start,) + (2,) * n, dtype=complex)
        t[(slice(None),) + (0,) * n] = 1

        def record(q, reported, _start=start, _stop=stop):
            bits[_start:_stop, column[q]] = reported

        for bundle in circuit.bundles:
            for gate in bundle.gates:
                t = _execute(t, n, gate, noise, streams.next, record)
            if CHECK_NORMALIZATION:
                _check_norm(t)
    return bits


def _terminal_plan(circuit: Circuit, noise: NoiseModel):
    """Gate list and draw schedule when one noiseless evolution suffices.

    Eligible when gate noise is off and no qubit is touched after its first
    measurement; ``prep_z`` is allowed only on a still-fresh qubit.
    """
    if noise.gate_error_p > 0:
        return None
    flip = noise.measurement_flip_p > 0
    touched: set[int] = set()
    measured: set[int] = set()
    evolution: list[list[Gate]] = []
    events: list[tuple[int, int, int | None]] = []
    draws = 0
    for bundle in circuit.bundles:
        step = []
        for gate in bundle.gates:
            if gate.opcode is Opcode.MEASURE_Z:
                q = gate.qubits[0]
                measured.add(q)
                draws += 1
                flip_draw = None
                if flip:
                    draws += 1
                    flip_draw = draws
                events.append((q, draws - (1 if flip else 0), flip_draw))
            elif gate.opcode is Opcode.PREP_Z:
                q = gate.qubits[0]
                if flip or q in touched or q in measured:
                    return None
                touched.add(q)
                draws += 1
            else:
                if measured.intersection(gate.qubits):
                    return None
                touched.update(gate.qubits)
                step.append(gate)
        if step:
            evolution.append(step)
    return evolution, events


def _sample_terminal(circuit, noise, plan, shots, seed, measured) -> np.ndarray:
    n = circuit.num_qubits
    evolution, events = plan
    t = QuantumState.zero(n)._tensor()
    for step in evolution:
        for gate in step:
            t = _apply_unitary(t, n, gate)
        if CHECK_NORMALIZATION:
            _check_norm(t)
    bits = np.zeros((shots, len(measured)), dtype=np.int8)
    if not events or shots == 0:
        return bits

    order: list[int] = []
    for q, _, _ in events:
        if q not in order:
            order.append(q)
    probs = np.abs(t.reshape((2,) * n)) ** 2
    other = tuple(n - 1 - q for q in range(n) if q not in order)
    probs = probs.sum(axis=other) if other else probs
    # remaining axes are the measured qubits in descending qubit order
    remaining = sorted(order, reverse=True)
    probs = np.transpose(probs, [remaining.index(q) for q in order])
    d = len(order)
    prefix_mass = [None] * (d + 1)
    prefix_mass[d] = probs.reshape(-1)
    for j in range(d - 1, -1, -1):
        prefix_mass[j] = prefix_mass[j + 1].reshape(-1, 2).sum(axis=1)

    streams = StreamBatch(seed, np.arange(shots))
    column = {q: j for j, q in enumerate(measured)}
    rank = {q: j for j, q in enumerate(order)}
    prefix = np.zeros(shots, dtype=np.int64)
    true_bit: dict[int, np.ndarray] = {}
    for q, draw_k, flip_k in events:
        u = streams.draw(draw_k)
        if q in true_bit:
            outcome = true_bit[q]
        else:
            j = rank[q]
            total = prefix_mass[j][prefix]
            ones = prefix_mass[j + 1][2 * prefix + 1]
            with np.errstate(invalid="ignore", divide="ignore"):
                p1 = np.where(total > 0, ones / total, 0.0)
            p1 = np.where(p1 < _SNAP, 0.0, np.where(p1 > 1 - _SNAP, 1.0, p1))
            outcome = u < p1
            prefix = 2 * prefix + outcome
            true_bit[q] = outcome
        reported = outcome
        if flip_k is not None:
            reported = outcome ^ (streams.draw(flip_k) < noise.measurement_flip_p)
        bits[:, column[q]] = reported
    return bits
