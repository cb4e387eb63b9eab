"""Counter-based SplitMix64 streams.

Every shot (or restart, or task) owns an independent stream keyed by
``mix64(mix64(seed) ^ index)``: the run seed is hashed before the index is
XOR-ed in, so runs with small seeds do not share substreams, and the
result is hashed again to decorrelate neighbouring indices. Draw ``k``
(1-based) of a stream with key ``b`` is ``mix64(b + k * GOLDEN)``, so a
whole batch of streams can be advanced in lockstep with numpy and still
match the scalar generator bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_UNIT = 2.0**-53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, index: int) -> int:
    return mix64(mix64(seed) ^ (index & MASK64))


def derive_seed(seed: int, *keys: int) -> int:
    """Hash ``seed`` and a path of integer keys into a fresh 64-bit seed."""
    z = seed & MASK64
    for key in keys:
        z = mix64((z ^ (key & MASK64)) + GOLDEN)
    return z


class SplitMix64:
    """Scalar stream; exposes ``random()`` like :class:`random.Random`."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def random(self) -> float:
        self.state = (self.state + GOLDEN) & MASK64
        return (mix64(self.state) >> 11) * _TO_UNIT

    @classmethod
    def for_shot(cls, seed: int, shot: int) -> SplitMix64:
        return cls(stream_key(seed, shot))


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


class StreamBatch:
    """A batch of shot streams advanced together.

    ``draw(k)`` returns the ``k``-th uniform (1-based) of every stream,
    i.e. what ``SplitMix64.for_shot(seed, s).random()`` returns on its
    ``k``-th call.
    """

    def __init__(self, seed: int, shot_indices):
        shots = np.asarray(shot_indices, dtype=np.uint64)
        with np.errstate(over="ignore"):
            self.base = _mix64_array(np.uint64(mix64(seed)) ^ shots)
        self.count = 0

    def __len__(self) -> int:
        return len(self.base)

    def draw(self, k: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            z = self.base + np.uint64((k * GOLDEN) & MASK64)
            z = _mix64_array(z)
        return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT

    def next(self) -> np.ndarray:
        self.count += 1
        return self.draw(self.count)
