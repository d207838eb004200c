"""Deterministic, splittable random number streams.

The whole package draws its randomness from splitmix64, a counter-style
64-bit generator: the state advances by a fixed odd increment (the golden
gamma) and every output is a bijective avalanche mix of the new state.
Because the k-th output of a stream is a closed-form function of
``seed + (k+1) * gamma``, blocks of outputs can be produced with vectorized
uint64 arithmetic, and the scalar and vectorized paths agree bit for bit.

Child streams are derived with :func:`derive_seed`, which mixes
``(seed, index)`` into a fresh 64-bit seed.  Replicate i of any experiment
owns the stream ``Stream(derive_seed(master_seed, i))``, so results are
independent of worker count, chunking, and execution order, and identical
across platforms.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_MIX_MULT_1 = 0xBF58476D1CE4E5B9
_MIX_MULT_2 = 0x94D049BB133111EB
_DERIVE_SALT = 0xD1B54A32D192ED03

# Pre-wrapped numpy constants for the vectorized path.  uint64 arithmetic in
# numpy wraps modulo 2**64, matching the masked scalar path exactly.
GAMMA_U64 = np.uint64(GOLDEN_GAMMA)
_M1_U64 = np.uint64(_MIX_MULT_1)
_M2_U64 = np.uint64(_MIX_MULT_2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

#: Scale factor turning the top 53 bits of a u64 into a float in [0, 1).
U53_INV = 2.0 ** -53


def mix64(z: int) -> int:
    """Finalize one 64-bit state into an output word (scalar path)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_MULT_1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_MULT_2) & MASK64
    return z ^ (z >> 31)


def mix64_vec(z: np.ndarray) -> np.ndarray:
    """Finalize an array of uint64 states (vectorized path)."""
    z = (z ^ (z >> _S30)) * _M1_U64
    z = (z ^ (z >> _S27)) * _M2_U64
    return z ^ (z >> _S31)


def derive_seed(seed: int, index: int) -> int:
    """Derive the seed of child stream ``index`` from a parent seed.

    The child seeds of distinct indices come from distinct counter positions
    and are passed through the finalizer twice with a salt in between, so
    they are decorrelated both from each other and from the parent stream's
    own outputs.
    """
    if index < 0:
        raise ValueError("stream index must be non-negative")
    z = (int(seed) + (index + 1) * GOLDEN_GAMMA) & MASK64
    return mix64(mix64(z) ^ _DERIVE_SALT)


def derive_seeds(seed: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized :func:`derive_seed` for an array of child indices."""
    idx = np.asarray(indices, dtype=np.uint64)
    z = np.uint64(int(seed) & MASK64) + (idx + np.uint64(1)) * GAMMA_U64
    return mix64_vec(mix64_vec(z) ^ np.uint64(_DERIVE_SALT))


def derive_child_seeds(seeds: np.ndarray, index: int) -> np.ndarray:
    """Vectorized :func:`derive_seed` for an array of parent seeds.

    Elementwise identical to ``derive_seed(int(s), index)``.
    """
    if index < 0:
        raise ValueError("stream index must be non-negative")
    step = np.uint64(((index + 1) * GOLDEN_GAMMA) & MASK64)
    z = seeds.astype(np.uint64) + step
    return mix64_vec(mix64_vec(z) ^ np.uint64(_DERIVE_SALT))


def uniform_from_u64(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to floats in [0, 1) using their top 53 bits."""
    return (words >> _S11).astype(np.float64) * U53_INV


class Stream:
    """A sequential splitmix64 stream.

    Scalar draws (`uniform`, `randint`, ...) and block draws (`uniforms`)
    consume the same underlying u64 sequence, so code may mix them freely
    without changing what any later draw sees.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """One float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * U53_INV

    def uniforms(self, size: int) -> np.ndarray:
        """Block of ``size`` floats in [0, 1); advances the state by ``size``."""
        if size < 0:
            raise ValueError("size must be non-negative")
        steps = np.arange(1, size + 1, dtype=np.uint64) * GAMMA_U64
        words = mix64_vec(np.uint64(self.state) + steps)
        self.state = (self.state + size * GOLDEN_GAMMA) & MASK64
        return uniform_from_u64(words)

    def exponential(self, mean: float = 1.0) -> float:
        """One Exp(mean) draw via inversion; consumes one uniform."""
        return -mean * math.log1p(-self.uniform())

    def randint(self, upper: int) -> int:
        """One integer uniform on {0, ..., upper-1}.

        Uses ``floor(u * upper)``; for upper far below 2**53 the bias is
        negligible (well under one part in 2**40 for upper <= 10**7).
        """
        if upper <= 0:
            raise ValueError("upper must be positive")
        k = int(self.uniform() * upper)
        return min(k, upper - 1)

    def jump(self, steps: int) -> None:
        """Skip ``steps`` draws without generating them."""
        if steps < 0:
            raise ValueError("steps must be non-negative")
        self.state = (self.state + steps * GOLDEN_GAMMA) & MASK64


class UniformBuffer:
    """Scalar-consumption view over block-generated uniforms.

    Tight Python loops (skip samplers, pairing retries) call :meth:`take`
    once per draw; refills happen in vectorized blocks so the per-draw cost
    stays near list-indexing speed while the consumed sequence is exactly
    the stream's.
    """

    __slots__ = ("_stream", "_block", "_buf", "_pos")

    def __init__(self, stream: Stream, block: int = 1 << 14):
        self._stream = stream
        self._block = int(block)
        self._buf: list[float] = []
        self._pos = 0

    def take(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._stream.uniforms(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u
