"""Deterministic Brownian half-step increments from counter-based streams.

Every random number used in a simulation is a pure function of a
:class:`StreamKey` ``(seed, level, sample_index, step_index)``.  There is no
shared generator state, so paths can be simulated in any order, in any batch
size, on any number of workers, and always reproduce bit-identical values.

The bit source is Philox4x64-10 evaluated vectorised in numpy: ``(seed,
level)`` form the 128-bit key, ``(sample_index, step_index, stream)`` are
packed into the 256-bit counter, and each counter block yields four 64-bit
words.  Uniform doubles are built from the top 52 bits of each word (so they
lie strictly inside (0, 1)) and mapped to standard normals through the
inverse normal CDF (``scipy.special.ndtri``, Cephes ``ndtri`` polynomial
approximation).  No rejection loops, so the draw count per key is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = [
    "StreamKey",
    "BrownianSlice",
    "RngError",
    "PATH_STREAM",
    "ORACLE_STREAM",
    "standard_normals",
    "draw_slice",
    "draw_slices",
    "coarse_increment",
    "antithetic_swap",
]

# Philox4x64 multipliers and Weyl key schedule constants (Random123).
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B
_MASK64 = (1 << 64) - 1
_ROUNDS = 10

_U32 = np.uint64(32)
_LO32 = np.uint64(0xFFFFFFFF)

# Counter word 2 separates independent sub-streams that share one
# (seed, level) key: production path increments vs. test-oracle refinement.
PATH_STREAM = 0
ORACLE_STREAM = 1


class RngError(RuntimeError):
    """Hard failure of the random number generator (misconfiguration)."""


@dataclass(frozen=True)
class StreamKey:
    """Identifies one coarse step of one sample path at one level."""

    seed: int
    level: int
    sample_index: int
    step_index: int

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        if not 0 <= self.sample_index < 1 << 64:
            raise ValueError(f"sample_index out of range: {self.sample_index}")
        if self.step_index < 0:
            raise ValueError(f"step_index must be >= 0, got {self.step_index}")


@dataclass(frozen=True)
class BrownianSlice:
    """Pair of increment vectors over the two halves of a coarse step.

    ``delta_first`` covers ``[t_n, t_n + dt/2]`` and ``delta_second`` covers
    ``[t_n + dt/2, t_n + dt]``.  Arrays are either ``(D,)`` for a single path
    or ``(n_samples, D)`` for a batch.
    """

    delta_first: np.ndarray
    delta_second: np.ndarray


def _mulhilo(m, x):
    # 64x64 -> 128-bit product of a constant with a uint64 array using
    # 32-bit limbs; numpy has no widening multiply.
    mhi = m >> _U32
    mlo = m & _LO32
    xhi = x >> _U32
    xlo = x & _LO32
    ll = mlo * xlo
    mid1 = mhi * xlo + (ll >> _U32)
    mid2 = mlo * xhi + (mid1 & _LO32)
    hi = mhi * xhi + (mid1 >> _U32) + (mid2 >> _U32)
    lo = (ll & _LO32) | (mid2 << _U32)
    return hi, lo


def philox4x64(c0, c1, c2, c3, key0, key1):
    """Philox4x64-10 block function, elementwise over counter arrays.

    Returns the four output words for every counter ``(c0, c1, c2, c3)``.
    Matches ``numpy.random.Philox`` raw output for the same key and counter
    (numpy increments its counter before producing a block).
    """
    k0, k1 = key0 & _MASK64, key1 & _MASK64
    for r in range(_ROUNDS):
        if r:
            k0 = (k0 + _W0) & _MASK64
            k1 = (k1 + _W1) & _MASK64
        nk0, nk1 = np.uint64(k0), np.uint64(k1)
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ nk0, lo1, hi0 ^ c3 ^ nk1, lo0
    return c0, c1, c2, c3


def _raw_words(seed, level, sample_indices, step_index, n_per_sample, stream):
    """Fixed 64-bit words for each (sample, slot); pure in the key fields."""
    samples = np.asarray(sample_indices, dtype=np.uint64)
    n_blocks = -(-n_per_sample // 4)
    base = step_index * n_blocks
    if base + n_blocks > _MASK64:
        raise RngError("step_index too large for the counter layout")
    c0 = np.uint64(base) + np.arange(n_blocks, dtype=np.uint64)
    c0 = np.broadcast_to(c0, (samples.size, n_blocks)).ravel()
    c1 = np.repeat(samples, n_blocks)
    c2 = np.full(c0.size, stream, dtype=np.uint64)
    c3 = np.zeros(c0.size, dtype=np.uint64)
    out = philox4x64(c0, c1, c2, c3, seed, level)
    words = np.stack(out, axis=-1).reshape(samples.size, 4 * n_blocks)
    return words[:, :n_per_sample]


def standard_normals(seed, level, sample_indices, step_index, count,
                     stream=PATH_STREAM):
    """Draw ``(n_samples, count)`` iid standard normals keyed by the inputs.

    The value at ``[i, j]`` depends only on ``(seed, level,
    sample_indices[i], step_index, stream, j)`` - never on the batch
    composition or on previous calls.
    """
    words = _raw_words(seed, level, sample_indices, step_index, count, stream)
    # top 52 bits -> uniform on {(k + 1/2) * 2^-52}, strictly inside (0, 1)
    u = ((words >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0 ** -52
    z = ndtri(u)
    if not np.all(np.isfinite(z)):
        raise RngError("normal generator produced a non-finite value")
    return z


def draw_slices(seed, level, sample_indices, step_index, dt, omega_chol):
    """Draw one :class:`BrownianSlice` per sample for a single coarse step.

    Each half-increment is distributed as ``omega_chol @ z * sqrt(dt/2)``
    with ``z`` standard normal, i.e. Normal(0, dt/2 * Omega) where
    ``Omega = omega_chol @ omega_chol.T``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    omega_chol = np.asarray(omega_chol, dtype=np.float64)
    dim = omega_chol.shape[0]
    z = standard_normals(seed, level, sample_indices, step_index, 2 * dim)
    z = z.reshape(-1, 2, dim)
    scaled = np.sqrt(dt / 2.0) * (z @ omega_chol.T)
    return BrownianSlice(scaled[:, 0, :].copy(), scaled[:, 1, :].copy())


def draw_slice(key: StreamKey, dt, omega_chol):
    """Single-path version of :func:`draw_slices`; returns ``(D,)`` vectors."""
    batch = draw_slices(key.seed, key.level, [key.sample_index],
                        key.step_index, dt, omega_chol)
    return BrownianSlice(batch.delta_first[0], batch.delta_second[0])


def coarse_increment(slice_: BrownianSlice):
    """Increment over the full coarse step: the sum of the two halves."""
    return slice_.delta_first + slice_.delta_second


def antithetic_swap(slice_: BrownianSlice):
    """Exchange the two half-increments.

    An involution; the coarse increment is unchanged (same two addends,
    addition is commutative in IEEE-754).
    """
    return BrownianSlice(slice_.delta_second, slice_.delta_first)
