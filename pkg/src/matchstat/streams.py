"""Counter-based random streams for reproducible parallel simulation.

Every random number used by the Monte Carlo engine is a pure function of

    (master_seed, cell index, replication index, domain, position)

computed with the Philox4x32-10 block cipher: the 64-bit master seed is the
key and the other four coordinates form the 128-bit counter.  Any replication
can therefore be regenerated on its own, in any order and on any worker,
without touching shared generator state.

Normal variates come from the inverse normal CDF applied to 53-bit uniforms
built from two consecutive 32-bit words.  The method is fixed because
experiment outputs are promised to be byte-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = ["NORMAL_DOMAIN", "TIEBREAK_DOMAIN", "Stream", "philox4x32"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

NORMAL_DOMAIN = 0
TIEBREAK_DOMAIN = 1

_MAX_SEED = 2**64 - 1


def philox4x32(counter: np.ndarray, key: tuple[int, int], rounds: int = 10) -> np.ndarray:
    """Philox4x32 block function.

    ``counter`` has shape ``(..., 4)`` with 32-bit word values (any integer
    dtype); the result has the same shape, dtype ``uint32``.
    """
    c = np.asarray(counter, dtype=np.uint64)
    if c.shape[-1] != 4:
        raise ValueError("counter must have a trailing axis of length 4")
    c0, c1, c2, c3 = (c[..., i] & _MASK32 for i in range(4))
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
    return np.stack([c0, c1, c2, c3], axis=-1).astype(np.uint32)


@dataclass(frozen=True)
class Stream:
    """A family of replication substreams for one experiment cell.

    ``Stream(seed).cell(i)`` selects cell ``i``; ``uniforms``/``normals``
    then address replications by absolute index, so a block of replications
    ``[start, stop)`` gives the same numbers however the range is split.
    """

    seed: int
    cell_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) <= _MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not 0 <= int(self.cell_index) < 2**32:
            raise ValueError("cell index must fit in 32 bits")

    def cell(self, index: int) -> Stream:
        return Stream(self.seed, index)

    @property
    def key(self) -> tuple[int, int]:
        return int(self.seed) & 0xFFFFFFFF, int(self.seed) >> 32

    def words(self, start: int, stop: int, count: int, domain: int = NORMAL_DOMAIN) -> np.ndarray:
        """``(stop - start, count)`` array of 32-bit words; ``count`` is rounded up to a multiple of 4 internally."""
        if not 0 <= start <= stop < 2**32:
            raise ValueError("replication indices must lie in [0, 2**32)")
        blocks = -(-count // 4)
        reps = np.arange(start, stop, dtype=np.uint64)
        ctr = np.empty((stop - start, blocks, 4), dtype=np.uint64)
        ctr[..., 0] = np.arange(blocks, dtype=np.uint64)[None, :]
        ctr[..., 1] = reps[:, None]
        ctr[..., 2] = self.cell_index
        ctr[..., 3] = domain
        out = philox4x32(ctr, self.key)
        return out.reshape(stop - start, blocks * 4)[:, :count]

    def uniforms(self, start: int, stop: int, count: int, domain: int = NORMAL_DOMAIN) -> np.ndarray:
        """Uniforms on the open interval (0, 1) with 53-bit resolution."""
        w = self.words(start, stop, 2 * count, domain).astype(np.uint64)
        hi = w[:, 0::2] >> np.uint64(5)
        lo = w[:, 1::2] >> np.uint64(6)
        mantissa = (hi << np.uint64(26)) | lo
        return (mantissa.astype(np.float64) + 0.5) * 2.0**-53

    def normals(self, start: int, stop: int, count: int) -> np.ndarray:
        """Standard normal variates by inversion, shape ``(stop - start, count)``."""
        return ndtri(self.uniforms(start, stop, count, NORMAL_DOMAIN))

    def replication_rng(self, rep: int, domain: int = TIEBREAK_DOMAIN) -> np.random.Generator:
        """A numpy generator private to one replication (used for tie breaking)."""
        return np.random.Generator(np.random.Philox(key=[*self._key64(domain)], counter=[0, 0, rep, self.cell_index]))

    def _key64(self, domain: int) -> tuple[int, int]:
        return int(self.seed), int(domain)
