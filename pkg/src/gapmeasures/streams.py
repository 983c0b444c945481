"""Counter-based random streams.

Every sample of every batch owns the sub-stream addressed by
``(seed, index)``.  The sub-stream is the Philox4x32-10 keystream with key
``seed`` and counter ``(block, 0, index_lo, index_hi)``, so sample ``i`` is a
pure function of ``(seed, i)``: batches can be generated in any order, in
chunks, or in parallel, with bit-identical results.

Philox is evaluated here with plain numpy ``uint64`` arithmetic, vectorized
over all (sample, block) pairs at once.
"""

from dataclasses import dataclass

import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_ROUNDS = 10

# each Philox block yields four 32-bit words = two 53-bit uniforms
UNIFORMS_PER_BLOCK = 2
CHUNK = 1 << 16


def philox4x32(counter, key, rounds=_ROUNDS):
    """Philox4x32 bijection.

    ``counter`` is a sequence of four arrays (or ints) of 32-bit words and
    ``key`` a pair; all are broadcast together.  Returns four ``uint64``
    arrays holding 32-bit output words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in counter)
    k0, k1 = (np.asarray(k, dtype=np.uint64) for k in key)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT32) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> _SHIFT32) ^ c3 ^ k1,
            p0 & _MASK32,
        )
    return c0, c1, c2, c3


def _words_to_unit(hi, lo):
    # 27 + 26 bits -> uniform on [0, 1) with 53-bit resolution
    return ((hi >> np.uint64(5)).astype(np.float64) * 67108864.0
            + (lo >> np.uint64(6)).astype(np.float64)) * (1.0 / 9007199254740992.0)


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 1 << 64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def uniforms(seed, indices, count):
    """Return an array of shape ``(len(indices), count)`` of uniforms on [0, 1).

    Row ``j`` holds the first ``count`` uniforms of sub-stream
    ``(seed, indices[j])``.
    """
    seed = _check_seed(seed)
    idx = np.asarray(indices, dtype=np.uint64).reshape(-1)
    nblocks = -(-count // UNIFORMS_PER_BLOCK)
    key = (np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32))
    out = np.empty((idx.size, nblocks * UNIFORMS_PER_BLOCK))
    blocks = np.arange(nblocks, dtype=np.uint64)[None, :]
    for start in range(0, idx.size, CHUNK):
        sub = idx[start:start + CHUNK, None]
        w0, w1, w2, w3 = philox4x32(
            (blocks, np.uint64(0), sub & _MASK32, sub >> _SHIFT32), key)
        rows = out[start:start + CHUNK]
        rows[:, 0::2] = _words_to_unit(w0, w1)
        rows[:, 1::2] = _words_to_unit(w2, w3)
    return out[:, :count]


def derive_seed(seed, *tags):
    """Derive an independent 64-bit seed from ``seed`` and integer tags.

    Used to keep e.g. the reference batch and each leg of an experiment on
    disjoint key spaces.
    """
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(t) for t in tags))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class RandomStream:
    """The sub-stream ``(seed, index)``."""

    seed: int
    index: int = 0

    def uniforms(self, count):
        return uniforms(self.seed, [self.index], count)[0]
