"""Counter-based random streams.

Every random quantity used by a resample is a pure function of
``(seed, resample index, draw index)``, computed with the splitmix64 finaliser.
Resamples can therefore be evaluated in any order, in chunks, or on either
backend and still see identical draws.

The numba kernels carry a scalar copy of :func:`mix64`; the two must stay in
sync (``tests/test_rng.py`` checks this).
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

# Draw-index offset of the pooled-shuffle keys, so the flips and the shuffle
# of a combined resample come from disjoint parts of the same stream.
SHUFFLE_OFFSET = 1 << 32

_MASK64 = (1 << 64) - 1


def mix64(z):
    """splitmix64 finaliser, elementwise over a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def seed_to_u64(seed):
    return np.uint64(int(seed) & _MASK64)


def stream_keys(seed, indices):
    """Per-resample stream keys for resample ``indices`` under ``seed``."""
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(seed_to_u64(seed) ^ mix64((idx + np.uint64(1)) * GOLDEN))


def draws(keys, offset, count):
    """Raw uint64 draws ``offset .. offset+count-1`` for each stream key.

    Returns an array of shape ``keys.shape + (count,)``.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    j = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(keys[..., None] + j * GOLDEN)


def flip_bits(keys, count):
    """Sign-flip indicators (top bit of each draw)."""
    return (draws(keys, 0, count) >> np.uint64(63)).astype(bool)


def shuffle_order(keys, count):
    """Uniform random permutation of ``range(count)`` per stream key.

    Stable argsort of the uint64 keys; identical to the numba kernels'
    ordering.
    """
    return np.argsort(draws(keys, SHUFFLE_OFFSET, count), axis=-1, kind="stable")


def uniforms(keys, offset, count):
    """Uniform(0, 1) doubles with 53 random bits."""
    return (draws(keys, offset, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


class ResampleStream:
    """The random stream of one resample, ``(seed, index)``.

    Exposes the two draws the resamplers need: ``flips(n)`` and
    ``permutation(m)``.
    """

    def __init__(self, seed, index=0):
        self.seed = int(seed)
        self.index = int(index)
        self._key = stream_keys(self.seed, [self.index])

    def flips(self, n):
        return flip_bits(self._key, n)[0]

    def permutation(self, m):
        return shuffle_order(self._key, m)[0]

    def random(self, n):
        return uniforms(self._key, 0, n)[0]
