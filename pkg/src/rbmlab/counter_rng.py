"""Counter-based Gaussian noise for reproducible parallel sampling.

Every random number is a pure function of (seed, sample_index, entry_index),
so matrix ensembles can be sampled in any order, split across any number of
workers, and resumed mid-stream while producing bit-identical output.

The construction is a SplitMix64-style avalanche hash of the three counter
words, expanded to two 64-bit words per entry and pushed through Box-Muller.
The transform is fixed; changing any constant here changes every sampled
matrix, so treat them as frozen.
"""

import numpy as np

# SplitMix64 finalizer constants (Steele/Lea/Flood mixing function).
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
# Distinct salts for the two output words of each entry.
_SALT_A = np.uint64(0xA24BAED4963EE407)
_SALT_B = np.uint64(0x9FB21C651E98DF25)

_U53 = np.float64(1.0 / 9007199254740992.0)  # 2**-53


_MASK = 0xFFFFFFFFFFFFFFFF


def _finalize(z):
    """SplitMix64 finalizer: full-avalanche 64-bit mix (1-d uint64 arrays)."""
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _finalize_int(z):
    """Same mix on a Python int (exact, no numpy scalar-overflow warnings)."""
    z = (z + int(_GOLDEN)) & _MASK
    z = ((z ^ (z >> 30)) * int(_MIX1)) & _MASK
    z = ((z ^ (z >> 27)) * int(_MIX2)) & _MASK
    return z ^ (z >> 31)


def _entry_state(seed, sample_index, entry_index):
    """Hash the (seed, sample, entry) counter triple into 64-bit states.

    ``entry_index`` must already be a 1-d uint64 array; the seed/sample words
    are folded in exact Python arithmetic so only true array ops remain.
    """
    mixed = (int(seed) ^ (int(sample_index) * int(_SALT_A))) & _MASK
    base = np.uint64(_finalize_int(mixed))
    return _finalize(base ^ (entry_index * _SALT_B))


def normal_pair(seed, sample_index, entry_index):
    """Two independent standard normals per entry index.

    Parameters
    ----------
    seed : int
        Ensemble seed (any Python int; reduced mod 2**64).
    sample_index : int
        Which matrix of the ensemble is being drawn.
    entry_index : int or ndarray of int
        Canonical entry counter (e.g. ``i * N + j``). May be an array; the
        output arrays then have the same shape.

    Returns
    -------
    (g0, g1) : pair of float64 ndarrays
        Standard normal deviates, deterministic in all three counters.
    """
    idx = np.asarray(entry_index, dtype=np.uint64)
    shape = idx.shape
    state = _entry_state(seed, sample_index, idx.reshape(-1))
    wa = _finalize(state ^ _SALT_A)
    wb = _finalize(state ^ _SALT_B)
    # 53-bit mantissas; +1 keeps u1 in (0, 1] so the log is finite.
    u1 = ((wa >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53
    u2 = (wb >> np.uint64(11)).astype(np.float64) * _U53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = (2.0 * np.pi) * u2
    return (radius * np.cos(angle)).reshape(shape), (radius * np.sin(angle)).reshape(shape)


def uniforms(seed, sample_index, entry_index):
    """Uniform deviates on [0, 1) under the same counter contract."""
    idx = np.asarray(entry_index, dtype=np.uint64)
    shape = idx.shape
    state = _entry_state(seed, sample_index, idx.reshape(-1))
    return ((state >> np.uint64(11)).astype(np.float64) * _U53).reshape(shape)
