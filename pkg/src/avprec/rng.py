"""Counter-based splitmix64 stream for reproducible problem data.

Draw ``i`` (0-based) of seed ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15)``
with the standard splitmix64 finalizer. A double in ``[0, 1)`` takes the top
53 bits, ``u = (z >> 11) * 2**-53``, and the uniform value on ``[-1, 1)`` is
``2u - 1``. The stream is the one a sequential splitmix64 generator would
produce, so ports in other languages can match it bit for bit.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Raw 64-bit outputs ``offset .. offset+count-1`` of the stream for ``seed``."""
    if not 0 <= int(seed) <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    i = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + i * GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Doubles uniform on ``[-1, 1)``."""
    z = splitmix64(seed, count, offset)
    u = (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return 2.0 * u - 1.0
