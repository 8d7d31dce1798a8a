"""Portable counter-based pseudo-random primitives.

The whole package draws randomness from a single fixed, documented scheme so
that streams can be reproduced bit-for-bit on any platform (and in other
languages):

* generator: SplitMix64 used counter-style -- the i-th raw word of the
  stream keyed by ``seed`` is ``mix64(seed + (i+1) * 0x9E3779B97F4A7C15)``
  where ``mix64`` is the standard SplitMix64 finalizer,
* uniforms: the top 53 bits of a raw word, mapped to [0, 1),
* normals: Box-Muller on consecutive word pairs (u1 shifted into (0, 1] so
  the logarithm is always finite),
* sub-streams: ``derive_seed(seed, t) = mix64(seed XOR mix64(t + 1))``;
  ``mix64`` is a bijection, so distinct ``t`` give distinct stream keys.

Everything here is pure and stateless: a (seed, index) pair fully determines
each value.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53


def _mix64(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer; operates elementwise on uint64 input."""
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        return x ^ (x >> np.uint64(31))


def raw_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """``count`` raw 64-bit words of the stream keyed by ``seed``.

    Word ``i`` (zero-based, counted from ``offset``) is
    ``mix64(seed + (offset + i + 1) * GOLDEN)`` mod 2**64.
    """
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN)


def derive_seed(seed: int, t: int) -> int:
    """Sub-stream key for trial/attempt ``t`` of master ``seed``."""
    a = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    b = _mix64(np.uint64((t + 1) & 0xFFFFFFFFFFFFFFFF))
    return int(_mix64(a ^ b))


def uniforms(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """i.i.d. uniforms on [0, 1) with 53-bit resolution."""
    return (raw_stream(seed, count, offset) >> np.uint64(11)).astype(np.float64) * _U53


def normals(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """i.i.d. standard normals via Box-Muller on word pairs.

    ``offset`` is in raw words; callers that split one stream must advance it
    by ``2 * ceil(count / 2)`` per call.
    """
    pairs = (count + 1) // 2
    bits = raw_stream(seed, 2 * pairs, offset)
    # u1 in (0, 1] keeps log finite; u2 in [0, 1).
    u1 = ((bits[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
    u2 = (bits[1::2] >> np.uint64(11)).astype(np.float64) * _U53
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(ang)
    out[1::2] = r * np.sin(ang)
    return out[:count]


def sample_indices(total: int, m: int, seed: int) -> np.ndarray:
    """``m`` distinct indices drawn uniformly from ``range(total)``, sorted.

    Partial Fisher-Yates driven by the uniform stream; deterministic per seed.
    """
    if not 0 <= m <= total:
        raise ValueError(f"cannot sample {m} of {total} indices")
    u = uniforms(seed, m)
    arr = np.arange(total)
    for i in range(m):
        j = i + int(u[i] * (total - i))
        arr[i], arr[j] = arr[j], arr[i]
    return np.sort(arr[:m])
