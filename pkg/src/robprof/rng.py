"""Seedable, portable random number generation.

Everything random in this package flows through a splitmix64-style counter
generator: output i of a stream is ``mix64(seed + (i+1)*GOLDEN)``.  Streams
are derived from a root seed plus string/integer tags, so independent
consumers (per-triplet draws, per-tree bootstraps, per-repeat splits) never
share state and results reproduce bit-for-bit on any platform.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(value: int) -> int:
    """Finalizing mix of splitmix64 (pure python, 64-bit wrapping)."""
    v = value & _MASK64
    v ^= v >> 30
    v = (v * _MIX1) & _MASK64
    v ^= v >> 27
    v = (v * _MIX2) & _MASK64
    v ^= v >> 31
    return v


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; stable across platforms and processes."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, *tags: int | str) -> int:
    """Derive an independent stream seed from a root seed and tags."""
    state = mix64(seed & _MASK64)
    for tag in tags:
        t = fnv1a64(tag.encode("utf-8")) if isinstance(tag, str) else tag & _MASK64
        state = mix64(state ^ mix64(t ^ _GOLDEN))
    return state


def bulk_u64(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Outputs offset..offset+n-1 of the counter stream, as uint64."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    z = (np.uint64(seed & _MASK64) + idx * _U64_GOLDEN).astype(np.uint64)
    z ^= z >> np.uint64(30)
    z *= _U64_MIX1
    z ^= z >> np.uint64(27)
    z *= _U64_MIX2
    z ^= z >> np.uint64(31)
    return z


def random_floats(seed: int, n: int) -> np.ndarray:
    """n uniform floats in [0, 1), 53-bit resolution."""
    return (bulk_u64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def random_gaussians(seed: int, n: int) -> np.ndarray:
    """n standard normal deviates via Box-Muller on the counter stream."""
    m = (n + 1) // 2
    raw = bulk_u64(seed, 2 * m)
    # u1 in (0, 1] so log() is finite; u2 in [0, 1)
    u1 = ((raw[:m] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (raw[m:] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
    return out[:n]


def random_ints_below(seed: int, n: int, bound: int) -> np.ndarray:
    """n unbiased integers in [0, bound), by rejection on the counter stream."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    remainder = (1 << 64) % bound
    out = np.empty(n, dtype=np.int64)
    filled = 0
    offset = 0
    while filled < n:
        want = n - filled
        raw = bulk_u64(seed, want + 8, offset=offset)
        offset += len(raw)
        if remainder:
            raw = raw[raw < np.uint64((1 << 64) - remainder)]
        take = raw[:want]
        out[filled : filled + len(take)] = (take % np.uint64(bound)).astype(np.int64)
        filled += len(take)
    return out


def random_permutation(seed: int, n: int) -> np.ndarray:
    """Uniform permutation of range(n): argsort of distinct random keys."""
    return np.argsort(bulk_u64(seed, n), kind="stable").astype(np.int64)


def sample_without_replacement(seed: int, n: int, k: int) -> np.ndarray:
    """k distinct indices from range(n), in random order."""
    if k > n:
        raise ValueError(f"cannot sample {k} from {n} without replacement")
    return random_permutation(seed, n)[:k]
