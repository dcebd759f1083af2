"""Counter-based random numbers keyed by ``(seed, stream label, counters)``.

Each draw is a pure function of its key: a SplitMix64 finaliser is chained
over the seed, a 64-bit digest of the stream label and every integer counter
(edge coordinates, axis, replica index).  Draws do not depend on the order
in which they are requested, on the size of the region being sampled, or on
how work is split between processes.
"""
from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["label_key", "mix64", "hash_counters", "uniforms", "derive_seed"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_MASK64 = (1 << 64) - 1


def label_key(label: str) -> int:
    """Stable 64-bit digest of a stream label."""
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on a uint64 array (wrapping arithmetic)."""
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def hash_counters(seed: int, label: str, counters: np.ndarray) -> np.ndarray:
    """Hash each row of an integer ``counters`` array (n, k) to a uint64."""
    counters = np.atleast_2d(np.asarray(counters, dtype=np.int64))
    base = mix64(np.array([(seed & _MASK64)], dtype=np.uint64) + _GOLDEN)
    base = mix64(base ^ np.uint64(label_key(label)))
    h = np.repeat(base, counters.shape[0])
    for j in range(counters.shape[1]):
        col = counters[:, j].astype(np.uint64)  # two's complement for negatives
        h = mix64((h + _GOLDEN) ^ col)
    return h


def uniforms(seed: int, label: str, counters: np.ndarray) -> np.ndarray:
    """Uniform doubles on ``[0, 1)`` with 53 random bits per draw."""
    return (hash_counters(seed, label, counters) >> _S11).astype(np.float64) * 2.0**-53


def derive_seed(seed: int, *parts: int | str) -> int:
    """Child seed for replicate ``parts`` of a run seeded with ``seed``."""
    text = ":".join([str(seed & _MASK64), *map(str, parts)])
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")
