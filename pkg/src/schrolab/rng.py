"""Counter-based random numbers.

Every random coefficient in the package is a pure function of
``(seed, draw_index, lattice point)``: the triple is packed into a Philox4x32-10
counter/key pair and encrypted. No generator state is carried between calls,
so draws can be produced in any order, in any chunking, on any number of
threads, and still agree bit for bit.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_ROUNDS = 10

# 21 bits per lattice coordinate, three coordinates -> 63 bits.
_COORD_BITS = 21
_COORD_OFFSET = 1 << (_COORD_BITS - 1)


def philox4x32(counter: np.ndarray, key: Sequence[int]) -> np.ndarray:
    """Philox4x32-10 block function.

    Parameters
    ----------
    counter : array of shape (4, M), uint32
    key : two 32-bit words

    Returns
    -------
    array of shape (4, M), uint32
    """
    c = np.asarray(counter, dtype=np.uint32)
    if c.ndim == 1:
        c = c[:, None]
    c0, c1, c2, c3 = (c[i].astype(np.uint64) for i in range(4))
    k0 = np.uint32(key[0])
    k1 = np.uint32(key[1])
    with np.errstate(over="ignore"):
        for r in range(_ROUNDS):
            if r:
                k0 = np.uint32(k0 + _W0)
                k1 = np.uint32(k1 + _W1)
            p0 = c0 * _M0
            p1 = c2 * _M1
            hi0, lo0 = p0 >> np.uint64(32), p0 & _MASK32
            hi1, lo1 = p1 >> np.uint64(32), p1 & _MASK32
            c0 = hi1 ^ c1 ^ np.uint64(k0)
            c1 = lo1
            c2 = hi0 ^ c3 ^ np.uint64(k1)
            c3 = lo0
    return np.stack([c0, c1, c2, c3]).astype(np.uint32)


def encode_lattice_point(k: Sequence[int]) -> int:
    """Pack a lattice point of dimension <= 3 into a 63-bit integer."""
    if not 1 <= len(k) <= 3:
        raise ValueError("lattice points must have 1 to 3 coordinates")
    code = 0
    for i, ki in enumerate(k):
        ki = int(ki)
        if abs(ki) >= _COORD_OFFSET:
            raise ValueError(f"lattice coordinate {ki} out of range")
        code |= (ki + _COORD_OFFSET) << (_COORD_BITS * i)
    return code


def raw_words(seed: int, draw_indices: np.ndarray, points: Sequence[Sequence[int]]) -> np.ndarray:
    """Random words for every (draw, point) pair.

    Returns an array of shape (4, D, K) of uint32.
    """
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    draws = np.asarray(draw_indices, dtype=np.uint64).ravel()
    codes = np.array([encode_lattice_point(k) for k in points], dtype=np.uint64)
    d, kk = np.meshgrid(draws, codes, indexing="ij")
    ctr = np.stack([
        d & _MASK32,
        d >> np.uint64(32),
        kk & _MASK32,
        kk >> np.uint64(32),
    ]).reshape(4, -1).astype(np.uint32)
    key = (seed & 0xFFFFFFFF, seed >> 32)
    return philox4x32(ctr, key).reshape(4, draws.size, codes.size)


def _unit_interval(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    # 53-bit uniform on [0, 1)
    a = (hi >> np.uint32(5)).astype(np.float64)
    b = (lo >> np.uint32(6)).astype(np.float64)
    return (a * 67108864.0 + b) / 9007199254740992.0


def gaussian_from_words(w: np.ndarray) -> np.ndarray:
    u1 = _unit_interval(w[0], w[1])
    u2 = _unit_interval(w[2], w[3])
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def rademacher_from_words(w: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * (w[0] >> np.uint32(31)).astype(np.float64)


LAWS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": gaussian_from_words,
    "rademacher": rademacher_from_words,
}


def register_law(name: str, transform: Callable[[np.ndarray], np.ndarray]) -> None:
    """Add a coefficient law mapping Philox words (4, ...) to real samples.

    Only the built-in laws are validated against the moment condition; a
    registered law is the caller's responsibility.
    """
    LAWS[name] = transform


def coefficients(
    law: str, seed: int, draw_indices: np.ndarray, points: Sequence[Sequence[int]]
) -> np.ndarray:
    """Coefficient matrix of shape (D, K) for the given draws and lattice points."""
    try:
        transform = LAWS[law]
    except KeyError:
        raise ValueError(f"unknown coefficient law {law!r}") from None
    return transform(raw_words(seed, draw_indices, points))
