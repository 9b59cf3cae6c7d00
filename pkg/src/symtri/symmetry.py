"""Cyclic symmetry of rings of binary outcomes.

A ring assignment of ``m`` nodes is stored as an integer word whose most
significant of ``m`` bits is node 0, so integer order equals lexicographic
order of the bit string read from node 0.  Only the cyclic group is
quotiented: reflections are not symmetries of a ring of oriented sources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import ResourceLimitError

MIN_RING = 3
MAX_RING = 24


def _check_ring(m: int, max_ring: int = MAX_RING) -> None:
    if not MIN_RING <= m <= max_ring:
        raise ResourceLimitError(f"ring size {m} outside [{MIN_RING}, {max_ring}]")


def _check_word(w: int, m: int) -> None:
    if not 0 <= w < (1 << m):
        raise ValueError(f"word {w} does not fit in {m} bits")


def word_from_bits(bits: Sequence[int] | str) -> int:
    """``[b0, b1, ...]`` or ``"b0b1..."`` (node 0 first) to an integer word."""
    w = 0
    for b in bits:
        b = int(b)
        if b not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {b}")
        w = (w << 1) | b
    return w


def bits_of_word(w: int, m: int) -> tuple[int, ...]:
    return tuple((w >> (m - 1 - i)) & 1 for i in range(m))


def word_str(w: int, m: int) -> str:
    return format(w, f"0{m}b")


def word_from_outcomes(outcomes: Sequence[int]) -> int:
    return word_from_bits([0 if a == 1 else 1 for a in outcomes])


def rotate(w: int, m: int, k: int = 1) -> int:
    """Shift node ``i + k`` into position ``i`` (left rotation of the bit string)."""
    k %= m
    if k == 0:
        return w
    mask = (1 << m) - 1
    return ((w << k) | (w >> (m - k))) & mask


def canonical_rotation_bruteforce(w: int, m: int) -> int:
    _check_word(w, m)
    return min(rotate(w, m, k) for k in range(m))


def least_rotation_offset(s: Sequence[int]) -> int:
    """Booth's algorithm: start index of the lexicographically least rotation."""
    n = len(s)
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = s[j % n]
        i = f[j - k - 1]
        while i != -1 and sj != s[(k + i + 1) % n]:
            if sj < s[(k + i + 1) % n]:
                k = j - i - 1
            i = f[i]
        if sj != s[(k + i + 1) % n]:
            if sj < s[k % n]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def canonical_rotation(w: int, m: int) -> int:
    """Least rotation of ``w`` in linear time."""
    _check_word(w, m)
    return rotate(w, m, least_rotation_offset(bits_of_word(w, m)))


def orbit_size_of(w: int, m: int) -> int:
    """Number of distinct rotations (the least period of the necklace)."""
    for p in range(1, m + 1):
        if m % p == 0 and rotate(w, m, p) == w:
            return p
    return m  # unreachable: rotate by m is the identity


def _totient(n: int) -> int:
    result, p, k = n, 2, n
    while p * p <= k:
        if k % p == 0:
            while k % p == 0:
                k //= p
            result -= result // p
        p += 1
    if k > 1:
        result -= result // k
    return result


def necklace_count(m: int) -> int:
    """Binary necklaces of length ``m``: ``(1/m) sum_{d | m} phi(d) 2^(m/d)``."""
    total = sum(_totient(d) * 2 ** (m // d) for d in range(1, m + 1) if m % d == 0)
    assert total % m == 0
    return total // m


@dataclass(frozen=True, eq=False)
class OrbitTable:
    """Canonical representatives of the rotation classes of ``m``-bit words.

    ``reps`` is ascending, ``index_of[w]`` is the position of the class of
    ``w`` in ``reps`` and ``orbit_size[k]`` counts the words in class ``k``.
    Arrays are read-only.
    """

    m: int
    reps: np.ndarray
    index_of: np.ndarray
    orbit_size: np.ndarray

    def __len__(self):
        return len(self.reps)

    def index(self, w: int) -> int:
        return int(self.index_of[w])

    def rep(self, k: int) -> int:
        return int(self.reps[k])


@lru_cache(maxsize=None)
def _build(m: int) -> OrbitTable:
    n = 1 << m
    mask = n - 1
    dtype = np.int64
    words = np.arange(n, dtype=dtype)
    best = words.copy()
    r = words.copy()
    for _ in range(1, m):
        r = ((r << 1) | (r >> (m - 1))) & mask
        np.minimum(best, r, out=best)
    del r
    reps = np.flatnonzero(best == words).astype(dtype)
    index_of = np.searchsorted(reps, best).astype(np.int32)
    sizes = np.bincount(index_of, minlength=len(reps)).astype(np.int64)
    for a in (reps, index_of, sizes):
        a.flags.writeable = False
    return OrbitTable(m, reps, index_of, sizes)


def build_orbit_table(m: int, max_ring: int = MAX_RING) -> OrbitTable:
    """Orbit table for rings of size ``m`` (cached per ``m``)."""
    _check_ring(m, max_ring)
    return _build(m)


def symmetrize_row(table: OrbitTable, coefficients: Mapping[int, Fraction]) -> dict[int, Fraction]:
    """Project a word-indexed row onto orbit variables.

    Each word's coefficient is added to its orbit's column; the result is
    keyed by orbit index (position in ``table.reps``) and holds no zeros.
    """
    out: dict[int, Fraction] = {}
    idx = table.index_of
    for w, c in coefficients.items():
        k = int(idx[w])
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def burnside_count(m: int) -> int:
    """Independent count via the fixed points of each rotation."""
    return sum(2 ** math.gcd(k, m) for k in range(m)) // m
