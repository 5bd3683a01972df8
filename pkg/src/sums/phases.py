# src/sums/phases.py
from __future__ import annotations

from functools import lru_cache

import numpy as np

from src.numtheory.constants import EXPSUM_CHUNK

TWO_PI = 2.0 * np.pi


def phases(numerators, modulus: int) -> np.ndarray:
    """e(x / modulus) = exp(2 pi i x / modulus), with x reduced first."""
    r = np.mod(np.asarray(numerators, dtype=np.int64), modulus)
    return np.exp(1j * (TWO_PI * r / modulus))


def phase_sum(numerators, modulus: int) -> complex:
    """Sum of e(x / modulus) over the given numerators (pairwise summation)."""
    arr = np.asarray(numerators, dtype=np.int64).ravel()
    if arr.size == 0:
        return 0j
    if arr.size <= EXPSUM_CHUNK:
        return complex(phases(arr, modulus).sum())
    partial = np.array(
        [phases(arr[i : i + EXPSUM_CHUNK], modulus).sum() for i in range(0, arr.size, EXPSUM_CHUNK)]
    )
    return complex(partial.sum())


def character_sums(ws, p: int) -> np.ndarray:
    """
    For each w, the complete additive character sum sum_{k=0}^{p-1} e(k w / p).

    Evaluated term by term (p on w = 0 mod p, 0 otherwise, up to rounding).
    """
    ws = np.mod(np.asarray(ws, dtype=np.int64), p)
    out = np.empty(ws.size, dtype=np.complex128)
    k = np.arange(p, dtype=np.int64)
    rows = max(1, (EXPSUM_CHUNK * 16) // p)
    for i in range(0, ws.size, rows):
        block = np.outer(ws[i : i + rows], k) % p
        out[i : i + rows] = phases(block, p).sum(axis=1)
    return out


@lru_cache(maxsize=2)
def orthogonality_table(p: int) -> np.ndarray:
    """character_sums for every w in [0, p); shared by the batch indicators."""
    table = character_sums(np.arange(p, dtype=np.int64), p)
    table.setflags(write=False)
    return table
