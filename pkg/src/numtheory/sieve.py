# src/numtheory/sieve.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .constants import NEXT_PRIME_LIMIT, RANGE_SPAN_LIMIT, SEGMENT_ODD_COUNT, SEGMENTS_PER_TASK
from .factor import is_prime
from .parallel import ordered_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimeRange:
    """Closed interval [lo, hi], optionally restricted to p = residue (mod modulus)."""

    lo: int
    hi: int
    modulus: int = 1
    residue: int = 0

    def __post_init__(self) -> None:
        if self.lo < 2:
            raise ValueError(f"PrimeRange lo must be >= 2, got {self.lo}")
        if self.hi <= self.lo:
            raise ValueError(f"PrimeRange hi must exceed lo, got [{self.lo}, {self.hi}]")
        if self.hi - self.lo > RANGE_SPAN_LIMIT:
            raise ValueError(f"PrimeRange span {self.hi - self.lo} exceeds 2^34")
        if self.modulus < 1:
            raise ValueError(f"PrimeRange modulus must be positive, got {self.modulus}")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(f"PrimeRange residue must lie in [0, {self.modulus}), got {self.residue}")
        if self.modulus > 1 and math.gcd(self.residue, self.modulus) != 1:
            raise ValueError(f"residue {self.residue} is not coprime to modulus {self.modulus}")

    @classmethod
    def dyadic(cls, x: int, modulus: int = 1, residue: int = 0) -> "PrimeRange":
        """The census window x <= p <= 2x."""
        return cls(x, 2 * x, modulus, residue % modulus)


@lru_cache(maxsize=8)
def base_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def _sieve_segment(task: tuple[int, int, int]) -> np.ndarray:
    """Odd-only sieve of [low, high) with low odd; returns the primes found."""
    low, high, limit = task
    odd_count = (high - low + 1) // 2
    mask = np.ones(odd_count, dtype=bool)
    for p in base_primes(math.isqrt(limit) + 1)[1:]:  # skip 2
        p = int(p)
        p2 = p * p
        if p2 >= high:
            break
        start = max(p2, -(-low // p) * p)
        if start % 2 == 0:
            start += p
        if start >= high:
            continue
        mask[(start - low) // 2 :: p] = False
    return low + 2 * np.flatnonzero(mask).astype(np.int64)


def _sieve_tasks(lo: int, hi: int) -> list[tuple[int, int, int]]:
    low = lo | 1
    span = 2 * SEGMENT_ODD_COUNT * SEGMENTS_PER_TASK
    tasks = []
    while low <= hi:
        high = min(low + span, hi + 1)
        tasks.append((low, high, hi))
        low += span
    return tasks


def prime_array(rng: PrimeRange, workers: int = 1) -> np.ndarray:
    """All primes of the range, ascending, as an int64 array."""
    tasks = _sieve_tasks(rng.lo, rng.hi)
    parts = ordered_map(_sieve_segment, tasks, workers=workers)
    primes = np.concatenate(parts) if parts else np.array([], dtype=np.int64)
    if rng.lo <= 2 <= rng.hi:
        primes = np.concatenate([np.array([2], dtype=np.int64), primes])
    if rng.modulus > 1:
        primes = primes[primes % rng.modulus == rng.residue]
    logger.debug("sieved %d primes in [%d, %d] (mod %d = %d)", primes.size, rng.lo, rng.hi, rng.modulus, rng.residue)
    return primes


def primes_in_range(rng: PrimeRange, workers: int = 1) -> Iterator[int]:
    for p in prime_array(rng, workers=workers):
        yield int(p)


def next_prime_above(n: int) -> int:
    if not 2 <= n < NEXT_PRIME_LIMIT:
        raise ValueError(f"next_prime_above expects 2 <= n < 2^62, got {n}")
    c = n + 1
    if c > 2 and c % 2 == 0:
        c += 1
    while not is_prime(c):
        c += 2
    return c


@lru_cache(maxsize=4)
def smallest_factor_table(limit: int) -> np.ndarray:
    """spf[n] = least prime factor of n for 2 <= n <= limit (spf[0] = spf[1] = 0)."""
    if limit < 2:
        raise ValueError(f"smallest_factor_table expects limit >= 2, got {limit}")
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in base_primes(math.isqrt(limit)).tolist():
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest[rest >= 2]] = rest[rest >= 2]
    spf.setflags(write=False)
    return spf
