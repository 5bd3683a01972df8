# src/numtheory/factor.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Tuple

from .constants import FACTOR_LIMIT

logger = logging.getLogger(__name__)

# Deterministic for every n < 3.3e24, which covers the 64-bit range.
MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_SMALL_PRIMES = tuple(
    n for n in range(2, 1000) if all(n % d for d in range(2, math.isqrt(n) + 1))
)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n == sp:
            return True
        if n % sp == 0:
            return False
    if n < 1_000_000:  # no factor below 1000 and n < 1000^2
        return True

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def pollard_brent(n: int) -> int:
    """
    Return a nontrivial factor of the odd composite n.

    Brent's cycle detection with batched gcds (products of |x - y| over blocks of
    `m` steps). The polynomial constant c walks 1, 2, 3, ... so the result is a
    pure function of n.
    """
    if n % 2 == 0:
        return 2
    m = 128
    for c in range(1, 1 << 16):
        y, r, q, g = 2, 1, 1, 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            # batch overshot: replay one step at a time from the saved point
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
        logger.debug("pollard_brent: cycle without split for n=%d, c=%d", n, c)
    raise ArithmeticError(f"pollard_brent failed to split {n}")


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError(f"FactoredInteger value must be positive, got {self.value}")
        prev = 1
        for prime, exp in self.factors:
            if prime <= prev or exp < 1 or not is_prime(prime):
                raise ValueError(f"malformed factorization {self.factors} of {self.value}")
            prev = prime
        if math.prod(p**e for p, e in self.factors) != self.value:
            raise ValueError(f"factors {self.factors} do not multiply to {self.value}")

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def quotient(self, d: int) -> "FactoredInteger":
        """Factorization of value // d, read off without refactoring."""
        if d < 1 or self.value % d:
            raise ValueError(f"{d} does not divide {self.value}")
        out = []
        for p, e in self.factors:
            while d % p == 0:
                d //= p
                e -= 1
            if e > 0:
                out.append((p, e))
        return FactoredInteger(math.prod(p**e for p, e in out), tuple(out))

    def __int__(self) -> int:
        return self.value


def _split(n: int, acc: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        acc[n] = acc.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        _split(r, acc)
        _split(r, acc)
        return
    f = pollard_brent(n)
    _split(f, acc)
    _split(n // f, acc)


def factorize(n: int) -> FactoredInteger:
    if n < 2:
        raise ValueError(f"factorize expects n >= 2, got {n}")
    if n >= FACTOR_LIMIT:
        raise ValueError(f"factorize expects n < 2^63, got {n}")

    acc: dict[int, int] = {}
    rest = n
    for sp in _SMALL_PRIMES:
        if sp * sp > rest:
            break
        while rest % sp == 0:
            acc[sp] = acc.get(sp, 0) + 1
            rest //= sp
    _split(rest, acc)
    return FactoredInteger(n, tuple(sorted(acc.items())))


def factored(n: int | FactoredInteger) -> FactoredInteger:
    """Accept either form; 1 maps to the empty factorization."""
    if isinstance(n, FactoredInteger):
        return n
    if n == 1:
        return FactoredInteger(1, ())
    return factorize(n)


def euler_phi(n: int | FactoredInteger) -> int:
    fi = factored(n)
    return math.prod(p ** (e - 1) * (p - 1) for p, e in fi.factors)


def moebius(n: int | FactoredInteger) -> int:
    fi = factored(n)
    if any(e >= 2 for _, e in fi.factors):
        return 0
    return -1 if len(fi.factors) % 2 else 1


def _iter_divisors(factors: Tuple[Tuple[int, int], ...]) -> Iterator[int]:
    divs = [1]
    for p, e in factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return iter(divs)


def divisors(n: int | FactoredInteger) -> Tuple[int, ...]:
    return tuple(sorted(_iter_divisors(factored(n).factors)))


def squarefree_divisors(n: int | FactoredInteger) -> Tuple[int, ...]:
    """Divisors r with mu(r) != 0; the only ones a Moebius expansion needs."""
    primes = factored(n).primes
    divs = [1]
    for p in primes:
        divs += [d * p for d in divs]
    return tuple(sorted(divs))


def divisor_count(n: int | FactoredInteger) -> int:
    return reduce(lambda acc, pe: acc * (pe[1] + 1), factored(n).factors, 1)
