# src/numtheory/modular.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .constants import DLOG_LIMIT, ORDER_TABLE_LIMIT
from .errors import DlogFailure, NotInvertible
from .factor import FactoredInteger, euler_phi, factorize, is_prime
from .sieve import next_prime_above

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RationalBase:
    numerator: int
    denominator: int = 1

    def __post_init__(self) -> None:
        if self.denominator < 1:
            raise ValueError(f"denominator must be positive, got {self.denominator}")
        if self.numerator == 0:
            raise ValueError("base must be nonzero")
        if math.gcd(abs(self.numerator), self.denominator) != 1:
            raise ValueError(f"{self.numerator}/{self.denominator} is not in lowest terms")
        if self.denominator == 1 and abs(self.numerator) == 1:
            raise ValueError(f"base {self.numerator} is excluded (u != 0, 1, -1)")

    @classmethod
    def parse(cls, text: str) -> "RationalBase":
        """'3', '-2', '1/2' or '-1/3'; reduced to lowest terms."""
        try:
            value = Fraction(text.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot read rational base from {text!r}") from None
        return cls(value.numerator, value.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


# A base is either a rational or a plain residue class (taken mod p as given).
Base = Union[RationalBase, int]


@dataclass(frozen=True)
class PrimeContext:
    p: int
    p_minus_one: FactoredInteger
    tau: int
    q: int

    def __post_init__(self) -> None:
        if self.p_minus_one.value != self.p - 1:
            raise ValueError(f"p_minus_one={self.p_minus_one.value} does not match p-1 for p={self.p}")
        if not 2 <= self.tau <= self.p - 1:
            raise ValueError(f"tau={self.tau} outside [2, p-1]")
        if self.q <= self.p or not is_prime(self.q):
            raise ValueError(f"q={self.q} must be a prime above p={self.p}")

    @property
    def n(self) -> int:
        return self.p - 1


def pow_mod(base: int, exponent: int, modulus: int) -> int:
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if exponent < 0:
        raise ValueError(f"exponent must be nonnegative, got {exponent}")
    # builtin pow is square-and-multiply on unbounded ints
    return pow(base, exponent, modulus)


def reduce_mod(u: Base, p: int) -> int:
    if isinstance(u, RationalBase):
        if u.numerator % p == 0 or u.denominator % p == 0:
            raise NotInvertible(f"{u} is not a unit modulo {p}")
        return u.numerator * pow(u.denominator, -1, p) % p
    r = u % p
    if r == 0:
        raise NotInvertible(f"{u} is divisible by {p}")
    return r


def multiplicative_order(u: int, n: int, group_order: FactoredInteger | None = None) -> int:
    """
    Order of u in the unit group mod n.

    Starts from a known multiple of the order (the group order, phi(n) unless
    given) and strips each prime l while u^(candidate/l) == 1.
    """
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    if math.gcd(u, n) != 1:
        raise NotInvertible(f"{u} is not a unit modulo {n}")
    if group_order is None:
        group_order = _unit_group_order(n)
    order = group_order.value
    for ell, e in group_order.factors:
        for _ in range(e):
            if pow(u, order // ell, n) != 1:
                break
            order //= ell
    return order


def _unit_group_order(n: int) -> FactoredInteger:
    acc: dict[int, int] = {}
    for p, e in factorize(n).factors:
        if e > 1:
            acc[p] = acc.get(p, 0) + e - 1
        if p > 2:
            for ell, f in factorize(p - 1).factors:
                acc[ell] = acc.get(ell, 0) + f
    return FactoredInteger(euler_phi(n), tuple(sorted(acc.items())))


def order_mod(u: Base, ctx: PrimeContext) -> int:
    return multiplicative_order(reduce_mod(u, ctx.p), ctx.p, ctx.p_minus_one)


def index_mod(u: Base, ctx: PrimeContext) -> int:
    return ctx.n // order_mod(u, ctx)


def _is_generator(g: int, p: int, p_minus_one: FactoredInteger) -> bool:
    return all(pow(g, (p - 1) // ell, p) != 1 for ell in p_minus_one.primes)


def primitive_root(p: int, p_minus_one: FactoredInteger | None = None) -> int:
    """Smallest tau >= 2 of order exactly p-1."""
    if p < 3 or not is_prime(p):
        raise ValueError(f"primitive_root expects a prime p >= 3, got {p}")
    if p >= DLOG_LIMIT:
        raise ValueError(f"primitive_root expects p < 2^40, got {p}")
    fi = p_minus_one or factorize(p - 1)
    for g in range(2, p):
        if _is_generator(g, p, fi):
            return g
    raise ArithmeticError(f"no primitive root found mod {p}")


@lru_cache(maxsize=4096)
def prime_context(p: int) -> PrimeContext:
    if p < 3 or not is_prime(p):
        raise ValueError(f"expected a prime p >= 3, got {p}")
    fi = factorize(p - 1)
    ctx = PrimeContext(p=p, p_minus_one=fi, tau=primitive_root(p, fi), q=next_prime_above(p))
    logger.debug("prime context p=%d: tau=%d, q=%d", p, ctx.tau, ctx.q)
    return ctx


@lru_cache(maxsize=8)
def _baby_steps(p: int, tau: int, m: int) -> dict[int, int]:
    table: dict[int, int] = {}
    cur = 1
    for j in range(m):
        table.setdefault(cur, j)
        cur = cur * tau % p
    return table


def discrete_log(u: Base, ctx: PrimeContext) -> int:
    """L in [0, p-2] with tau^L = u (mod p), by baby-step/giant-step."""
    if ctx.p >= DLOG_LIMIT:
        raise DlogFailure(f"discrete log budget is p < 2^40, got p={ctx.p}")
    target = reduce_mod(u, ctx.p)
    m = math.isqrt(ctx.n) + 1
    baby = _baby_steps(ctx.p, ctx.tau, m)
    giant = pow(ctx.tau, -m, ctx.p)
    gamma = target
    for i in range(m):
        j = baby.get(gamma)
        if j is not None:
            return (i * m + j) % ctx.n
        gamma = gamma * giant % ctx.p
    raise DlogFailure(f"no discrete log of {target} to base {ctx.tau} mod {ctx.p}")


def power_sequence(g: int, count: int, p: int, start: int = 1) -> np.ndarray:
    """[g^start, g^(start+1), ..., g^(start+count-1)] mod p."""
    out = np.empty(count, dtype=np.int64)
    cur = pow(g, start, p)
    for i in range(count):
        out[i] = cur
        cur = cur * g % p
    return out


@lru_cache(maxsize=16)
def order_table(ctx: PrimeContext) -> np.ndarray:
    """ord_p(r) for every residue r, index 0 unused (set to 0)."""
    if ctx.p >= ORDER_TABLE_LIMIT:
        raise ValueError(f"order_table expects p < 2^24, got {ctx.p}")
    n = ctx.n
    exps = np.arange(n, dtype=np.int64)
    residues = power_sequence(ctx.tau, n, ctx.p, start=0)
    table = np.zeros(ctx.p, dtype=np.int64)
    table[residues] = n // np.gcd(exps, n)
    return table
