# src/sweeps/stats.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional

import numpy as np

from src.numtheory.constants import (
    AVG_ORDER_X_CAP,
    COPRIME_REFERENCE_LIMIT,
    ORDER_TABLE_LIMIT,
    PROBABILITY_FLOAT_TOL,
)
from src.numtheory.errors import IdentityViolation
from src.numtheory.factor import FactoredInteger, divisors, euler_phi, factorize
from src.numtheory.modular import Base, RationalBase, multiplicative_order, order_mod, order_table, prime_context
from src.numtheory.parallel import chunk_bounds, ordered_map
from src.numtheory.sieve import smallest_factor_table

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64
SAMPLE_BATCH = 1 << 14


@dataclass(frozen=True)
class SampleResult:
    trials: int
    hits: int
    seed: int
    workers: int = 1

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    def sigma(self, alpha: float) -> float:
        return math.sqrt(alpha * (1 - alpha) / self.trials)


@dataclass(frozen=True)
class ProbabilityReport:
    """
    alpha_k(p) = sum_{d | p-1} phi(d)^k / (p-1)^k.

    The pseudo-independence factors c_d of the heuristic model are fixed at 1.
    """

    p: int
    alpha_exact: Fraction
    phi_ratio: float
    k: int = 2
    sampled: Optional[SampleResult] = None
    alpha_coprime: Optional[Fraction] = None

    @property
    def alpha_float(self) -> float:
        return float(self.alpha_exact)

    def as_row(self) -> Dict[str, object]:
        s = self.sampled
        return {
            "p": self.p,
            "alpha2_num": self.alpha_exact.numerator,
            "alpha2_den": self.alpha_exact.denominator,
            "alpha2": self.alpha_float,
            "phi_ratio": self.phi_ratio,
            "trials": s.trials if s else None,
            "hits": s.hits if s else None,
            "estimate": s.estimate if s else None,
            "seed": s.seed if s else None,
            "k": self.k,
            "alpha2_coprime": float(self.alpha_coprime) if self.alpha_coprime is not None else None,
        }


@dataclass(frozen=True)
class AvgOrderReport:
    x: int
    u: int
    order_sum: int

    @property
    def T(self) -> float:
        return self.order_sum / self.x

    def as_row(self) -> Dict[str, object]:
        return {"x": self.x, "u": self.u, "order_sum": self.order_sum, "T": self.T}


def _require_prime(p: int) -> None:
    if p < 3:
        raise ValueError(f"expected a prime p >= 3, got {p}")
    prime_context(p)


# -------------------------
# Exact equal-order probability
# -------------------------
def equal_order_probability_exact(p: int, k: int = 2) -> ProbabilityReport:
    """
    Probability that k uniform residues in [1, p-1] share one multiplicative order.

    Checks sum_{d | p-1} phi(d) = p-1 and the chain
    1/(p-1)^k <= alpha_k <= alpha_2 <= phi(p-1)/(p-1) <= 1/2.
    """
    _require_prime(p)
    if k < 2:
        raise ValueError(f"tuple size k must be >= 2, got {k}")
    n = p - 1
    ctx = prime_context(p)
    phis = [euler_phi(d) for d in divisors(ctx.p_minus_one)]
    if sum(phis) != n:
        raise IdentityViolation(f"sum of phi(d) over d | {n} is {sum(phis)}")

    alpha = Fraction(sum(f**k for f in phis), n**k)
    alpha2 = alpha if k == 2 else Fraction(sum(f * f for f in phis), n * n)
    phi_ratio = Fraction(euler_phi(ctx.p_minus_one), n)
    if not Fraction(1, n**k) <= alpha <= alpha2 <= phi_ratio <= Fraction(1, 2):
        raise IdentityViolation(f"probability chain broken at p={p}: alpha_{k}={alpha}, alpha_2={alpha2}, phi ratio={phi_ratio}")
    if abs(float(alpha) - alpha) > PROBABILITY_FLOAT_TOL:
        raise IdentityViolation(f"float alpha_{k} drifts from {alpha} at p={p}")
    return ProbabilityReport(p=p, alpha_exact=alpha, phi_ratio=float(phi_ratio), k=k)


def equal_order_probability_pairs(p: int) -> Fraction:
    """alpha_2 by exhaustive pair count over [1, p-1]^2; the cross-check for small p."""
    _require_prime(p)
    orders = order_table(prime_context(p))[1:]
    _, counts = np.unique(orders, return_counts=True)
    return Fraction(int((counts.astype(object) ** 2).sum()), (p - 1) ** 2)


def equal_order_probability_coprime(p: int) -> Fraction:
    """Equal-order frequency over coprime pairs (a, b) in [2, p-1]^2, by exhaustion."""
    _require_prime(p)
    if p >= COPRIME_REFERENCE_LIMIT:
        raise ValueError(f"coprime reference is exhaustive and expects p < {COPRIME_REFERENCE_LIMIT}, got {p}")
    if p < 5:
        raise ValueError(f"no coprime pairs in [2, p-1]^2 for p={p}")
    table = order_table(prime_context(p))
    a = np.arange(2, p, dtype=np.int64)
    coprime = np.gcd(a[:, None], a[None, :]) == 1
    same = table[a][:, None] == table[a][None, :]
    return Fraction(int((coprime & same).sum()), int(coprime.sum()))


# -------------------------
# Sampled estimator
# -------------------------
def _orders_of(values: np.ndarray, p: int) -> np.ndarray:
    ctx = prime_context(p)
    if p < ORDER_TABLE_LIMIT:
        return order_table(ctx)[values]
    return np.array([order_mod(int(v), ctx) for v in values], dtype=np.int64)


def _sample_stream(task: tuple[int, int, np.random.SeedSequence]) -> int:
    p, trials, seed_seq = task
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    hits = drawn = 0
    while drawn < trials:
        a = rng.integers(2, p, size=SAMPLE_BATCH, dtype=np.int64)
        b = rng.integers(2, p, size=SAMPLE_BATCH, dtype=np.int64)
        keep = np.gcd(a, b) == 1
        a, b = a[keep][: trials - drawn], b[keep][: trials - drawn]
        hits += int(np.count_nonzero(_orders_of(a, p) == _orders_of(b, p)))
        drawn += a.size
    return hits


def equal_order_probability_sampled(p: int, trials: int, seed: int, workers: int = 1) -> ProbabilityReport:
    """
    Monte Carlo estimate over coprime pairs (a, b) drawn uniformly from [2, p-1]^2.

    Worker i runs PCG64 on child i of SeedSequence(seed), so output is fixed
    for a given (seed, workers) pair.
    """
    _require_prime(p)
    if p < 5:
        raise ValueError(f"sampler needs p >= 5 to draw coprime pairs, got {p}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")

    children = np.random.SeedSequence(seed).spawn(workers)
    shares = [b - a for a, b in chunk_bounds(0, trials, workers)]
    tasks = [(p, share, child) for share, child in zip(shares, children)]
    hits = sum(ordered_map(_sample_stream, tasks, workers=workers))

    base = equal_order_probability_exact(p)
    sample = SampleResult(trials=trials, hits=hits, seed=seed, workers=workers)
    coprime = equal_order_probability_coprime(p) if p < COPRIME_REFERENCE_LIMIT else None
    logger.info("p=%d: %d/%d equal-order pairs (seed=%d, workers=%d)", p, hits, trials, seed, workers)
    return ProbabilityReport(
        p=p,
        alpha_exact=base.alpha_exact,
        phi_ratio=base.phi_ratio,
        sampled=sample,
        alpha_coprime=coprime,
    )


# -------------------------
# Average multiplicative order
# -------------------------
def _integer_base(u: Base) -> int:
    if isinstance(u, RationalBase):
        if u.denominator != 1:
            raise ValueError(f"avg_order needs an integer base, got {u}")
        return u.numerator
    if abs(u) <= 1:
        raise ValueError(f"base {u} is excluded (u != 0, 1, -1)")
    return int(u)


@lru_cache(maxsize=1 << 16)
def _prime_power_order(u: int, p: int, e: int) -> int:
    pe = p**e
    acc = dict(factorize(p - 1).factors) if p > 2 else {}
    if e > 1:
        acc[p] = acc.get(p, 0) + e - 1
    group = FactoredInteger(p ** (e - 1) * (p - 1), tuple(sorted(acc.items())))
    return multiplicative_order(u % pe, pe, group)


def _order_chunk(task: tuple[int, int, int, int]) -> int:
    lo, hi, u, limit = task
    spf = smallest_factor_table(limit)
    total = 0
    for n in range(lo, hi):
        if math.gcd(u, n) != 1:
            continue
        order = 1
        rest = n
        while rest > 1:
            p = int(spf[rest])
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            order = math.lcm(order, _prime_power_order(u, p, e))
        total += order
    return total


def avg_order(x: int, u: Base, workers: int = 1) -> AvgOrderReport:
    """T_u(x) = (1/x) sum_{2 <= n <= x, gcd(u, n) = 1} ord_n(u)."""
    base = _integer_base(u)
    if not 2 <= x <= AVG_ORDER_X_CAP:
        raise ValueError(f"x must lie in [2, 10^6], got {x}")
    tasks = [(lo, hi, base, x) for lo, hi in chunk_bounds(2, x + 1, max(1, workers) * 4)]
    order_sum = sum(ordered_map(_order_chunk, tasks, workers=workers))
    return AvgOrderReport(x=x, u=base, order_sum=order_sum)
