# src/sweeps/census.py
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.numtheory.admissible import is_admissible
from src.numtheory.constants import (
    CENSUS_X_CAP,
    EXACT_MAIN_TERM_LIMIT,
    MAX_CENSUS_K,
    MIN_CENSUS_X,
    REFERENCE_EPSILON,
    WITNESS_CAP,
)
from src.numtheory.errors import IdentityViolation, InadmissibleTuple, NotInvertible
from src.numtheory.factor import FactoredInteger, euler_phi, factorize
from src.numtheory.modular import Base, multiplicative_order, prime_context, reduce_mod
from src.numtheory.parallel import chunk_bounds, ordered_map
from src.numtheory.sieve import PrimeRange, prime_array
from src.sums.indicator import OrderSpec, decompose_terms, indicator_direct

logger = logging.getLogger(__name__)

RELATIONS = ("equal", "decreasing")
TASKS_PER_WORKER = 4


# -------------------------
# Queries and reports
# -------------------------
@dataclass(frozen=True)
class CensusQuery:
    x: int
    specs: Tuple[OrderSpec, ...]
    B: float = 0.0
    allow_large: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", tuple(self.specs))
        _check_x(self.x, self.allow_large)
        if not 1 <= len(self.specs) <= MAX_CENSUS_K:
            raise ValueError(f"census expects 1 <= k <= {MAX_CENSUS_K} specs, got k={len(self.specs)}")
        if self.B < 0:
            raise ValueError(f"B must be nonnegative, got {self.B}")
        _require_admissible([s.base for s in self.specs])

    @property
    def k(self) -> int:
        return len(self.specs)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(s.index for s in self.specs)

    @property
    def spec_text(self) -> str:
        return ";".join(str(s) for s in self.specs)


@dataclass(frozen=True)
class CensusReport:
    query: CensusQuery
    prime_count_total: int
    matching_primes: int
    skipped_primes: int
    main_term: float
    e3: float
    analytic_lower_bound: float
    ratio: float
    sample_witnesses: Tuple[int, ...]
    index_lcm: int
    index_product: int

    @property
    def e3_abs(self) -> float:
        return abs(self.e3)

    def as_row(self) -> Dict[str, object]:
        q = self.query
        return {
            "x": q.x,
            "two_x": 2 * q.x,
            "k": q.k,
            "specs": q.spec_text,
            "primes_total": self.prime_count_total,
            "R": self.matching_primes,
            "skipped": self.skipped_primes,
            "M": self.main_term,
            "e3_abs": self.e3_abs,
            "lower_bound": self.analytic_lower_bound,
            "ratio": self.ratio,
        }


@dataclass(frozen=True)
class MainTermReport:
    x: int
    d: int
    e: int
    lcm: int
    primes: int
    M: float
    exact: Optional[Fraction] = None

    def as_row(self) -> Dict[str, object]:
        return {"x": self.x, "d": self.d, "e": self.e, "lcm": self.lcm, "de": self.d * self.e, "primes": self.primes, "M": self.M}


@dataclass(frozen=True)
class AuditReport:
    query: CensusQuery
    primes_audited: int
    R: int
    main: Fraction
    e1: Fraction
    e2: Fraction
    e3: Fraction
    vanishing_checks: int
    vanishing_failures: int

    @property
    def total(self) -> Fraction:
        return self.main + self.e1 + self.e2 + self.e3

    @property
    def identity_holds(self) -> bool:
        return self.total == self.R

    @property
    def e3_reference(self) -> float:
        return self.query.x ** (1 - 2 * REFERENCE_EPSILON)

    @property
    def passed(self) -> bool:
        return self.identity_holds and self.vanishing_failures == 0

    def as_row(self) -> Dict[str, object]:
        e3_abs = abs(float(self.e3))
        return {
            "x": self.query.x,
            "specs": self.query.spec_text,
            "primes_audited": self.primes_audited,
            "R": self.R,
            "main": float(self.main),
            "e1": float(self.e1),
            "e2": float(self.e2),
            "e3": float(self.e3),
            "total": float(self.total),
            "identity_holds": self.identity_holds,
            "vanishing_checks": self.vanishing_checks,
            "vanishing_failures": self.vanishing_failures,
            "e3_abs": e3_abs,
            "e3_reference": self.e3_reference,
            "e3_ratio": e3_abs / self.e3_reference,
        }


@dataclass(frozen=True)
class TotientAverageReport:
    x: int
    q: int
    a: int
    indices: Tuple[int, ...]
    primes: int
    S: float
    A_hat: float
    label: str = "conjecture probe"

    def as_row(self) -> Dict[str, object]:
        return {
            "x": self.x, "q": self.q, "a": self.a,
            "indices": ";".join(str(d) for d in self.indices),
            "primes": self.primes, "S": self.S, "A_hat": self.A_hat, "label": self.label,
        }


@dataclass(frozen=True)
class OrderRelationReport:
    x: int
    bases: Tuple[Base, ...]
    relation: str
    primes_total: int
    matching: int
    skipped: int
    index_histogram: Dict[int, int] = field(default_factory=dict)

    def as_row(self) -> Dict[str, object]:
        hist = ";".join(f"{d}:{c}" for d, c in sorted(self.index_histogram.items()))
        return {
            "x": self.x,
            "two_x": 2 * self.x,
            "bases": ";".join(str(b) for b in self.bases),
            "relation": self.relation,
            "primes_total": self.primes_total,
            "matching": self.matching,
            "skipped": self.skipped,
            "index_histogram": hist,
        }


# -------------------------
# Shared helpers
# -------------------------
def _check_x(x: int, allow_large: bool = False) -> None:
    if x < MIN_CENSUS_X:
        raise ValueError(f"x must be >= {MIN_CENSUS_X}, got {x}")
    if x > CENSUS_X_CAP and not allow_large:
        raise ValueError(f"x={x} exceeds the sweep cap 10^7; pass allow_large to go further")


def _require_admissible(bases: Sequence[Base]) -> None:
    result = is_admissible(bases)
    if not result.admissible:
        raise InadmissibleTuple(result.bases, result.witness, result.witness_product)


def _residues(bases: Sequence[Base], p: int) -> Optional[List[int]]:
    try:
        return [reduce_mod(b, p) for b in bases]
    except NotInvertible:
        return None


def has_prescribed_order(u: int, d: int, p: int, p_minus_one: FactoredInteger) -> bool:
    """ord_p(u) == (p-1)/d, tested without computing the full order."""
    if (p - 1) % d:
        return False
    m = (p - 1) // d
    if pow(u, m, p) != 1:
        return False
    return all(pow(u, m // ell, p) != 1 for ell in p_minus_one.quotient(d).primes)


def lower_bound(x: int, k: int, B: float) -> float:
    """x / ((log x)^(2Bk+1) (log log x)^k)."""
    lx = math.log(x)
    return x / (lx ** (2 * B * k + 1) * math.log(lx) ** k)


def _worker_chunks(primes: np.ndarray, workers: int) -> List[np.ndarray]:
    bounds = chunk_bounds(0, primes.size, max(1, workers) * TASKS_PER_WORKER)
    return [primes[a:b] for a, b in bounds]


# -------------------------
# Simultaneous prescribed orders
# -------------------------
@dataclass(frozen=True)
class _CensusPartial:
    primes_total: int
    matching: int
    skipped: int
    witnesses: Tuple[int, ...]
    main_terms: np.ndarray
    e3_terms: np.ndarray


def _census_chunk(task: tuple[np.ndarray, Tuple[OrderSpec, ...]]) -> _CensusPartial:
    primes, specs = task
    bases = [s.base for s in specs]
    indices = [s.index for s in specs]
    matching = skipped = 0
    witnesses: List[int] = []
    main_terms: List[float] = []
    e3_terms: List[float] = []
    for p in primes.tolist():
        residues = _residues(bases, p)
        if residues is None or any((p - 1) % d for d in indices):
            skipped += 1
            continue
        fi = factorize(p - 1)
        hits = [has_prescribed_order(u, d, p, fi) for u, d in zip(residues, indices)]
        counts = [euler_phi(fi.quotient(d)) for d in indices]
        if all(hits):
            matching += 1
            if len(witnesses) < WITNESS_CAP:
                witnesses.append(p)
        pk = float(p) ** len(specs)
        main_terms.append(math.prod(counts) / pk)
        e3_terms.append(math.prod(p * h - c for h, c in zip(hits, counts)) / pk)
    return _CensusPartial(
        primes_total=int(primes.size),
        matching=matching,
        skipped=skipped,
        witnesses=tuple(witnesses),
        main_terms=np.asarray(main_terms, dtype=np.float64),
        e3_terms=np.asarray(e3_terms, dtype=np.float64),
    )


def count_simultaneous(query: CensusQuery, workers: int = 1) -> CensusReport:
    """
    R(x) = #{x <= p <= 2x : ord_p(u_i) = (p-1)/d_i for every i}.

    Primes where some d_i does not divide p-1, or some base is not a unit, are
    tallied as skipped and contribute nothing to R, M or e3. Partials come back
    in prime order; per-prime float terms are concatenated and summed with fsum,
    so the report does not depend on how the range was split.
    """
    primes = prime_array(PrimeRange.dyadic(query.x), workers=workers)
    tasks = [(chunk, query.specs) for chunk in _worker_chunks(primes, workers)]
    parts = ordered_map(_census_chunk, tasks, workers=workers)

    matching = sum(pt.matching for pt in parts)
    skipped = sum(pt.skipped for pt in parts)
    witnesses = tuple(w for pt in parts for w in pt.witnesses)[:WITNESS_CAP]
    main = math.fsum(np.concatenate([pt.main_terms for pt in parts]).tolist()) if parts else 0.0
    e3 = math.fsum(np.concatenate([pt.e3_terms for pt in parts]).tolist()) if parts else 0.0

    for p in witnesses:
        ctx = prime_context(p)
        if not all(indicator_direct(s, ctx) for s in query.specs):
            raise IdentityViolation(f"witness {p} fails the order conditions {query.spec_text}")

    lb = lower_bound(query.x, query.k, query.B)
    logger.info("census x=%d specs=%s: %d of %d primes match, %d skipped", query.x, query.spec_text, matching, primes.size, skipped)
    return CensusReport(
        query=query,
        prime_count_total=int(primes.size),
        matching_primes=matching,
        skipped_primes=skipped,
        main_term=main,
        e3=e3,
        analytic_lower_bound=lb,
        ratio=matching / lb,
        sample_witnesses=witnesses,
        index_lcm=math.lcm(*query.indices),
        index_product=math.prod(query.indices),
    )


# -------------------------
# Main term
# -------------------------
def _main_chunk(task: tuple[np.ndarray, int, int]) -> List[Tuple[int, int, int]]:
    primes, d, e = task
    out = []
    for p in primes.tolist():
        fi = factorize(p - 1)
        out.append((euler_phi(fi.quotient(d)), euler_phi(fi.quotient(e)), p))
    return out


def main_term_report(x: int, d: int, e: int, workers: int = 1) -> MainTermReport:
    """
    sum over primes p in [x, 2x] with p = 1 (mod lcm(d, e)) of phi((p-1)/d) phi((p-1)/e) / p^2.

    Exact Fractions for short progressions, fsum beyond EXACT_MAIN_TERM_LIMIT primes.
    """
    _check_x(x)
    if d < 1 or e < 1:
        raise ValueError(f"indices must be >= 1, got d={d}, e={e}")
    L = math.lcm(d, e)
    primes = prime_array(PrimeRange.dyadic(x, L, 1), workers=workers)
    tasks = [(chunk, d, e) for chunk in _worker_chunks(primes, workers)]
    terms = [t for part in ordered_map(_main_chunk, tasks, workers=workers) for t in part]

    exact = None
    if len(terms) <= EXACT_MAIN_TERM_LIMIT:
        exact = sum((Fraction(a * b, p * p) for a, b, p in terms), Fraction(0))
        M = float(exact)
    else:
        M = math.fsum(a * b / (p * p) for a, b, p in terms)
    return MainTermReport(x=x, d=d, e=e, lcm=L, primes=len(terms), M=M, exact=exact)


def main_term(x: int, d: int, e: int, workers: int = 1) -> float:
    return main_term_report(x, d, e, workers=workers).M


# -------------------------
# Decomposition audit
# -------------------------
@dataclass(frozen=True)
class _AuditPartial:
    audited: int
    R: int
    main: Fraction
    e1: Fraction
    e2: Fraction
    e3: Fraction
    checks: int
    # (p, side) for every prime whose vanishing sweep failed; side is "u" or "v"
    failed: Tuple[Tuple[int, str], ...]


def _audit_chunk(task: tuple[np.ndarray, OrderSpec, OrderSpec]) -> _AuditPartial:
    primes, spec_u, spec_v = task
    main = e1 = e2 = e3 = Fraction(0)
    audited = R = checks = 0
    failed: List[Tuple[int, str]] = []
    for p in primes.tolist():
        if _residues([spec_u.base, spec_v.base], p) is None or (p - 1) % spec_u.index or (p - 1) % spec_v.index:
            continue
        ctx = prime_context(p)
        parts = decompose_terms(spec_u, spec_v, ctx)
        hit_u = indicator_direct(spec_u, ctx)
        hit_v = indicator_direct(spec_v, ctx)
        audited += 1
        R += hit_u * hit_v
        main += parts.main
        e1 += parts.e1
        e2 += parts.e2
        e3 += parts.e3
        if not hit_u:
            checks += 1
            if parts.main + parts.e2 != 0 or parts.e1 + parts.e3 != 0:
                failed.append((p, "u"))
        if not hit_v:
            checks += 1
            if parts.main + parts.e1 != 0 or parts.e2 + parts.e3 != 0:
                failed.append((p, "v"))
    return _AuditPartial(audited, R, main, e1, e2, e3, checks, tuple(failed))


def decomposition_audit(query: CensusQuery, workers: int = 1) -> AuditReport:
    """
    Sum the exact (a, b)-block split of Psi(u, d) Psi(v, e) over [x, 2x].

    The four block totals must add up to R exactly. Where an indicator vanishes
    the whole frequency sweep on its side is zero: Psi_u = 0 forces
    main + e2 = 0 and e1 + e3 = 0, Psi_v = 0 forces main + e1 = 0 and e2 + e3 = 0.
    Chunks are audited through the worker pool; Fraction totals are exact, so
    the report is the same for any worker count.
    """
    if query.k != 2:
        raise ValueError(f"decomposition_audit expects k=2 specs, got k={query.k}")
    spec_u, spec_v = query.specs
    primes = prime_array(PrimeRange.dyadic(query.x), workers=workers)
    tasks = [(chunk, spec_u, spec_v) for chunk in _worker_chunks(primes, workers)]
    parts = ordered_map(_audit_chunk, tasks, workers=workers)

    for pt in parts:
        for p, side in pt.failed:
            logger.warning("p=%d: %s-sweep for %s does not vanish", p, "a" if side == "u" else "b",
                           spec_u if side == "u" else spec_v)

    report = AuditReport(
        query=query,
        primes_audited=sum(pt.audited for pt in parts),
        R=sum(pt.R for pt in parts),
        main=sum((pt.main for pt in parts), Fraction(0)),
        e1=sum((pt.e1 for pt in parts), Fraction(0)),
        e2=sum((pt.e2 for pt in parts), Fraction(0)),
        e3=sum((pt.e3 for pt in parts), Fraction(0)),
        vanishing_checks=sum(pt.checks for pt in parts),
        vanishing_failures=sum(len(pt.failed) for pt in parts),
    )
    if not report.identity_holds:
        logger.error("audit x=%d: blocks total %s but R=%d", query.x, report.total, report.R)
    return report


# -------------------------
# Progression constant probe
# -------------------------
def _totient_chunk(task: tuple[np.ndarray, Tuple[int, ...]]) -> List[float]:
    primes, indices = task
    out = []
    for p in primes.tolist():
        if any((p - 1) % d for d in indices):
            out.append(0.0)
            continue
        fi = factorize(p - 1)
        out.append(math.prod(euler_phi(fi.quotient(d)) / (p - 1) for d in indices))
    return out


def totient_product_avg(x: int, q: int, a: int, indices: Sequence[int], workers: int = 1) -> TotientAverageReport:
    """
    S = sum over p in [x, 2x], p = a (mod q) of prod_i phi((p-1)/d_i)/(p-1),
    with the constant estimate S phi(q) log x / x. Empirical only.
    """
    _check_x(x)
    indices = tuple(indices)
    if not indices or any(d < 1 for d in indices):
        raise ValueError(f"indices must be a nonempty sequence of integers >= 1, got {indices}")
    if q < 1:
        raise ValueError(f"modulus q must be >= 1, got {q}")
    if math.gcd(a, q) != 1:
        raise ValueError(f"a={a} must be coprime to q={q}")
    primes = prime_array(PrimeRange.dyadic(x, q, a), workers=workers)
    tasks = [(chunk, indices) for chunk in _worker_chunks(primes, workers)]
    terms = [t for part in ordered_map(_totient_chunk, tasks, workers=workers) for t in part]
    S = math.fsum(terms)
    return TotientAverageReport(
        x=x, q=q, a=a % q if q > 1 else a, indices=indices,
        primes=len(terms), S=S, A_hat=S * euler_phi(q) * math.log(x) / x,
    )


# -------------------------
# Equal / decreasing orders
# -------------------------
def _relation_chunk(task: tuple[np.ndarray, Tuple[Base, ...], str]) -> tuple[int, int, Counter]:
    primes, bases, relation = task
    matching = skipped = 0
    hist: Counter = Counter()
    for p in primes.tolist():
        residues = _residues(bases, p)
        if residues is None:
            skipped += 1
            continue
        fi = factorize(p - 1)
        orders = [multiplicative_order(u, p, fi) for u in residues]
        if relation == "equal":
            if len(set(orders)) == 1:
                matching += 1
                hist[(p - 1) // orders[0]] += 1
        elif all(a > b for a, b in zip(orders, orders[1:])):
            matching += 1
    return matching, skipped, hist


def count_order_relation(x: int, bases: Sequence[Base], relation: str = "equal", workers: int = 1) -> OrderRelationReport:
    """Primes in [x, 2x] where the bases share one order, or have strictly decreasing orders."""
    _check_x(x)
    if relation not in RELATIONS:
        raise ValueError(f"relation must be one of {RELATIONS}, got {relation!r}")
    bases = tuple(bases)
    if not 2 <= len(bases) <= MAX_CENSUS_K:
        raise ValueError(f"relation census expects 2 <= k <= {MAX_CENSUS_K} bases, got k={len(bases)}")
    _require_admissible(bases)

    primes = prime_array(PrimeRange.dyadic(x), workers=workers)
    tasks = [(chunk, bases, relation) for chunk in _worker_chunks(primes, workers)]
    parts = ordered_map(_relation_chunk, tasks, workers=workers)
    hist: Counter = Counter()
    for _, _, h in parts:
        hist.update(h)
    return OrderRelationReport(
        x=x,
        bases=bases,
        relation=relation,
        primes_total=int(primes.size),
        matching=sum(m for m, _, _ in parts),
        skipped=sum(s for _, s, _ in parts),
        index_histogram=dict(sorted(hist.items())),
    )
