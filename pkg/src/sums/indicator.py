# src/sums/indicator.py
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np
import pandas as pd

from src.numtheory.constants import INDICATOR_TOL_PER_TERM
from src.numtheory.errors import IdentityViolation, IndexNotDividing
from src.numtheory.factor import euler_phi, squarefree_divisors, moebius
from src.numtheory.modular import (
    Base,
    PrimeContext,
    RationalBase,
    discrete_log,
    order_mod,
    power_sequence,
    reduce_mod,
)
from .phases import character_sums, orthogonality_table, phase_sum, phases


@dataclass(frozen=True)
class OrderSpec:
    """ord_p(base) = (p - 1) / index."""

    base: Base
    index: int = 1

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"index must be >= 1, got {self.index}")

    @classmethod
    def parse(cls, text: str) -> "OrderSpec":
        """'u:d' with u an integer or num/den, e.g. '3:1' or '1/2:2'."""
        base_text, sep, index_text = text.rpartition(":")
        if not sep:
            raise ValueError(f"spec {text!r}: expected u:d, e.g. 3:1 or 1/2:2")
        try:
            index = int(index_text)
        except ValueError:
            raise ValueError(f"spec {text!r}: index must be an integer >= 1") from None
        return cls(RationalBase.parse(base_text), index)

    def __str__(self) -> str:
        return f"{self.base}:{self.index}"


@dataclass(frozen=True)
class IndicatorValue:
    value: float
    rounded: int
    residual: float
    term_count: int


@dataclass(frozen=True)
class TermDecomposition:
    """Psi_p(u, d) * Psi_p(v, e) split by frequency block (a, b)."""

    main: Fraction | float   # (0, 0)
    e1: Fraction | float     # a = 0, b != 0
    e2: Fraction | float     # a != 0, b = 0
    e3: Fraction | float     # a != 0, b != 0

    @property
    def total(self) -> Fraction | float:
        return self.main + self.e1 + self.e2 + self.e3


def _checked(value: complex, term_count: int) -> IndicatorValue:
    rounded = 1 if value.real >= 0.5 else 0
    residual = abs(value - rounded)
    if residual > INDICATOR_TOL_PER_TERM * max(term_count, 1):
        raise IdentityViolation(
            f"indicator residual {residual:.3e} exceeds tolerance for {term_count} terms (value={value})"
        )
    return IndicatorValue(value=float(value.real), rounded=rounded, residual=float(residual), term_count=term_count)


def _require_index(d: int, ctx: PrimeContext) -> int:
    if ctx.n % d:
        raise IndexNotDividing(d, ctx.p)
    return ctx.n // d


@lru_cache(maxsize=256)
def index_elements(d: int, ctx: PrimeContext) -> np.ndarray:
    """tau^(d n) for n in [1, (p-1)/d] with gcd(n, (p-1)/d) = 1: the elements of index d."""
    m = _require_index(d, ctx)
    powers = power_sequence(pow(ctx.tau, d, ctx.p), m, ctx.p)
    mask = np.gcd(np.arange(1, m + 1, dtype=np.int64), m) == 1
    elems = powers[mask]
    elems.setflags(write=False)
    return elems


# -------------------------
# Direct (ground truth)
# -------------------------
def has_index(u: int, d: int, ctx: PrimeContext) -> int:
    if ctx.n % d:
        return 0
    return int(order_mod(u, ctx) == ctx.n // d)


def indicator_direct(spec: OrderSpec, ctx: PrimeContext) -> int:
    return has_index(reduce_mod(spec.base, ctx.p), spec.index, ctx)


# -------------------------
# Divisor-dependent character sum
# -------------------------
def _ramanujan(r: int, L) -> np.ndarray | complex:
    """Sum over the phi(r) characters of exact order r, evaluated at tau^L."""
    js = np.arange(1, r + 1, dtype=np.int64)
    js = js[np.gcd(js, r) == 1]
    if np.ndim(L) == 0:
        return phase_sum(js * (int(L) % r), r)
    L = np.asarray(L, dtype=np.int64) % r
    acc = np.zeros(L.size, dtype=np.complex128)
    for j in js:
        acc += phases(j * L, r)
    return acc


def psi_divisor(u: Base, ctx: PrimeContext) -> IndicatorValue:
    """
    phi(n)/n * sum_{r | n} mu(r)/phi(r) * sum_{ord chi = r} chi(u), n = p - 1.

    Characters are realised through L = log_tau(u): a character of order r sends
    tau^L to e(jL/r) with gcd(j, r) = 1. Only squarefree r carry weight.
    """
    L = discrete_log(u, ctx)
    n = ctx.n
    total = 0j
    terms = 0
    for r in squarefree_divisors(ctx.p_minus_one):
        phi_r = euler_phi(r)
        total += moebius(r) / phi_r * _ramanujan(r, L)
        terms += phi_r
    return _checked(euler_phi(ctx.p_minus_one) / n * total, terms)


def psi_divisor_all(ctx: PrimeContext) -> pd.DataFrame:
    """psi_divisor for every u in [1, p-1], one row per u."""
    n = ctx.n
    logs = np.arange(n, dtype=np.int64)
    acc = np.zeros(n, dtype=np.complex128)
    terms = 0
    for r in squarefree_divisors(ctx.p_minus_one):
        phi_r = euler_phi(r)
        acc += moebius(r) / phi_r * _ramanujan(r, logs)
        terms += phi_r
    values = euler_phi(ctx.p_minus_one) / n * acc
    residues = power_sequence(ctx.tau, n, ctx.p, start=0)
    by_u = np.empty(ctx.p, dtype=np.complex128)
    by_u[residues] = values
    return _frame(by_u[1:], terms)


# -------------------------
# Divisor-free double sums
# -------------------------
def psi_free_d(spec: OrderSpec, ctx: PrimeContext) -> IndicatorValue:
    """
    sum over n <= (p-1)/d coprime to (p-1)/d of (1/p) sum_{k=0}^{p-1} e(k (tau^(dn) - u) / p).

    The inner sum runs over the full residue range; it is p exactly when
    tau^(dn) = u, so the total counts the index-d elements equal to u.
    """
    u = reduce_mod(spec.base, ctx.p)
    elems = index_elements(spec.index, ctx)
    value = complex(character_sums(elems - u, ctx.p).sum()) / ctx.p
    return _checked(value, elems.size * ctx.p)


def psi_free(u: Base, ctx: PrimeContext) -> IndicatorValue:
    return psi_free_d(OrderSpec(u, 1), ctx)


def psi_free_d_all(d: int, ctx: PrimeContext) -> pd.DataFrame:
    """psi_free_d for every u in [1, p-1] at a fixed index d, one row per u."""
    elems = index_elements(d, ctx)
    table = orthogonality_table(ctx.p)
    us = np.arange(1, ctx.p, dtype=np.int64)
    values = np.empty(us.size, dtype=np.complex128)
    step = max(1, (1 << 22) // max(elems.size, 1))
    for i in range(0, us.size, step):
        w = np.mod(elems[:, None] - us[None, i : i + step], ctx.p)
        values[i : i + step] = table[w].sum(axis=0)
    return _frame(values / ctx.p, elems.size * ctx.p)


def _frame(values: np.ndarray, term_count: int) -> pd.DataFrame:
    rounded = np.where(values.real >= 0.5, 1, 0)
    residual = np.abs(values - rounded)
    worst = float(residual.max()) if residual.size else 0.0
    if worst > INDICATOR_TOL_PER_TERM * max(term_count, 1):
        raise IdentityViolation(f"indicator residual {worst:.3e} exceeds tolerance for {term_count} terms")
    return pd.DataFrame({
        "u": np.arange(1, values.size + 1),
        "value": values.real,
        "rounded": rounded,
        "residual": residual,
    })


# -------------------------
# Per-prime frequency blocks
# -------------------------
def _hits(spec: OrderSpec, ctx: PrimeContext) -> tuple[int, int]:
    u = reduce_mod(spec.base, ctx.p)
    elems = index_elements(spec.index, ctx)
    return int(np.count_nonzero(elems == u)), int(elems.size)


def decompose_terms(spec_u: OrderSpec, spec_v: OrderSpec, ctx: PrimeContext) -> TermDecomposition:
    """
    Exact (a, b)-block split of Psi_p(u, d) * Psi_p(v, e).

    Each factor is (A0 + A') / p with A0 = phi(m) the a = 0 block and
    A' = p * hits - phi(m) the a != 0 blocks collapsed by orthogonality;
    hits are counted directly over the index-d elements.
    """
    hu, cu = _hits(spec_u, ctx)
    hv, cv = _hits(spec_v, ctx)
    p2 = ctx.p * ctx.p
    au = ctx.p * hu - cu
    bv = ctx.p * hv - cv
    return TermDecomposition(
        main=Fraction(cu * cv, p2),
        e1=Fraction(cu * bv, p2),
        e2=Fraction(au * cv, p2),
        e3=Fraction(au * bv, p2),
    )


def _frequency_profile(spec: OrderSpec, ctx: PrimeContext) -> np.ndarray:
    """A(a) = sum_n e(a (tau^(dn) - u) / p) for a in [0, p), by explicit exponentials."""
    u = reduce_mod(spec.base, ctx.p)
    w = index_elements(spec.index, ctx) - u
    a = np.arange(ctx.p, dtype=np.int64)
    out = np.empty(ctx.p, dtype=np.complex128)
    rows = max(1, (1 << 22) // max(w.size, 1))
    for i in range(0, ctx.p, rows):
        out[i : i + rows] = phases(np.outer(a[i : i + rows], w) % ctx.p, ctx.p).sum(axis=1)
    return out


def decompose_terms_numeric(spec_u: OrderSpec, spec_v: OrderSpec, ctx: PrimeContext) -> TermDecomposition:
    """Floating cross-check of decompose_terms through complex summation."""
    A = _frequency_profile(spec_u, ctx)
    B = _frequency_profile(spec_v, ctx)
    p2 = float(ctx.p) ** 2
    a_rest = A[1:].sum()
    b_rest = B[1:].sum()
    return TermDecomposition(
        main=float((A[0] * B[0]).real / p2),
        e1=float((A[0] * b_rest).real / p2),
        e2=float((a_rest * B[0]).real / p2),
        e3=float((a_rest * b_rest).real / p2),
    )
