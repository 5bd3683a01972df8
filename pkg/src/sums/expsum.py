# src/sums/expsum.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict

import numpy as np

from src.numtheory.constants import (
    CLOSED_FORM_TOL,
    COPRIME_KERNEL_MIN_P,
    DIFFERENCE_BOUND_CONSTANT,
    INDICATOR_TOL_PER_TERM,
    PERIODIC_C0,
    PERIODIC_C1,
    REFERENCE_EPSILON,
    TRIVIAL_BOUND_SLACK,
)
from src.numtheory.errors import IdentityViolation, IndexNotDividing
from src.numtheory.factor import divisor_count, euler_phi, moebius, squarefree_divisors
from src.numtheory.modular import PrimeContext, multiplicative_order, power_sequence, reduce_mod
from .indicator import OrderSpec, index_elements, indicator_direct
from .phases import phase_sum, phases

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpSumResult:
    kind: str
    value: complex
    magnitude: float
    bound: float
    ratio: float
    term_count: int
    params: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PeriodicElement:
    """w in (Z/mZ)^x with period Q, summed up to the cutoff P <= Q."""

    m: int
    w: int
    Q: int
    P: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"modulus m must be >= 2, got {self.m}")
        if math.gcd(self.w, self.m) != 1:
            raise ValueError(f"w={self.w} is not coprime to m={self.m}")
        if self.Q != multiplicative_order(self.w, self.m):
            raise ValueError(f"Q={self.Q} is not the order of {self.w} mod {self.m}")
        if not 1 <= self.P <= self.Q:
            raise ValueError(f"cutoff P must lie in [1, Q={self.Q}], got {self.P}")

    @classmethod
    def build(cls, m: int, w: int, P: int | None = None) -> "PeriodicElement":
        Q = multiplicative_order(w, m)
        return cls(m=m, w=w % m, Q=Q, P=Q if P is None else P)


def _result(kind: str, value: complex, bound: float, term_count: int, params: Dict[str, Any], **extras: float) -> ExpSumResult:
    value = complex(value)
    magnitude = abs(value)
    if magnitude > term_count * (1 + TRIVIAL_BOUND_SLACK) + TRIVIAL_BOUND_SLACK:
        raise IdentityViolation(f"{kind}: |sum|={magnitude} exceeds the {term_count}-term trivial bound")
    ratio = magnitude / bound if bound > 0 else math.inf
    if ratio > 1:
        logger.info("%s %s: |sum| exceeds the reference bound (ratio %.4g)", kind, params, ratio)
    return ExpSumResult(
        kind=kind,
        value=value,
        magnitude=magnitude,
        bound=float(bound),
        ratio=ratio,
        term_count=int(term_count),
        params=params,
        extras=extras,
    )


def _agree(kind: str, a: complex, b: complex, tol: float = CLOSED_FORM_TOL) -> None:
    if abs(a - b) > tol:
        raise IdentityViolation(f"{kind}: evaluation paths disagree ({a} vs {b}, |diff|={abs(a - b):.3e})")


def _frequency(t: int, modulus: int) -> int:
    if not 1 <= t <= modulus - 1:
        raise ValueError(f"frequency must lie in [1, {modulus - 1}], got {t}")
    return min(t, modulus - t)


@lru_cache(maxsize=64)
def _tau_powers(ctx: PrimeContext) -> np.ndarray:
    """tau^L mod p for L in [0, p-2]; exponents are reduced mod p-1 before lookup."""
    powers = power_sequence(ctx.tau, ctx.n, ctx.p, start=0)
    powers.setflags(write=False)
    return powers


def _divisor_of(d: int, ctx: PrimeContext) -> int:
    if d < 1 or ctx.n % d:
        raise IndexNotDividing(d, ctx.p)
    return ctx.n // d


# -------------------------
# Summation kernels (auxiliary prime q)
# -------------------------
def kernel_sum(ctx: PrimeContext, t: int) -> ExpSumResult:
    """
    sum_{n=1}^{p-1} w^(t n), w = e(1/q), checked against the geometric closed form.

    The bound uses t' = min(t, q - t); the sum is symmetric under t -> q - t.
    """
    q = ctx.q
    t_sym = _frequency(t, q)
    n = np.arange(1, ctx.p, dtype=np.int64)
    value = phase_sum(t * n, q)
    w_t = complex(phases(t, q))
    closed = (w_t - complex(phases(t * ctx.p, q))) / (1 - w_t)
    _agree("kernel_sum", value, closed)
    return _result(
        "kernel", value, 2 * q / (math.pi * t_sym), ctx.p - 1,
        {"p": ctx.p, "q": q, "t": t},
        closed_re=closed.real, closed_im=closed.imag,
    )


def coprime_kernel_sum(ctx: PrimeContext, t: int, d: int) -> ExpSumResult:
    q = ctx.q
    t_sym = _frequency(t, q)
    m = _divisor_of(d, ctx)
    ns = np.arange(1, m + 1, dtype=np.int64)
    ns = ns[np.gcd(ns, m) == 1]
    direct = phase_sum(t * ns, q)

    expanded = 0j
    for r in squarefree_divisors(m):
        js = np.arange(1, m // r + 1, dtype=np.int64)
        expanded += moebius(r) * phase_sum(t * r * js, q)
    _agree("coprime_kernel_sum", direct, expanded)

    if ctx.p >= COPRIME_KERNEL_MIN_P:
        bound = 4 * q * math.log(math.log(ctx.p)) / (math.pi * t_sym)
    else:
        bound = float(ns.size)
    return _result(
        "coprime-kernel", direct, bound, ns.size,
        {"p": ctx.p, "q": q, "t": t, "d": d},
        mobius_re=expanded.real, mobius_im=expanded.imag,
    )


# -------------------------
# Gauss / Weil / resolvent sums
# -------------------------
def gauss_resolvent(ctx: PrimeContext) -> ExpSumResult:
    return _resolvent(ctx, 1, "gauss")


def power_resolvent(ctx: PrimeContext, d: int) -> ExpSumResult:
    _divisor_of(d, ctx)
    return _resolvent(ctx, d, "power")


def _resolvent(ctx: PrimeContext, d: int, kind: str) -> ExpSumResult:
    """sum_{t=1}^{q-1} e(t/q) e(tau^(d t)/p)."""
    q = ctx.q
    t = np.arange(1, q, dtype=np.int64)
    pw = _tau_powers(ctx)[(d * t) % ctx.n]
    terms = phases(t, q) * phases(pw, ctx.p)
    value = complex(terms.sum())
    bound = 2 * d * math.sqrt(q) * math.log(q)
    params = {"p": ctx.p, "q": q} if kind == "gauss" else {"p": ctx.p, "q": q, "d": d}
    return _result(kind, value, bound, q - 1, params)


def weil_power_sum(ctx: PrimeContext, d: int, a: int) -> ExpSumResult:
    """
    sum_{z=1}^{p-1} e(a z^d / p), enumerated as z = tau^L.

    complete_magnitude adds back the z = 0 term; for d = 2 it equals sqrt(p).
    """
    if d < 1:
        raise ValueError(f"degree d must be >= 1, got {d}")
    _frequency(a, ctx.p)
    L = np.arange(ctx.n, dtype=np.int64)
    zd = _tau_powers(ctx)[(d * L) % ctx.n]
    value = phase_sum((a * zd) % ctx.p, ctx.p)
    sp = math.sqrt(ctx.p)
    return _result(
        "weil", value, 2 * d * sp * math.log(ctx.p), ctx.n,
        {"p": ctx.p, "d": d, "a": a},
        classical=(d - 1) * sp + 1,
        complete_magnitude=abs(value + 1),
    )


# -------------------------
# Incomplete and coprime sums over index-d elements
# -------------------------
def incomplete_sum(ctx: PrimeContext, d: int, a: int, x: int) -> ExpSumResult:
    _divisor_of(d, ctx)
    _frequency(a, ctx.p)
    if not 1 <= x <= ctx.n:
        raise ValueError(f"x must lie in [1, p-1={ctx.n}], got {x}")
    n = np.arange(1, x + 1, dtype=np.int64)
    vals = _tau_powers(ctx)[(d * n) % ctx.n]
    value = phase_sum((a * vals) % ctx.p, ctx.p)
    return _result(
        "incomplete", value, math.sqrt(ctx.p) * math.log(ctx.p) ** 3, x,
        {"p": ctx.p, "d": d, "a": a, "x": x},
    )


def _rho_value(ctx: PrimeContext, d: int, a: int) -> tuple[complex, int]:
    elems = index_elements(d, ctx)
    return phase_sum((a * elems) % ctx.p, ctx.p), int(elems.size)


def rho(ctx: PrimeContext, d: int, a: int) -> ExpSumResult:
    """
    sum over n <= (p-1)/d coprime to (p-1)/d of e(a tau^(d n) / p).

    These are the generators of the subgroup of order m = (p-1)/d; by Moebius
    over squarefree r | m the sum splits into Gauss periods of size at most
    sqrt(p), hence the hard cap tau0(m) (sqrt(p) + 1).
    """
    m = _divisor_of(d, ctx)
    _frequency(a, ctx.p)
    value, count = _rho_value(ctx, d, a)
    hard = divisor_count(m) * (math.sqrt(ctx.p) + 1)
    if abs(value) > hard:
        raise IdentityViolation(f"rho: |sum|={abs(value):.6g} exceeds divisor bound {hard:.6g} (p={ctx.p}, d={d}, a={a})")
    return _result(
        "rho", value, math.sqrt(ctx.p) * math.log(ctx.p) ** 3, count,
        {"p": ctx.p, "d": d, "a": a},
        divisor_bound=hard,
    )


def rho_diff(ctx: PrimeContext, d: int, a: int) -> ExpSumResult:
    _divisor_of(d, ctx)
    _frequency(a, ctx.p)
    va, count = _rho_value(ctx, d, a)
    v1, _ = _rho_value(ctx, d, 1)
    bound = DIFFERENCE_BOUND_CONSTANT * math.sqrt(ctx.p) * math.log(ctx.p) ** 4
    return _result("rho-diff", va - v1, bound, 2 * count, {"p": ctx.p, "d": d, "a": a})


# -------------------------
# General modulus
# -------------------------
def _periodic_bound(elem: PeriodicElement, halve: bool) -> float:
    eps = PERIODIC_C1 * math.log(elem.P) / math.log(elem.m)
    if halve:
        eps /= 2
        return PERIODIC_C0 * elem.m**eps * elem.P ** (1 - 2 * eps)
    return PERIODIC_C0 * elem.P ** (1 - eps)


def periodic_sum(elem: PeriodicElement, a: int) -> ExpSumResult:
    _frequency(a, elem.m)
    vals = power_sequence(elem.w, elem.P, elem.m)
    value = phase_sum((a * vals) % elem.m, elem.m)
    return _result(
        "periodic", value, _periodic_bound(elem, halve=False), elem.P,
        {"m": elem.m, "w": elem.w, "Q": elem.Q, "P": elem.P, "a": a},
    )


def coprime_periodic_sum(elem: PeriodicElement, a: int) -> ExpSumResult:
    _frequency(a, elem.m)
    phi_m = euler_phi(elem.m)
    ns = np.arange(1, elem.P + 1, dtype=np.int64)
    keep = np.gcd(ns, phi_m) == 1
    vals = power_sequence(elem.w, elem.P, elem.m)
    direct = phase_sum((a * vals[keep]) % elem.m, elem.m)

    expanded = 0j
    for r in squarefree_divisors(phi_m):
        count = elem.P // r
        if count == 0:
            continue
        sub = power_sequence(pow(elem.w, r, elem.m), count, elem.m)
        expanded += moebius(r) * phase_sum((a * sub) % elem.m, elem.m)
    _agree("coprime_periodic_sum", direct, expanded)

    return _result(
        "coprime-periodic", direct, _periodic_bound(elem, halve=True), int(keep.sum()),
        {"m": elem.m, "w": elem.w, "Q": elem.Q, "P": elem.P, "a": a},
        mobius_re=expanded.real, mobius_im=expanded.imag,
    )


# -------------------------
# Double sum
# -------------------------
@lru_cache(maxsize=16)
def rho_profile(ctx: PrimeContext, d: int) -> np.ndarray:
    """rho(a, d, p) for every a in [1, p-1] (index a - 1)."""
    elems = index_elements(d, ctx)
    a = np.arange(1, ctx.p, dtype=np.int64)
    out = np.empty(a.size, dtype=np.complex128)
    rows = max(1, (1 << 22) // max(elems.size, 1))
    for i in range(0, a.size, rows):
        out[i : i + rows] = phases(np.outer(a[i : i + rows], elems) % ctx.p, ctx.p).sum(axis=1)
    out.setflags(write=False)
    return out


def double_sum(spec: OrderSpec, ctx: PrimeContext) -> ExpSumResult:
    """
    T = sum_{a=1}^{p-1} e(-a u / p) rho(a, d, p).

    Orthogonality collapses T to p * [ord u = (p-1)/d] - phi((p-1)/d); that
    integer is checked to within 1e-6 p.
    """
    m = _divisor_of(spec.index, ctx)
    u = reduce_mod(spec.base, ctx.p)
    a = np.arange(1, ctx.p, dtype=np.int64)
    profile = rho_profile(ctx, spec.index)
    value = complex((phases(-a * u, ctx.p) * profile).sum())
    expected = ctx.p * indicator_direct(spec, ctx) - euler_phi(m)
    if abs(value - expected) > INDICATOR_TOL_PER_TERM * ctx.p:
        raise IdentityViolation(f"double_sum: {value} does not collapse to {expected} (p={ctx.p}, spec={spec})")
    return _result(
        "double", value, ctx.p ** (1 - REFERENCE_EPSILON), ctx.n * euler_phi(m),
        {"p": ctx.p, "u": str(spec.base), "d": spec.index},
        identity=float(expected),
    )
