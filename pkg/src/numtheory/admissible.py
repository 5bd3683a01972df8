# src/numtheory/admissible.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from sympy import Matrix, ilcm

from .constants import MAX_ADMISSIBLE_K
from .factor import factored
from .modular import RationalBase


@dataclass(frozen=True)
class AdmissibilityResult:
    bases: Tuple[RationalBase, ...]
    admissible: bool
    witness: Optional[Tuple[int, ...]] = None
    # +1: the product of powers equals 1; -1: it equals -1.
    witness_product: Optional[int] = None


def _as_base(u) -> RationalBase:
    if isinstance(u, RationalBase):
        return u
    if isinstance(u, str):
        return RationalBase.parse(u)
    return RationalBase(int(u))


def exponent_matrix(bases: Sequence[RationalBase]) -> Tuple[Tuple[int, ...], Matrix]:
    """Rows indexed by the primes in play, one column per base; sign kept apart."""
    columns: list[dict[int, int]] = []
    for u in bases:
        col: dict[int, int] = {}
        if abs(u.numerator) > 1:
            for p, e in factored(abs(u.numerator)).factors:
                col[p] = e
        if u.denominator > 1:
            for p, e in factored(u.denominator).factors:
                col[p] = -e
        columns.append(col)
    primes = tuple(sorted({p for col in columns for p in col}))
    mat = Matrix(len(primes), len(bases), lambda i, j: columns[j].get(primes[i], 0))
    return primes, mat


def _primitive_integer_vector(vec) -> Tuple[int, ...]:
    scale = 1
    for entry in vec:
        scale = ilcm(scale, entry.q)
    ints = [int(entry * scale) for entry in vec]
    g = math.gcd(*ints)
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def is_admissible(bases: Sequence[RationalBase | int | str]) -> AdmissibilityResult:
    """
    Multiplicative independence of a tuple of rationals.

    u_1^e_1 ... u_k^e_k = +-1 exactly when (e_i) lies in the integer kernel of the
    prime-exponent matrix; a rational kernel vector scaled to coprime integers
    is such a witness. The sign coordinate (mod 2) then tells +1 from -1.
    """
    tup = tuple(_as_base(u) for u in bases)
    if not 1 <= len(tup) <= MAX_ADMISSIBLE_K:
        raise ValueError(f"admissibility expects 1 <= k <= {MAX_ADMISSIBLE_K}, got k={len(tup)}")

    _, mat = exponent_matrix(tup)
    kernel = mat.nullspace()
    if not kernel:
        return AdmissibilityResult(bases=tup, admissible=True)

    witness = _primitive_integer_vector(kernel[0])
    negatives = sum(e for e, u in zip(witness, tup) if u.numerator < 0)
    return AdmissibilityResult(
        bases=tup,
        admissible=False,
        witness=witness,
        witness_product=-1 if negatives % 2 else 1,
    )
