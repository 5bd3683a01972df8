# src/numtheory/errors.py
from __future__ import annotations


class NotInvertible(ArithmeticError):
    """The base does not reduce to a unit modulo p (p divides numerator or denominator)."""


class DlogFailure(ArithmeticError):
    pass


class IndexNotDividing(ValueError):
    def __init__(self, d: int, p: int) -> None:
        super().__init__(f"index d={d} does not divide p-1={p - 1}")
        self.d = d
        self.p = p


class InadmissibleTuple(ValueError):
    def __init__(self, bases, witness, witness_product: int) -> None:
        names = ", ".join(str(b) for b in bases)
        super().__init__(
            f"bases ({names}) are multiplicatively dependent: "
            f"exponents {tuple(witness)} give product {witness_product:+d}"
        )
        self.witness = tuple(witness)
        self.witness_product = witness_product


class IdentityViolation(ArithmeticError):
    """A hard identity or provable bound failed; the computation cannot be trusted."""
