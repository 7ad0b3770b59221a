"""Wigner 3j symbols in exact big-integer arithmetic.

The Racah single-sum formula alternates in sign and cancels catastrophically
in floating point, so the sum and all factorials are carried as exact
rationals; the only rounding happens in one final square root.  Selection
failures (order sum, triangle) return exact 0.0.  Integer degrees only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = ["ThreeJArgs", "triangle_ok", "wigner3j", "threej_zero_row",
           "column_swap_sign"]

_fact = math.factorial


@dataclass(frozen=True)
class ThreeJArgs:
    """Arguments (j1 j2 j3; m1 m2 m3) with |m_i| <= j_i enforced."""

    j1: int
    j2: int
    j3: int
    m1: int
    m2: int
    m3: int

    def __post_init__(self) -> None:
        for j, m in ((self.j1, self.m1), (self.j2, self.m2),
                     (self.j3, self.m3)):
            if j < 0:
                raise ValueError(f"degrees must be nonnegative, got {j}")
            if abs(m) > j:
                raise ValueError(f"|order| {abs(m)} exceeds degree {j}")


def triangle_ok(j1: int, j2: int, j3: int) -> bool:
    """True iff each degree is at most the sum of the other two."""
    return j1 <= j2 + j3 and j2 <= j3 + j1 and j3 <= j1 + j2


def _sqrt_fraction(fr: Fraction) -> float:
    """Correctly-rounded-to-a-few-ulp float sqrt of a nonnegative rational.

    sqrt(p/q) = sqrt(p*q)/q; isqrt with 128 guard bits keeps the integer
    square root far below float64 resolution, and Fraction.__float__ does
    the final correctly rounded division.
    """
    p, q = fr.numerator, fr.denominator
    if p == 0:
        return 0.0
    if p < 0:
        raise ValueError("square root of negative rational")
    r = math.isqrt((p * q) << 128)
    return float(Fraction(r, q << 64))


@lru_cache(maxsize=None)
def _threej(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if not triangle_ok(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    s_min = max(0, j2 - j3 - m1, j1 + m2 - j3)
    s_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for s in range(s_min, s_max + 1):
        denom = (_fact(s) * _fact(j1 + j2 - j3 - s) * _fact(j1 - m1 - s)
                 * _fact(j2 + m2 - s) * _fact(j3 - j2 + m1 + s)
                 * _fact(j3 - j1 - m2 + s))
        total += Fraction(-1 if s & 1 else 1, denom)
    if total == 0:
        return 0.0
    ratio = (Fraction(_fact(j1 + j2 - j3) * _fact(j1 - j2 + j3)
                      * _fact(-j1 + j2 + j3), _fact(j1 + j2 + j3 + 1))
             * _fact(j1 + m1) * _fact(j1 - m1)
             * _fact(j2 + m2) * _fact(j2 - m2)
             * _fact(j3 + m3) * _fact(j3 - m3))
    sign = -1.0 if (j1 - j2 - m3) & 1 else 1.0
    if total < 0:
        sign = -sign
    # |value| = |total| * sqrt(ratio); square the rational part so the
    # whole magnitude passes through one exact-rational square root
    return sign * _sqrt_fraction(total * total * ratio)


def wigner3j(args: ThreeJArgs) -> float:
    """General 3j symbol; exact 0.0 on any selection-rule failure."""
    return _threej(args.j1, args.j2, args.j3, args.m1, args.m2, args.m3)


@lru_cache(maxsize=None)
def threej_zero_row(j1: int, j2: int, j3: int) -> float:
    """(j1 j2 j3; 0 0 0) by the closed factorial product formula.

    Exact 0.0 when j1+j2+j3 is odd.  Requires the triangle conditions.
    """
    if not triangle_ok(j1, j2, j3):
        raise ValueError(f"triangle conditions fail for ({j1},{j2},{j3})")
    J = j1 + j2 + j3
    if J & 1:
        return 0.0
    g = J // 2
    coeff = Fraction(_fact(g), _fact(g - j1) * _fact(g - j2) * _fact(g - j3))
    ratio = Fraction(_fact(J - 2 * j1) * _fact(J - 2 * j2) * _fact(J - 2 * j3),
                     _fact(J + 1))
    sign = -1.0 if g & 1 else 1.0
    return sign * _sqrt_fraction(coeff * coeff * ratio)


def column_swap_sign(j1: int, j2: int, j3: int) -> int:
    """Sign (-1)^(j1+j2+j3) picked up when two columns are exchanged."""
    return -1 if (j1 + j2 + j3) & 1 else 1
