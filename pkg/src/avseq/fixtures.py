"""Bundled demonstration fixtures for the `reproduce` command and selftest."""

from __future__ import annotations

from .arith import PrimeSet
from .curve_q import CurveQ, add, point
from .seqlib import QuotientAVSpec

# Fixture ex31: base curve y^2 = x(x-1)(x+9), quotient of its square by the
# order-4 graph subgroup of the rational 2-torsion that swaps (1,0) and
# (-9,0); the lifted point is the diagonal (9,-36).  Reference sequence for
# S = {2}: 1, 1, 7*17*41, 13*29*101, 103*113*1087*2377,
# 7*11*17*41*89*2713*8329, 23*23497*156671*48883577521.
EX31_RANGE = (1, 7)
EX31_DEFAULT_S = (2,)


def ex31_spec() -> QuotientAVSpec:
    E = CurveQ(0, 8, 0, -9, 0)
    q = point(9, -36)
    t0, t1, t9 = point(0, 0), point(1, 0), point(-9, 0)
    return QuotientAVSpec(E, 2, [(t0, t0), (t1, t9)], (q, q))


# Fixture ex35: base curve y^2 = x^3 - 21x - 20 (model chosen so that the
# bundled points (-3,4), (-1,0), (5,0) all satisfy the equation; its bad
# primes are exactly {2,3}).  H is generated by the three paired 2-torsion
# tuples, the lift is (U'+T1, U') for the non-torsion U' = (-3,4).
EX35_RANGE = (1, 6)
EX35_DEFAULT_S = (2, 3)


def ex35_spec() -> QuotientAVSpec:
    E = CurveQ(0, 0, 0, -21, -20)
    u = point(-3, 4)
    t1, t2 = point(-1, 0), point(5, 0)
    return QuotientAVSpec(E, 2, [(t1, t1), (t2, t2), (t1, t2)], (add(E, u, t1), u))


def ex35_elliptic_point():
    """The point 2U' whose elliptic sequence matches the even-index terms."""
    E = CurveQ(0, 0, 0, -21, -20)
    from .curve_q import scalar_mul
    return E, scalar_mul(E, 2, point(-3, 4))


FIXTURES = {
    "ex31": (ex31_spec, EX31_RANGE, EX31_DEFAULT_S),
    "ex35": (ex35_spec, EX35_RANGE, EX35_DEFAULT_S),
}


# Reference radicals used by `selftest` (indexed from n = 1).
EX31_EXPECTED = [1, 1, 7 * 17 * 41, 13 * 29 * 101, 103 * 113 * 1087 * 2377,
                 7 * 11 * 17 * 41 * 89 * 2713 * 8329,
                 23 * 23497 * 156671 * 48883577521]
EX35_EXPECTED = [1, 5 * 11 * 13, 1, 5 * 11 * 13 * 67 * 197 * 19249 * 21649, 1,
                 5 * 7 * 11 * 13 * 17 * 19 * 23 * 191 * 251 * 263 * 311
                 * 16103 * 1786451 * 385044001]


def default_s(name: str) -> PrimeSet:
    return PrimeSet(FIXTURES[name][2])
