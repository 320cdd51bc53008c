"""Elliptic curves over prime fields F_p (p odd).

Reduction of rational data, point orders, N-torsion enumeration.  Single
point arithmetic is plain Python; whole-group enumeration is delegated to
the fp_kernels module (numba or numpy, chosen there).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import fp_kernels
from .arith import factor, is_prime
from .curve_q import CurveQ, PointQ
from .errors import (
    BadReductionPrime,
    InputError,
    NoQualifyingPrime,
    NonIntegralModel,
    PrimeTooLarge,
)

DEFAULT_ENUMERATION_BOUND = 10 ** 6
DEFAULT_AUX_PRIME_BOUND = 10 ** 5


@dataclass(frozen=True)
class CurveFp:
    p: int
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __init__(self, p, a1, a2, a3, a4, a6):
        if p == 2 or not is_prime(p):
            raise BadReductionPrime(f"modulus {p} must be an odd prime")
        object.__setattr__(self, "p", int(p))
        for name, v in zip(("a1", "a2", "a3", "a4", "a6"), (a1, a2, a3, a4, a6)):
            object.__setattr__(self, name, int(v) % p)
        if self.discriminant() == 0:
            raise BadReductionPrime(f"curve is singular mod {p}")

    def discriminant(self) -> int:
        p = self.p
        b2 = (self.a1 * self.a1 + 4 * self.a2) % p
        b4 = (2 * self.a4 + self.a1 * self.a3) % p
        b6 = (self.a3 * self.a3 + 4 * self.a6) % p
        b8 = (self.a1 * self.a1 % p * self.a6 + 4 * self.a2 * self.a6
              - self.a1 * self.a3 % p * self.a4 + self.a2 * self.a3 % p * self.a3
              - self.a4 * self.a4) % p
        return (-b2 * b2 % p * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 % p * b6) % p

    def cubic_form(self) -> tuple[int, int, int]:
        """Coefficients (A, B, C) of the completed square y^2 = x^3 + Ax^2 + Bx + C."""
        p = self.p
        inv2 = pow(2, p - 2, p)
        inv4 = inv2 * inv2 % p
        b2 = (self.a1 * self.a1 + 4 * self.a2) % p
        b4 = (2 * self.a4 + self.a1 * self.a3) % p
        b6 = (self.a3 * self.a3 + 4 * self.a6) % p
        return b2 * inv4 % p, b4 * inv2 % p, b6 * inv4 % p

    def from_cubic_y(self, x: int, y_cubic: int) -> int:
        """Translate a y-coordinate on the completed square back to this model."""
        p = self.p
        inv2 = pow(2, p - 2, p)
        return (y_cubic - (self.a1 * x + self.a3) * inv2) % p


@dataclass(frozen=True)
class PointFp:
    x: int | None
    y: int | None

    def __init__(self, x=None, y=None):
        if (x is None) != (y is None):
            raise InputError("affine points need both coordinates")
        object.__setattr__(self, "x", None if x is None else int(x))
        object.__setattr__(self, "y", None if y is None else int(y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


INFINITY_FP = PointFp()


def on_curve_fp(E: CurveFp, P: PointFp) -> bool:
    if P.is_infinity:
        return True
    p, x, y = E.p, P.x, P.y
    lhs = (y * y + E.a1 * x * y + E.a3 * y) % p
    rhs = (x * x % p * x + E.a2 * x * x + E.a4 * x + E.a6) % p
    return lhs == rhs


def neg_fp(E: CurveFp, P: PointFp) -> PointFp:
    if P.is_infinity:
        return P
    return PointFp(P.x, (-P.y - E.a1 * P.x - E.a3) % E.p)


def add_fp(E: CurveFp, P: PointFp, Q: PointFp) -> PointFp:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    p = E.p
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if (y1 + y2 + E.a1 * x2 + E.a3) % p == 0:
            return INFINITY_FP
        den = (2 * y1 + E.a1 * x1 + E.a3) % p
        lam = (3 * x1 * x1 + 2 * E.a2 * x1 + E.a4 - E.a1 * y1) * pow(den, p - 2, p) % p
        nu = (-(x1 ** 3) + E.a4 * x1 + 2 * E.a6 - E.a3 * y1) * pow(den, p - 2, p) % p
    else:
        inv = pow((x2 - x1) % p, p - 2, p)
        lam = (y2 - y1) * inv % p
        nu = (y1 * x2 - y2 * x1) * inv % p
    x3 = (lam * lam + E.a1 * lam - E.a2 - x1 - x2) % p
    y3 = (-(lam + E.a1) * x3 - nu - E.a3) % p
    return PointFp(x3, y3)


def scalar_mul_fp(E: CurveFp, n: int, P: PointFp) -> PointFp:
    if n < 0:
        return scalar_mul_fp(E, -n, neg_fp(E, P))
    result = INFINITY_FP
    base = P
    while n:
        if n & 1:
            result = add_fp(E, result, base)
        base = add_fp(E, base, base)
        n >>= 1
    return result


# -- reduction of rational data ----------------------------------------------

def reduce_curve(E: CurveQ, p: int) -> CurveFp:
    """Reduce an integral model at a good odd prime."""
    if not E.is_integral():
        raise NonIntegralModel("reduction needs an integral model")
    if p == 2 or not is_prime(p):
        raise BadReductionPrime(f"{p} is not an odd prime")
    if int(E.discriminant()) % p == 0:
        raise BadReductionPrime(f"{p} divides the discriminant")
    return CurveFp(p, int(E.a1), int(E.a2), int(E.a3), int(E.a4), int(E.a6))


def reduce_point(E: CurveQ, P: PointQ, p: int) -> PointFp:
    """Coordinatewise reduction; points with p in the denominator go to infinity."""
    reduce_curve(E, p)  # validates model and prime
    if P.is_infinity:
        return INFINITY_FP
    if P.x.denominator % p == 0:
        return INFINITY_FP
    if P.y.denominator % p == 0:
        raise BadReductionPrime(
            f"inconsistent denominators at {p}: x is p-integral but y is not"
        )
    x = P.x.numerator * pow(P.x.denominator, p - 2, p) % p
    y = P.y.numerator * pow(P.y.denominator, p - 2, p) % p
    return PointFp(x, y)


def is_zero_mod(E: CurveQ, P: PointQ, n: int, p: int) -> bool:
    """True iff n * (P mod p) is the identity; computed by modular double-and-add."""
    red = reduce_curve(E, p)
    Pbar = reduce_point(E, P, p)
    return scalar_mul_fp(red, n, Pbar).is_infinity


# -- group-scale operations ---------------------------------------------------

@lru_cache(maxsize=512)
def group_order(E: CurveFp, max_p: int = DEFAULT_ENUMERATION_BOUND) -> int:
    """#E(F_p) by quadratic-character summation."""
    if E.p > max_p:
        raise PrimeTooLarge(f"p = {E.p} exceeds enumeration bound {max_p}")
    A, B, C = E.cubic_form()
    return int(fp_kernels.order_count(E.p, A, B, C))


def point_order(E: CurveFp, P: PointFp, max_p: int = DEFAULT_ENUMERATION_BOUND) -> int:
    """Exact order of a point in E(F_p)."""
    if not on_curve_fp(E, P):
        raise InputError(f"{P} is not on the reduced curve")
    if P.is_infinity:
        return 1
    order = group_order(E, max_p=max_p)
    for q, _ in factor(order).factors:
        while order % q == 0 and scalar_mul_fp(E, order // q, P).is_infinity:
            order //= q
    return order


def all_points(E: CurveFp, max_p: int = DEFAULT_ENUMERATION_BOUND) -> list[PointFp]:
    """Every point of E(F_p), infinity first."""
    if E.p > max_p:
        raise PrimeTooLarge(f"p = {E.p} exceeds enumeration bound {max_p}")
    A, B, C = E.cubic_form()
    xs, ys = fp_kernels.all_points(E.p, A, B, C)
    pts = [INFINITY_FP]
    pts.extend(PointFp(int(x), E.from_cubic_y(int(x), int(y))) for x, y in zip(xs, ys))
    return pts


def torsion_points(E: CurveFp, N: int, max_p: int = DEFAULT_ENUMERATION_BOUND) -> list[PointFp]:
    """All points killed by N, found by filtering the enumerated group."""
    if N < 1:
        raise InputError("torsion_points needs N >= 1")
    if N % E.p == 0:
        raise InputError(f"N = {N} must be coprime to p = {E.p}")
    if E.p > max_p:
        raise PrimeTooLarge(f"p = {E.p} exceeds enumeration bound {max_p}")
    if N == 1:
        return [INFINITY_FP]
    A, B, C = E.cubic_form()
    xs, ys = fp_kernels.all_points(E.p, A, B, C)
    mask = fp_kernels.killed_by(E.p, A, B, C, N, xs, ys)
    pts = [INFINITY_FP]
    pts.extend(
        PointFp(int(x), E.from_cubic_y(int(x), int(y)))
        for x, y, keep in zip(xs, ys, mask)
        if keep
    )
    return pts


def find_full_torsion_prime(E: CurveQ, N: int, bound: int = DEFAULT_AUX_PRIME_BOUND,
                            skip_below: int = 0) -> int:
    """Smallest good odd prime p <= bound with E(F_p) containing full N-torsion.

    Verified by counting: the N-torsion subgroup must have exactly N^2
    points.  skip_below lets callers ask for a second or third witness.
    """
    if N < 1:
        raise InputError("find_full_torsion_prime needs N >= 1")
    if not E.is_integral():
        raise NonIntegralModel("auxiliary prime search needs an integral model")
    disc = abs(int(E.discriminant()))
    p = max(2, skip_below)
    while p < bound:
        p = _next_prime(p)
        if p > bound:
            break
        if p == 2 or disc % p == 0 or N % p == 0:
            continue
        if N > 2 and p % N != 1:
            # full N-torsion forces the N-th roots of unity into F_p
            continue
        red = CurveFp(p, int(E.a1), int(E.a2), int(E.a3), int(E.a4), int(E.a6))
        if group_order(red) % (N * N) != 0:
            continue
        if len(torsion_points(red, N)) == N * N:
            return p
    raise NoQualifyingPrime(
        f"no prime <= {bound} carries full rational {N}-torsion for this curve"
    )


def _next_prime(n: int) -> int:
    k = n + 1
    while not is_prime(k):
        k += 1
    return k
