"""Elliptic curves over the rationals in long Weierstrass form.

Curves are y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6 with exact
Fraction coefficients.  Points are affine pairs or the distinguished
point at infinity; all group-law arithmetic is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import polyq
from .arith import PrimeSet, factor, is_prime
from .errors import (
    InputError,
    NonIntegralModel,
    OffCurve,
    TorsionInput,
    TorsionVanish,
)

Frac = Fraction


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class CurveQ:
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __init__(self, a1, a2, a3, a4, a6):
        for name, v in zip(("a1", "a2", "a3", "a4", "a6"), (a1, a2, a3, a4, a6)):
            object.__setattr__(self, name, _frac(v))
        if self.discriminant() == 0:
            raise InputError("singular Weierstrass equation (discriminant zero)")

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c_invariants(self):
        b2, b4, b6, _ = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants()
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def j_invariant(self) -> Fraction:
        c4, _ = self.c_invariants()
        return c4 ** 3 / self.discriminant()

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in (self.a1, self.a2, self.a3, self.a4, self.a6))

    def coefficients(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def __repr__(self):
        return f"CurveQ({self.a1}, {self.a2}, {self.a3}, {self.a4}, {self.a6})"


@dataclass(frozen=True)
class PointQ:
    x: Fraction | None
    y: Fraction | None

    def __init__(self, x=None, y=None):
        if (x is None) != (y is None):
            raise InputError("affine points need both coordinates")
        object.__setattr__(self, "x", None if x is None else _frac(x))
        object.__setattr__(self, "y", None if y is None else _frac(y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


INFINITY = PointQ()


def point(x, y) -> PointQ:
    return PointQ(x, y)


def on_curve(E: CurveQ, P: PointQ) -> bool:
    if P.is_infinity:
        return True
    x, y = P.x, P.y
    return y * y + E.a1 * x * y + E.a3 * y == x ** 3 + E.a2 * x * x + E.a4 * x + E.a6


def _require_on_curve(E: CurveQ, P: PointQ) -> None:
    if not on_curve(E, P):
        raise OffCurve(f"{P} is not on {E}")


def neg(E: CurveQ, P: PointQ) -> PointQ:
    if P.is_infinity:
        return P
    return PointQ(P.x, -P.y - E.a1 * P.x - E.a3)


def add(E: CurveQ, P: PointQ, Q: PointQ) -> PointQ:
    """Group law; infinity is the identity."""
    _require_on_curve(E, P)
    _require_on_curve(E, Q)
    return _add_unchecked(E, P, Q)


def _add_unchecked(E: CurveQ, P: PointQ, Q: PointQ) -> PointQ:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    a1, a2, a3, a4, a6 = E.coefficients()
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return INFINITY
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
        nu = (-(x1 ** 3) + a4 * x1 + 2 * a6 - a3 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return PointQ(x3, y3)


def scalar_mul(E: CurveQ, n: int, P: PointQ) -> PointQ:
    """n*P by double-and-add; negative n negates."""
    _require_on_curve(E, P)
    if n < 0:
        return scalar_mul(E, -n, neg(E, P))
    result = INFINITY
    base = P
    while n:
        if n & 1:
            result = _add_unchecked(E, result, base)
        base = _add_unchecked(E, base, base)
        n >>= 1
    return result


def integral_model(E: CurveQ) -> tuple[CurveQ, int]:
    """Scale to integer coefficients with the smallest admissible u.

    Returns (E', u) where E' has coefficients u^i * a_i and rational points
    map by (x, y) -> (u^2 x, u^3 y).  u = 1 when E is already integral.
    """
    weights = (1, 2, 3, 4, 6)
    exponents: dict[int, int] = {}
    for w, c in zip(weights, E.coefficients()):
        den = c.denominator
        if den == 1:
            continue
        for p, e in factor(den).factors:
            need = -(-e // w)  # ceil(e / w)
            exponents[p] = max(exponents.get(p, 0), need)
    u = 1
    for p, e in exponents.items():
        u *= p ** e
    if u == 1:
        return E, 1
    a1, a2, a3, a4, a6 = E.coefficients()
    return CurveQ(a1 * u, a2 * u ** 2, a3 * u ** 3, a4 * u ** 4, a6 * u ** 6), u


def map_to_integral(P: PointQ, u: int) -> PointQ:
    if P.is_infinity or u == 1:
        return P
    return PointQ(P.x * u * u, P.y * u ** 3)


def bad_primes(E: CurveQ, budget: int | None = None, cache=None) -> PrimeSet:
    """Primes dividing the discriminant of the given integral model."""
    if not E.is_integral():
        raise NonIntegralModel("clear denominators before asking for bad primes")
    disc = int(E.discriminant())
    kwargs = {} if budget is None else {"budget": budget}
    return PrimeSet(factor(abs(disc), cache=cache, **kwargs).primes())


# -- division polynomials ----------------------------------------------------
#
# psi_n is stored through its x-part: psi[n] for odd n is the full
# polynomial, for even n it is psi_n / (2y + a1 x + a3).  The square of the
# y-factor is the cubic B = 4x^3 + b2 x^2 + 2 b4 x + b6.

_psi_cache: dict[CurveQ, list] = {}


def _two_torsion_cubic(E: CurveQ):
    b2, b4, b6, _ = E.b_invariants()
    return polyq.trim((b6, 2 * b4, b2, Frac(4)))


def _psi_parts(E: CurveQ, n: int) -> list:
    parts = _psi_cache.setdefault(E, [])
    if not parts:
        b2, b4, b6, b8 = E.b_invariants()
        psi3 = polyq.trim((b8, 3 * b6, 3 * b4, b2, Frac(3)))
        psi4 = polyq.trim((
            b4 * b8 - b6 * b6,
            b2 * b8 - b4 * b6,
            10 * b8,
            10 * b6,
            5 * b4,
            b2,
            Frac(2),
        ))
        parts.extend([polyq.ZERO, polyq.ONE, polyq.ONE, psi3, psi4])
    B = _two_torsion_cubic(E)
    B2 = polyq.mul(B, B)
    while len(parts) <= n:
        k = len(parts)
        m = k // 2
        if k % 2 == 1:
            first = polyq.mul(parts[m + 2], polyq.pow_poly(parts[m], 3))
            second = polyq.mul(parts[m - 1], polyq.pow_poly(parts[m + 1], 3))
            if m % 2 == 0:
                parts.append(polyq.sub(polyq.mul(first, B2), second))
            else:
                parts.append(polyq.sub(first, polyq.mul(second, B2)))
        else:
            bracket = polyq.sub(
                polyq.mul(parts[m + 2], polyq.mul(parts[m - 1], parts[m - 1])),
                polyq.mul(parts[m - 2], polyq.mul(parts[m + 1], parts[m + 1])),
            )
            parts.append(polyq.mul(parts[m], bracket))
    return parts


def division_polynomial(E: CurveQ, n: int):
    """Univariate division polynomial.

    Roots are exactly the x-coordinates of the nonzero n-torsion.  For even
    n the y-factor is folded in as the two-torsion cubic, so psi_2 is
    4x^3 + b2 x^2 + 2 b4 x + b6.
    """
    if n < 1:
        raise InputError("division_polynomial needs n >= 1")
    parts = _psi_parts(E, n)
    if n % 2 == 1:
        return parts[n]
    return polyq.mul(parts[n], _two_torsion_cubic(E))


def mult_by_n_x(E: CurveQ, n: int):
    """The x-coordinate map of multiplication by n as (numerator, denominator)."""
    if n < 1:
        raise InputError("mult_by_n_x needs n >= 1")
    parts = _psi_parts(E, n + 1)
    B = _two_torsion_cubic(E)
    sq = polyq.mul(parts[n], parts[n])
    cross = polyq.mul(parts[n + 1], parts[n - 1])
    if n % 2 == 0:
        den = polyq.mul(sq, B)
    else:
        den = sq
        cross = polyq.mul(cross, B)
    num = polyq.sub(polyq.mul(polyq.X, den), cross)
    return num, den


def two_torsion(E: CurveQ) -> list[PointQ]:
    """All rational points killed by 2, infinity included."""
    points = [INFINITY]
    for x0 in polyq.rational_roots(_two_torsion_cubic(E)):
        y0 = -(E.a1 * x0 + E.a3) / 2
        points.append(PointQ(x0, y0))
    points.sort(key=_point_sort_key)
    return points


def _point_sort_key(P: PointQ):
    if P.is_infinity:
        return (0, 0, 0)
    return (1, P.x, P.y)


def denominator_ideal(E: CurveQ, P: PointQ, n: int) -> int:
    """Denominator of x(nP) in lowest terms (a perfect square at good primes)."""
    if not E.is_integral():
        raise NonIntegralModel("denominator ideals are defined for integral models")
    _require_on_curve(E, P)
    R = scalar_mul(E, n, P)
    if R.is_infinity:
        raise TorsionVanish(f"{n}P is the identity")
    return R.x.denominator


def _fraction_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def lift_x(E: CurveQ, x0) -> list[PointQ]:
    """Rational points of E with the given x-coordinate."""
    x0 = _frac(x0)
    a1, a2, a3, a4, a6 = E.coefficients()
    # y^2 + (a1 x + a3) y - (x^3 + a2 x^2 + a4 x + a6) = 0
    b = a1 * x0 + a3
    c = -(x0 ** 3 + a2 * x0 * x0 + a4 * x0 + a6)
    disc = b * b - 4 * c
    root = _fraction_sqrt(disc)
    if root is None:
        return []
    ys = {(-b + root) / 2, (-b - root) / 2}
    return [PointQ(x0, y0) for y0 in sorted(ys)]


def preimage_points(E: CurveQ, m: int, P: PointQ) -> list[PointQ]:
    """All rational R with m*R = P (possibly empty)."""
    if m < 1:
        raise InputError("preimage_points needs m >= 1")
    _require_on_curve(E, P)
    if m == 1:
        return [P]
    found = []
    if P.is_infinity:
        found.append(INFINITY)
        xs = polyq.rational_roots(division_polynomial(E, m))
    else:
        num, den = mult_by_n_x(E, m)
        target = polyq.sub(num, polyq.scale(den, P.x))
        xs = polyq.rational_roots(target)
    for x0 in xs:
        for R in lift_x(E, x0):
            if scalar_mul(E, m, R) == P:
                found.append(R)
    out = sorted(set(found), key=_point_sort_key)
    return out


# -- torsion and heights -----------------------------------------------------

def _good_odd_primes(E: CurveQ, count: int, minimum: int = 5):
    disc = abs(int(E.discriminant()))
    out = []
    p = minimum - 1
    while len(out) < count:
        p += 1
        if p < 3 or disc % p == 0:
            continue
        if is_prime(p):
            out.append(p)
    return out


def torsion_order(E: CurveQ, P: PointQ) -> int | None:
    """Exact order of a torsion point, or None for non-torsion.

    The order is bounded by the gcd of the point orders under reduction at
    the two smallest good primes > 3, then confirmed by exact scalar
    multiplication.
    """
    from . import curve_fp

    _require_on_curve(E, P)
    if P.is_infinity:
        return 1
    Ei, u = integral_model(E)
    Pi = map_to_integral(P, u)
    bound = 0
    for p in _good_odd_primes(Ei, 2):
        red = curve_fp.reduce_curve(Ei, p)
        Pbar = curve_fp.reduce_point(Ei, Pi, p)
        bound = math.gcd(bound, curve_fp.point_order(red, Pbar))
    for d in sorted(_divisors(bound)):
        if d > 1 and scalar_mul(Ei, d, Pi).is_infinity:
            return d
    return None


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def rational_torsion_points(E: CurveQ) -> list[PointQ]:
    """The full rational torsion subgroup, infinity included."""
    Ei, u = integral_model(E)
    bound = 0
    from . import curve_fp
    for p in _good_odd_primes(Ei, 2):
        bound = math.gcd(bound, curve_fp.group_order(curve_fp.reduce_curve(Ei, p)))
    points = {INFINITY}
    for d in _divisors(bound):
        if d < 2:
            continue
        for x0 in polyq.rational_roots(division_polynomial(Ei, d)):
            for R in lift_x(Ei, x0):
                if scalar_mul(Ei, d, R).is_infinity:
                    points.add(R)
    if u != 1:
        uu = Fraction(1, u)
        points = {
            P if P.is_infinity else PointQ(P.x * uu * uu, P.y * uu ** 3)
            for P in points
        }
    return sorted(points, key=_point_sort_key)


def _naive_x_height(P: PointQ) -> float:
    x = P.x
    return math.log(max(abs(x.numerator), x.denominator, 1))


def height_sequence(E: CurveQ, P: PointQ, doublings: int = 5) -> list[float]:
    seq = []
    R = P
    for k in range(doublings + 1):
        if R.is_infinity:
            raise TorsionInput("height estimation needs a non-torsion point")
        seq.append(_naive_x_height(R) / 4 ** k)
        R = _add_unchecked(E, R, R)
    return seq


def height_estimate(E: CurveQ, P: PointQ) -> float:
    """Canonical-height approximation h(x(2^k P)) / 4^k with k = 5."""
    _require_on_curve(E, P)
    if torsion_order(E, P) is not None:
        raise TorsionInput("height estimation needs a non-torsion point")
    return height_sequence(E, P)[-1]
