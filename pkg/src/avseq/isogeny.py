"""Rational isogenies: kernel polynomials, quotient curves, evaluation.

The quotient construction works entirely from the (monic, squarefree)
kernel polynomial, so kernels whose points are irrational but Galois-stable
are handled exactly.  Sums over kernel points become symmetric-function
computations:  for a monic squarefree f and polynomial A,

    sum_r A(r)/(x - r)   = g/f        with g = (A * f') mod f,
    sum_r A(r)/(x - r)^2 = (g f' - g' f)/f^2,

which yields the x-map of the quotient in closed form.  The y-map follows
from the normalized pullback of the invariant differential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import sympy

from . import curve_fp, curve_q, polyq
from .curve_q import INFINITY, CurveQ, PointQ
from .errors import (
    InputError,
    NotClosed,
    NotTorsion,
    OffCurve,
    SingularResult,
)

SUBGROUP_CLOSURE_BOUND = 4096


@dataclass(frozen=True)
class KernelSpec:
    """A finite subgroup presented by its monic kernel polynomial."""

    curve: CurveQ
    kernel_polynomial: tuple[Fraction, ...]
    order: int

    def __post_init__(self):
        poly = polyq.trim(self.kernel_polynomial)
        if polyq.is_zero(poly) or poly[-1] != 1:
            raise InputError("kernel polynomial must be monic")
        if not polyq.is_zero(polyq.deriv(poly)):
            if polyq.degree(polyq.gcd(poly, polyq.deriv(poly))) > 0:
                raise InputError("kernel polynomial must be squarefree")
        object.__setattr__(self, "kernel_polynomial", poly)

    @property
    def exponent(self) -> int:
        """Smallest N killing the subgroup (kernel poly divides psi_N)."""
        for e in sorted(_divisors(self.order)):
            if e == 1:
                if self.order == 1:
                    return 1
                continue
            psi = curve_q.division_polynomial(self.curve, e)
            _, rem = polyq.divmod_poly(psi, self.kernel_polynomial)
            if polyq.is_zero(rem):
                return e
        raise NotClosed("kernel polynomial does not divide any division polynomial")


@dataclass(frozen=True)
class Isogeny:
    domain: CurveQ
    codomain: CurveQ
    kernel: KernelSpec
    degree: int
    x_num: tuple[Fraction, ...]
    x_den: tuple[Fraction, ...]

    def __repr__(self):
        return f"Isogeny(degree={self.degree}, {self.domain} -> {self.codomain})"


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.extend([d, n // d])
        d += 1
    return sorted(set(out))


# -- kernel construction -------------------------------------------------------

def kernel_from_subgroup(E: CurveQ, generators: list[PointQ]) -> KernelSpec:
    """Kernel spec for the subgroup generated by rational torsion points."""
    for g in generators:
        if not curve_q.on_curve(E, g):
            raise OffCurve(f"generator {g} is not on the curve")
        if curve_q.torsion_order(E, g) is None:
            raise NotTorsion(f"generator {g} has infinite order")
    closure = close_subgroup(E, generators)
    xs = sorted({P.x for P in closure if not P.is_infinity})
    poly = polyq.from_roots(xs)
    return KernelSpec(E, poly, len(closure))


def close_subgroup(E: CurveQ, generators: list[PointQ],
                   bound: int = SUBGROUP_CLOSURE_BOUND) -> set[PointQ]:
    """Closure of rational points under the group law."""
    closure = {INFINITY}
    frontier = [INFINITY]
    while frontier:
        base = frontier.pop()
        for g in generators:
            nxt = curve_q.add(E, base, g)
            if nxt not in closure:
                closure.add(nxt)
                frontier.append(nxt)
                if len(closure) > bound:
                    raise NotClosed(f"subgroup closure exceeded {bound} elements")
    return closure


def kernel_from_reduced_subgroup(E: CurveQ, points: list[curve_fp.PointFp], p: int,
                                 confirm: tuple[list[curve_fp.PointFp], int] | None = None,
                                 ) -> KernelSpec:
    """Kernel spec from a subgroup given by its reduction at a good prime.

    The subgroup must be Galois-stable (it is, whenever it arises as a G_0);
    its kernel polynomial is then rational and equals the product of the
    irreducible division-polynomial factors whose roots reduce into the
    subgroup's x-set.  Passing ``confirm`` repeats the selection at a second
    prime and insists on the same answer.
    """
    poly, order = _select_factors(E, points, p)
    if confirm is not None:
        points2, p2 = confirm
        poly2, order2 = _select_factors(E, points2, p2)
        if poly2 != poly or order2 != order:
            raise NotClosed("kernel selection differs between auxiliary primes")
    return KernelSpec(E, poly, order)


def _select_factors(E: CurveQ, points, p: int):
    red = curve_fp.reduce_curve(E, p)
    pts = set(points) | {curve_fp.INFINITY_FP}
    for P in pts:
        if not curve_fp.on_curve_fp(red, P):
            raise InputError(f"{P} is not on the curve mod {p}")
    # mod-p closure check: the reduction of a subgroup is a subgroup
    for P in pts:
        for Q in pts:
            if curve_fp.add_fp(red, P, Q) not in pts:
                raise NotClosed("reduced point set is not closed under addition")
    xs = {P.x for P in pts if not P.is_infinity}
    if not xs:
        return polyq.ONE, 1
    exponent = 1
    for P in pts:
        exponent = math.lcm(exponent, curve_fp.point_order(red, P))
    psi = curve_q.division_polynomial(E, exponent)
    selected = []
    total = 0
    for f, _ in polyq.irreducible_factors(psi):
        den_lcm = math.lcm(*[c.denominator for c in f])
        if den_lcm % p == 0:
            raise InputError(f"auxiliary prime {p} divides a factor denominator")
        coeffs = [int(c * den_lcm) for c in f]
        if any(sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p == 0 for x in xs):
            selected.append(f)
            total += polyq.degree(f)
    if total != len(xs):
        raise NotClosed("subgroup x-set does not match a rational kernel polynomial")
    poly = polyq.ONE
    for f in selected:
        poly = polyq.mul(poly, f)
    return poly, len(pts)


# -- quotient construction -----------------------------------------------------

def _split_kernel(E: CurveQ, poly):
    """Split a kernel polynomial into (two-torsion part, odd part)."""
    cubic = curve_q.division_polynomial(E, 2)
    fe = polyq.gcd(poly, cubic)
    fo = polyq.divexact(poly, fe)
    return fe, polyq.monic(fo)


def velu_quotient(kernel: KernelSpec) -> Isogeny:
    """Quotient isogeny E -> E/G from a kernel spec, Velu normalization."""
    E = kernel.curve
    poly = kernel.kernel_polynomial
    fe, fo = _split_kernel(E, poly)
    deg_e, deg_o = polyq.degree(fe), polyq.degree(fo)
    degree = 1 + deg_e + 2 * deg_o
    if degree != kernel.order:
        raise InputError(
            f"kernel polynomial of type (2-torsion {deg_e}, paired {deg_o}) "
            f"is inconsistent with subgroup order {kernel.order}"
        )
    if kernel.order > 1:
        kernel.exponent  # raises NotClosed when not a division-poly divisor
        _verify_kernel_mod_primes(kernel)

    b2, b4, b6, _ = E.b_invariants()
    F = polyq.trim((b4, b2, Fraction(6)))           # 6x^2 + b2 x + b4
    B = curve_q.division_polynomial(E, 2)            # 4x^3 + b2 x^2 + 2 b4 x + b6

    po = polyq.power_sums(fo, 3) if deg_o > 0 else [Fraction(0)] * 4
    pe = polyq.power_sums(fe, 3) if deg_e > 0 else [Fraction(0)] * 4

    def sum_F(sums, k):
        return 6 * sums[2] + b2 * sums[1] + b4 * k

    def sum_xF(sums):
        return 6 * sums[3] + b2 * sums[2] + b4 * sums[1]

    def sum_B(sums, k):
        return 4 * sums[3] + b2 * sums[2] + 2 * b4 * sums[1] + b6 * k

    v = sum_F(po, deg_o) + sum_F(pe, deg_e) / 2
    w = sum_B(po, deg_o) + sum_xF(po) + sum_xF(pe) / 2

    codomain = CurveQ(E.a1, E.a2, E.a3, E.a4 - 5 * v, E.a6 - b2 * v - 7 * w)
    if codomain.discriminant() == 0:
        raise SingularResult("quotient construction produced a singular curve")

    # x-map: x + gv/fo + (gu fo' - gu' fo)/fo^2 + ge/fe over common denominator
    fo2 = polyq.mul(fo, fo)
    den = polyq.mul(fo2, fe)
    num = polyq.mul(polyq.X, den)
    if deg_o > 0:
        fop = polyq.deriv(fo)
        gv = polyq.divmod_poly(polyq.mul(F, fop), fo)[1]
        gu = polyq.divmod_poly(polyq.mul(B, fop), fo)[1]
        num = polyq.add(num, polyq.mul(gv, polyq.mul(fo, fe)))
        bracket = polyq.sub(polyq.mul(gu, fop), polyq.mul(polyq.deriv(gu), fo))
        num = polyq.add(num, polyq.mul(bracket, fe))
    if deg_e > 0:
        fep = polyq.deriv(fe)
        ge = polyq.divmod_poly(polyq.mul(polyq.scale(F, Fraction(1, 2)), fep), fe)[1]
        num = polyq.add(num, polyq.mul(ge, fo2))

    return Isogeny(E, codomain, kernel, degree, num, den)


def _verify_kernel_mod_primes(kernel: KernelSpec, count: int = 2) -> None:
    """Closure check of the kernel's point set at `count` auxiliary primes."""
    E = kernel.curve
    Ei, u = curve_q.integral_model(E)
    exponent = kernel.exponent
    poly = kernel.kernel_polynomial
    if u != 1:
        poly = polyq.monic(tuple(c * Fraction(u * u) ** (polyq.degree(poly) - i)
                                 for i, c in enumerate(poly)))
    den_lcm = 1
    for c in poly:
        den_lcm = math.lcm(den_lcm, c.denominator)
    checked = 0
    skip = 0
    while checked < count:
        p = curve_fp.find_full_torsion_prime(Ei, exponent, skip_below=skip)
        skip = p
        if den_lcm % p == 0:
            continue
        red = curve_fp.reduce_curve(Ei, p)
        roots = [x for x in range(p)
                 if sum(int(c * den_lcm) * pow(x, i, p) for i, c in enumerate(poly)) % p == 0]
        pts = {curve_fp.INFINITY_FP}
        for x in roots:
            f = (x * x % p * x + red.a2 * x * x + red.a4 * x + red.a6) % p
            # roots of y^2 + (a1x+a3)y - f: complete the square
            bq = (red.a1 * x + red.a3) % p
            disc = (bq * bq + 4 * f) % p
            sq = _sqrt_mod(disc, p)
            if sq is None:
                raise NotClosed(f"kernel root {x} mod {p} does not lift to the curve")
            inv2 = pow(2, p - 2, p)
            pts.add(curve_fp.PointFp(x, (-bq + sq) * inv2 % p))
            pts.add(curve_fp.PointFp(x, (-bq - sq) * inv2 % p))
        if len(pts) != kernel.order:
            raise NotClosed(
                f"kernel point count mod {p} is {len(pts)}, expected {kernel.order}"
            )
        for P in pts:
            for Q in pts:
                if curve_fp.add_fp(red, P, Q) not in pts:
                    raise NotClosed(f"kernel set is not closed under addition mod {p}")
        checked += 1


def _sqrt_mod(a: int, p: int) -> int | None:
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


# -- evaluation ------------------------------------------------------------------

def evaluate(iso: Isogeny, P: PointQ) -> PointQ:
    """Image of a point; kernel points map to infinity."""
    if not curve_q.on_curve(iso.domain, P):
        raise OffCurve(f"{P} is not on the isogeny domain")
    if P.is_infinity:
        return INFINITY
    x, y = P.x, P.y
    den = polyq.evaluate(iso.x_den, x)
    if den == 0:
        return INFINITY
    num = polyq.evaluate(iso.x_num, x)
    X = num / den
    nump = polyq.evaluate(polyq.deriv(iso.x_num), x)
    denp = polyq.evaluate(polyq.deriv(iso.x_den), x)
    Xp = (nump * den - num * denp) / (den * den)
    E = iso.domain
    Y = (Xp * (2 * y + E.a1 * x + E.a3) - E.a1 * X - E.a3) / 2
    image = PointQ(X, Y)
    if not curve_q.on_curve(iso.codomain, image):
        raise SingularResult("evaluation left the codomain; invalid isogeny data")
    return image


# -- Q-isomorphism testing ---------------------------------------------------------

@dataclass(frozen=True)
class CurveIsomorphism:
    """Admissible change of variables x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""

    domain: CurveQ
    codomain: CurveQ
    u: Fraction
    r: Fraction
    s: Fraction
    t: Fraction

    def apply(self, P: PointQ) -> PointQ:
        if P.is_infinity:
            return P
        xp = (P.x - self.r) / (self.u ** 2)
        yp = (P.y - self.s * (P.x - self.r) - self.t) / (self.u ** 3)
        image = PointQ(xp, yp)
        if not curve_q.on_curve(self.codomain, image):
            raise OffCurve("isomorphism applied to a point not on its domain")
        return image


def _fraction_nth_root(q: Fraction, k: int) -> Fraction | None:
    if q == 0:
        return Fraction(0)
    if q < 0:
        if k % 2 == 0:
            return None
        flip = _fraction_nth_root(-q, k)
        return None if flip is None else -flip
    num = _int_nth_root(q.numerator, k)
    den = _int_nth_root(q.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_nth_root(n: int, k: int) -> int | None:
    if n == 0:
        return 0
    if k == 2:
        r = math.isqrt(n)
        return r if r * r == n else None
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid
    return lo if lo ** k == n else None


def isomorphic_over_q(E1: CurveQ, E2: CurveQ) -> CurveIsomorphism | None:
    """A rational change of variables identifying E1 with E2, or None."""
    if E1.j_invariant() != E2.j_invariant():
        return None
    c4a, c6a = E1.c_invariants()
    c4b, c6b = E2.c_invariants()
    u2_candidates = []
    if c4a != 0 and c6a != 0:
        if c4b == 0 or c6b == 0:
            return None
        u2_candidates.append((c6a * c4b) / (c4a * c6b))
    elif c4a == 0:
        if c4b != 0:
            return None
        u2 = _fraction_nth_root(c6a / c6b, 3)
        if u2 is not None:
            u2_candidates.append(u2)
    else:  # c6a == 0
        if c6b != 0:
            return None
        u2 = _fraction_nth_root(c4a / c4b, 2)
        if u2 is not None:
            u2_candidates.append(u2)
        if u2 is not None and -u2 != u2:
            u2_candidates.append(-u2)
    for u2 in u2_candidates:
        if u2 <= 0:
            continue
        u = _fraction_nth_root(u2, 2)
        if u is None:
            continue
        for uu in (u, -u):
            iso = _solve_transform(E1, E2, uu)
            if iso is not None:
                return iso
    return None


def _solve_transform(E1: CurveQ, E2: CurveQ, u: Fraction) -> CurveIsomorphism | None:
    a1, a2, a3, a4, a6 = E1.coefficients()
    b1, b2_, b3, b4_, b6_ = E2.coefficients()
    s = (u * b1 - a1) / 2
    r = (u ** 2 * b2_ - a2 + s * a1 + s * s) / 3
    t = (u ** 3 * b3 - a3 - r * a1) / 2
    ok4 = u ** 4 * b4_ == a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t
    ok6 = u ** 6 * b6_ == a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1
    if ok4 and ok6:
        return CurveIsomorphism(E1, E2, u, r, s, t)
    return None


# -- dual composition check -----------------------------------------------------

def dual_composition_is_multiplication(iso: Isogeny, sample_points: list[PointQ]) -> bool:
    """Check (dual . iso) = [degree] on sample points.

    The dual is materialized transiently: its kernel is the image of the
    degree-torsion, obtained as a resultant pushforward of the division
    polynomial through the x-map, followed by a quotient and a rational
    isomorphism back to the domain.
    """
    n = iso.degree
    E = iso.domain
    if n == 1:
        return all(evaluate(iso, P) == P for P in sample_points)
    x, T = sympy.symbols("x T")
    psi = polyq.to_sympy(curve_q.division_polynomial(E, n)).as_expr()
    num = polyq.to_sympy(iso.x_num).as_expr()
    den = polyq.to_sympy(iso.x_den).as_expr()
    res = sympy.resultant(psi, num - T * den, x)
    poly_T = sympy.Poly(res, T)
    if poly_T.degree() == 0:
        return False
    dual_poly = polyq.squarefree_part(polyq.from_sympy(poly_T))
    dual_kernel = KernelSpec(iso.codomain, dual_poly,
                             1 + _kernel_point_count(iso.codomain, dual_poly))
    dual = velu_quotient(dual_kernel)
    back = isomorphic_over_q(dual.codomain, E)
    if back is None:
        return False
    sign = 0
    for P in sample_points:
        expected = curve_q.scalar_mul(E, n, P)
        got = back.apply(evaluate(dual, evaluate(iso, P)))
        if sign == 0:
            if got == expected:
                sign = 1
            elif got == curve_q.neg(E, expected):
                sign = -1
            elif expected.is_infinity:
                continue
            else:
                return False
        else:
            want = expected if sign == 1 else curve_q.neg(E, expected)
            if got != want:
                return False
    return True


def _kernel_point_count(E: CurveQ, poly) -> int:
    """Number of affine points over the x-roots of a kernel polynomial."""
    fe, fo = _split_kernel(E, poly)
    return polyq.degree(fe) + 2 * polyq.degree(fo)
