"""Dense univariate polynomials over the rationals.

Polynomials are tuples of Fraction coefficients, constant term first
(the same convention used for kernel-polynomial serialization).  Heavy
lifting that needs real algebra (factorization into irreducibles,
resultants) is delegated to sympy.
"""

from __future__ import annotations

from fractions import Fraction

import sympy

ZERO: tuple[Fraction, ...] = ()
ONE: tuple[Fraction, ...] = (Fraction(1),)
X: tuple[Fraction, ...] = (Fraction(0), Fraction(1))

_x = sympy.Symbol("x")


def trim(p) -> tuple[Fraction, ...]:
    p = tuple(Fraction(c) for c in p)
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def degree(p) -> int:
    """Degree with deg(0) = -1."""
    return len(p) - 1


def is_zero(p) -> bool:
    return len(p) == 0


def add(p, q):
    n = max(len(p), len(q))
    return trim(
        tuple((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))
    )


def neg(p):
    return tuple(-c for c in p)


def sub(p, q):
    return add(p, neg(q))


def scale(p, c):
    c = Fraction(c)
    if c == 0:
        return ZERO
    return tuple(ci * c for ci in p)


def mul(p, q):
    if not p or not q:
        return ZERO
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def mul_x_shift(p, k: int):
    """Multiply by x**k."""
    if not p:
        return ZERO
    return (Fraction(0),) * k + tuple(p)


def divmod_poly(p, q):
    """Exact rational division with remainder; q must be nonzero."""
    if is_zero(q):
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quot = [Fraction(0)] * max(0, len(p) - len(q) + 1)
    dq = degree(q)
    lead = q[-1]
    for i in range(len(rem) - 1, dq - 1, -1):
        coeff = rem[i] / lead
        if coeff == 0:
            continue
        quot[i - dq] = coeff
        for j in range(dq + 1):
            rem[i - dq + j] -= coeff * q[j]
    return trim(quot), trim(rem)


def divexact(p, q):
    quot, rem = divmod_poly(p, q)
    if not is_zero(rem):
        raise ValueError("polynomial division is not exact")
    return quot


def monic(p):
    if is_zero(p):
        return ZERO
    return tuple(c / p[-1] for c in p)


def gcd(p, q):
    """Monic gcd via the Euclidean algorithm."""
    a, b = trim(p), trim(q)
    while not is_zero(b):
        _, r = divmod_poly(a, b)
        a, b = b, r
    return monic(a)


def deriv(p):
    return trim(tuple(p[i] * i for i in range(1, len(p))))


def evaluate(p, x0):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x0 + c
    return acc


def from_roots(roots):
    out = ONE
    for r in roots:
        out = mul(out, (-Fraction(r), Fraction(1)))
    return out


def pow_poly(p, k: int):
    out = ONE
    for _ in range(k):
        out = mul(out, p)
    return out


def power_sums(p, upto: int) -> list[Fraction]:
    """Newton power sums p_0..p_upto of the roots of a monic polynomial."""
    p = monic(p)
    k = degree(p)
    # elementary symmetric e_i with sign handling: p = x^k - e1 x^(k-1) + e2 ...
    e = [Fraction(0)] * (upto + 1)
    for i in range(1, upto + 1):
        if i <= k:
            e[i] = Fraction((-1) ** i) * p[k - i]
    sums = [Fraction(k)]
    for i in range(1, upto + 1):
        s = Fraction(0)
        for j in range(1, i):
            s += Fraction((-1) ** (j - 1)) * e[j] * sums[i - j]
        s += Fraction((-1) ** (i - 1)) * e[i] * i
        sums.append(s)
    return sums


def to_sympy(p) -> sympy.Poly:
    if is_zero(p):
        return sympy.Poly(0, _x, domain="QQ")
    return sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in p])),
                      _x, domain="QQ")


def from_sympy(sp) -> tuple[Fraction, ...]:
    coeffs = sp.all_coeffs()  # highest first
    return trim(tuple(Fraction(c.p, c.q) for c in reversed(coeffs)))


def irreducible_factors(p) -> list[tuple[tuple[Fraction, ...], int]]:
    """Monic irreducible factors over Q with multiplicities."""
    _, factors = to_sympy(p).factor_list()
    return [(monic(from_sympy(f)), m) for f, m in factors]


def rational_roots(p) -> list[Fraction]:
    """All rational roots (without multiplicity), sorted."""
    roots = []
    for f, _ in irreducible_factors(p):
        if degree(f) == 1:
            roots.append(-f[0] / f[1])
    return sorted(set(roots))


def resultant(p, q) -> Fraction:
    r = sympy.resultant(to_sympy(p).as_expr(), to_sympy(q).as_expr(), _x)
    r = sympy.Rational(r)
    return Fraction(r.p, r.q)


def squarefree_part(p):
    """Monic product of the distinct irreducible factors."""
    p = trim(p)
    if degree(p) <= 0:
        return monic(p) if not is_zero(p) else ZERO
    return monic(divexact(p, gcd(p, deriv(p))))
