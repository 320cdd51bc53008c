"""Divisibility sequences C_n and primitive-divisor reports.

A term C_n collects the good primes p outside S at which nP reduces to the
identity.  On an elliptic curve this reads off the denominator of x(nP);
on a quotient E^m/H it is extracted coset by coset: for each h in H the
primes with nL = h (mod p) divide an explicit gcd of coordinate numerators,
and cleaning that gcd of denominator/bad/S primes leaves exactly the
member primes.  Reported primes are double-checked by modular reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from . import curve_fp, curve_q
from .arith import FactorCache, Factorization, PrimeSet, factor, strip_support
from .curve_q import CurveQ, PointQ
from .errors import (
    BadModel,
    InputError,
    InternalInvariantError,
    NotClosed,
    NotTorsion,
    OffCurve,
    TorsionLift,
    TorsionPoint,
)

SUBGROUP_SIZE_BOUND = 4096


class AllPrimes:
    """Absorbing element for coset intersections: R equals h exactly."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ALL"


ALL = AllPrimes()


@dataclass(frozen=True)
class QuotientAVSpec:
    """An abelian variety E^m/H with a lifted rational point.

    H is presented by generator tuples of rational torsion points; the lift
    L represents P = q(L) under the quotient map q: E^m -> E^m/H.  The
    exponent N (smallest integer killing H) is derived when not supplied.
    """

    base: CurveQ
    m: int
    h_generators: tuple[tuple[PointQ, ...], ...]
    lift: tuple[PointQ, ...]
    exponent: int = 0

    def __init__(self, base, m, h_generators, lift, exponent=None):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "m", int(m))
        gens = tuple(tuple(g) for g in h_generators)
        object.__setattr__(self, "h_generators", gens)
        object.__setattr__(self, "lift", tuple(lift))
        if self.m < 1:
            raise InputError("m must be positive")
        if len(self.lift) != self.m:
            raise InputError("lift must have m components")
        for g in gens:
            if len(g) != self.m:
                raise InputError("generator tuples must have m components")
            for comp in g:
                if not curve_q.on_curve(base, comp):
                    raise OffCurve(f"generator component {comp} not on the base curve")
                if curve_q.torsion_order(base, comp) is None:
                    raise NotTorsion(f"generator component {comp} is not torsion")
        for comp in self.lift:
            if not curve_q.on_curve(base, comp):
                raise OffCurve(f"lift component {comp} not on the base curve")
        derived = 1
        for h in enumerate_subgroup_elements(base, gens, self.m):
            for comp in h:
                order = curve_q.torsion_order(base, comp)
                derived = math.lcm(derived, order)
        if exponent is None or exponent == 0:
            exponent = derived
        elif exponent % derived != 0 or exponent < 1:
            raise InputError(
                f"declared exponent {exponent} does not kill H (needs multiple of {derived})"
            )
        object.__setattr__(self, "exponent", int(exponent))


@lru_cache(maxsize=64)
def enumerate_subgroup_elements(base: CurveQ, gens, m: int):
    identity = (curve_q.INFINITY,) * m
    closure = {identity}
    frontier = [identity]
    while frontier:
        cur = frontier.pop()
        for g in gens:
            nxt = tuple(curve_q.add(base, cur[i], g[i]) for i in range(m))
            if nxt not in closure:
                closure.add(nxt)
                frontier.append(nxt)
                if len(closure) > SUBGROUP_SIZE_BOUND:
                    raise NotClosed(f"subgroup exceeds {SUBGROUP_SIZE_BOUND} elements")
    return tuple(sorted(closure, key=lambda h: [_pt_key(P) for P in h]))


def _pt_key(P: PointQ):
    return (0, Fraction(0), Fraction(0)) if P.is_infinity else (1, P.x, P.y)


def enumerate_subgroup(spec: QuotientAVSpec) -> list[tuple[PointQ, ...]]:
    """Full closure of the H generators under componentwise addition."""
    return list(enumerate_subgroup_elements(spec.base, spec.h_generators, spec.m))


@dataclass(frozen=True)
class DivSeqTerm:
    n: int
    radical_value: int
    factorization: Factorization
    primitive_primes: PrimeSet

    def primes(self) -> tuple[int, ...]:
        return self.factorization.primes()


def _squarefree_term(n: int, primes) -> DivSeqTerm:
    primes = tuple(sorted(set(primes)))
    value = 1
    for p in primes:
        value *= p
    fac = Factorization(value, tuple((p, 1) for p in primes))
    return DivSeqTerm(n, value, fac, PrimeSet())


# -- congruence-prime extraction ----------------------------------------------

def _coset_gcd_integer(E: CurveQ, R: PointQ, h: PointQ, junk: int) -> int:
    """Integer whose primes (after cleaning) are exactly {p : R = h mod p}.

    Assumes R != h as rational points; returns 0 never.  `junk` collects
    S primes, bad primes and 2; coordinate denominators are appended here
    as appropriate for each case.
    """
    if h.is_infinity:
        if R.is_infinity:
            raise InternalInvariantError("exact coincidence must be handled by caller")
        return strip_support(R.x.denominator, junk)
    if R.is_infinity:
        return 1
    dx = R.x - h.x
    dy = R.y - h.y
    d = math.gcd(dx.numerator, dy.numerator)
    if d == 0:
        raise InternalInvariantError("exact coincidence must be handled by caller")
    for coord in (R.x, R.y, h.x, h.y):
        junk *= coord.denominator
    return strip_support(d, junk)


def congruence_primes(E: CurveQ, R: PointQ, h: PointQ, exclude: PrimeSet,
                      budget: int | None = None, cache: FactorCache | None = None):
    """Good primes outside `exclude` where R and h agree mod p.

    Returns ALL when R equals h as a rational point.  Every reported prime
    is re-verified by reduction.
    """
    if not E.is_integral():
        raise BadModel("congruence primes need an integral model")
    for P in (R, h):
        if not curve_q.on_curve(E, P):
            raise OffCurve(f"{P} is not on the curve")
    if R == h:
        return ALL
    junk = 2 * abs(int(E.discriminant()))
    for p in exclude:
        junk *= p
    d = _coset_gcd_integer(E, R, h, junk)
    kwargs = {} if budget is None else {"budget": budget}
    primes = _radical_primes(d, cache=cache, **kwargs)
    for p in primes:
        if not _points_agree_mod(E, R, h, p):
            raise InternalInvariantError(
                f"prime {p} passed the gcd filter but fails modular comparison"
            )
    return PrimeSet(primes)


def _points_agree_mod(E: CurveQ, R: PointQ, h: PointQ, p: int) -> bool:
    return curve_fp.reduce_point(E, R, p) == curve_fp.reduce_point(E, h, p)


def _radical_primes(d: int, budget: int | None = None, cache: FactorCache | None = None):
    """Distinct primes of d; factors the square root when d is a perfect square."""
    if d == 1:
        return ()
    kwargs = {} if budget is None else {"budget": budget}
    root = math.isqrt(d)
    if root * root == d:
        return factor(root, cache=cache, **kwargs).primes()
    return factor(d, cache=cache, **kwargs).primes()


# -- sequence terms -------------------------------------------------------------

def effective_exclusions(E: CurveQ, S: PrimeSet, extra: int = 1) -> PrimeSet:
    """S forced to contain the bad primes, 2 and the primes of `extra`."""
    forced = set(S) | set(curve_q.bad_primes(E)) | {2}
    if abs(extra) > 1:
        forced |= set(factor(abs(extra)).primes())
    return PrimeSet(forced)


@lru_cache(maxsize=1024)
def _is_torsion(E: CurveQ, Q: PointQ) -> bool:
    return curve_q.torsion_order(E, Q) is not None


def c_n_elliptic(E: CurveQ, Q: PointQ, S: PrimeSet, n: int,
                 budget: int | None = None, cache: FactorCache | None = None) -> DivSeqTerm:
    """Term C_n(E, Q, S): squarefree product of good primes with nQ = O mod p."""
    if not E.is_integral():
        raise BadModel("sequence terms need an integral model")
    if not curve_q.on_curve(E, Q):
        raise OffCurve(f"{Q} is not on the curve")
    if n < 1:
        raise InputError("term index must be positive")
    if _is_torsion(E, Q):
        raise TorsionPoint("C_n is not defined for torsion points")
    s_eff = effective_exclusions(E, S)
    d = elliptic_support_integer(E, Q, s_eff, n)
    primes = _radical_primes(d, budget=budget, cache=cache)
    for p in primes:
        if not curve_fp.is_zero_mod(E, Q, n, p):
            raise InternalInvariantError(f"prime {p} fails the membership double-check")
    return _squarefree_term(n, primes)


def elliptic_support_integer(E: CurveQ, Q: PointQ, s_eff: PrimeSet, n: int) -> int:
    """Integer with the same prime support as C_n(E, Q, S), unfactored."""
    R = curve_q.scalar_mul(E, n, Q)
    if R.is_infinity:
        raise TorsionPoint(f"{n}Q is the identity")
    junk = 2
    for p in s_eff:
        junk *= p
    return strip_support(R.x.denominator, junk)


def c_n_quotient(spec: QuotientAVSpec, S: PrimeSet, n: int,
                 budget: int | None = None, cache: FactorCache | None = None) -> DivSeqTerm:
    """Term C_n for a point on E^m/H via coset-wise congruence extraction."""
    if n < 1:
        raise InputError("term index must be positive")
    E = spec.base
    s_eff = effective_exclusions(E, S, extra=spec.exponent)
    nL = tuple(curve_q.scalar_mul(E, n, L) for L in spec.lift)
    collected: set[int] = set()
    for h in enumerate_subgroup(spec):
        d = _coset_combined_integer(E, nL, h, s_eff)
        if d is ALL:
            raise TorsionLift(f"{n}L lies in H exactly; the sequence degenerates at n={n}")
        primes = _radical_primes(d, budget=budget, cache=cache)
        for p in primes:
            if not all(_points_agree_mod(E, nL[i], h[i], p) for i in range(spec.m)):
                raise InternalInvariantError(
                    f"prime {p} fails the componentwise membership double-check"
                )
        collected.update(primes)
    return _squarefree_term(n, collected)


def _coset_combined_integer(E: CurveQ, nL, h, s_eff: PrimeSet):
    """gcd over components of the coset congruence integers; ALL if exact."""
    junk = 2 * abs(int(E.discriminant()))
    for p in s_eff:
        junk *= p
    combined = 0
    for R, hi in zip(nL, h):
        if R == hi:
            continue  # gcd identity: this component allows every prime
        combined = math.gcd(combined, _coset_gcd_integer(E, R, hi, junk))
        if combined == 1:
            return 1
    if combined == 0:
        return ALL
    return strip_support(combined, junk)


def quotient_support_integer(spec: QuotientAVSpec, s_eff: PrimeSet, n: int) -> int:
    """Product over cosets of the cleaned congruence integers.

    Shares prime support with C_n(spec, S); used for factoring-free equality
    verification in the pipeline.  Raises TorsionLift on degeneracy.
    """
    E = spec.base
    nL = tuple(curve_q.scalar_mul(E, n, L) for L in spec.lift)
    out = 1
    for h in enumerate_subgroup(spec):
        d = _coset_combined_integer(E, nL, h, s_eff)
        if d is ALL:
            raise TorsionLift(f"{n}L lies in H exactly; the sequence degenerates at n={n}")
        out *= d
    return out


def primitive_report(terms: list[DivSeqTerm]) -> list[DivSeqTerm]:
    """Fill primitive_primes: divisors of term n absent from every earlier term."""
    for i, term in enumerate(terms):
        if term.n != i + 1:
            raise InputError("terms must be indexed 1..N contiguously")
    seen: set[int] = set()
    out = []
    for term in terms:
        fresh = [p for p in term.primes() if p not in seen]
        out.append(replace(term, primitive_primes=PrimeSet(fresh)))
        seen.update(term.primes())
    return out
