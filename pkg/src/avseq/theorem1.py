"""The reduction pipeline: from a rank-one point on E^m/H to (n1, E0, Q0).

Stages: rank-one decomposition of the downstairs points (multipliers a_i,
torsion deviations, period u), the torsion solution sets G_n and their
nonemptiness period d (computed at an auxiliary prime carrying full
rational torsion), n1 = u*d, the quotient curve E0 = E/G_0 with its
rational point Q0, and the primitive-divisor criterion.

Everything runs on the quotient-map normalization: A = E^m/H is presented
by q: E^m -> A with kernel H, the complementary map satisfies
phi o q = [N] for N the exponent of H, so the downstairs points are
Q_i = N * L_i.  Validation of the output against the quotient-model
sequence is factoring-free (prime-support comparison of explicit
integers); the per-check radical values are filled in best-effort under
a factor budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import curve_fp, curve_q, isogeny, polyq, seqlib
from .arith import FactorBudgetExceeded, FactorCache, PrimeSet, factor, same_support
from .curve_q import INFINITY, CurveQ, PointQ
from .errors import (
    DecompositionFailed,
    GcdNotOne,
    InputError,
    InternalInvariantError,
    NoRationalQ0,
    NotTorsion,
    TorsionInput,
)
from .seqlib import QuotientAVSpec

DEFAULT_VALIDATE_UP_TO = 12
DEFAULT_MULTIPLIER_BOUND = 50
CHECK_VALUE_BUDGET = 2 * 10 ** 6


@dataclass(frozen=True)
class RankOneDecomposition:
    """Q_i = a_i R + T_i with gcd(a) = 1, plus the combination data.

    U = sum b_i Q_i with sum a_i b_i = 1; u is the lcm of the orders of the
    torsion deviations Q_j - a_j U.
    """

    R: PointQ
    a: tuple[int, ...]
    T: tuple[PointQ, ...]
    b: tuple[int, ...]
    U: PointQ
    u: int


@dataclass(frozen=True)
class GnAnalysis:
    torsion_bound: int          # lambda = N * lcm(ord Z_i); G_n lives in E[lambda]
    Z: tuple[PointQ, ...]
    d: int
    g0_size: int
    witness: str
    aux_prime: int


@dataclass(frozen=True)
class CheckRecord:
    n: int
    lhs: int | None
    rhs: int | None
    ok: bool


@dataclass(frozen=True)
class PipelineResult:
    n1: int
    E0: CurveQ
    Q0: PointQ
    S_auto: PrimeSet
    verified_up_to: int
    u: int
    d: int
    aux_prime: int
    checks: tuple[CheckRecord, ...]
    quotient_map: isogeny.Isogeny


# -- decomposition -------------------------------------------------------------

def verify_decomposition(E: CurveQ, Q: list[PointQ], dec: RankOneDecomposition) -> bool:
    """Exact check of every decomposition invariant.

    Raises GcdNotOne for a malformed multiplier vector; returns False for a
    well-formed but wrong decomposition.
    """
    m = len(Q)
    if len(dec.a) != m or len(dec.T) != m or len(dec.b) != m:
        raise InputError("decomposition size mismatch")
    if math.gcd(*dec.a) != 1:
        raise GcdNotOne(f"gcd of multipliers {dec.a} is not 1")
    if sum(ai * bi for ai, bi in zip(dec.a, dec.b)) != 1:
        return False
    if curve_q.torsion_order(E, dec.R) is not None:
        return False
    for Qi, ai, Ti in zip(Q, dec.a, dec.T):
        if curve_q.torsion_order(E, Ti) is None:
            return False
        if curve_q.add(E, curve_q.scalar_mul(E, ai, dec.R), Ti) != Qi:
            return False
    U = INFINITY
    for bi, Qi in zip(dec.b, Q):
        U = curve_q.add(E, U, curve_q.scalar_mul(E, bi, Qi))
    if U != dec.U:
        return False
    u = 1
    for Qj, aj in zip(Q, dec.a):
        dev = curve_q.add(E, Qj, curve_q.neg(E, curve_q.scalar_mul(E, aj, dec.U)))
        order = curve_q.torsion_order(E, dev)
        if order is None:
            return False
        u = math.lcm(u, order)
    return u == dec.u


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1) if a else 0, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _combination_for_gcd(values: tuple[int, ...]) -> tuple[int, list[int]]:
    coeffs = [0] * len(values)
    g = 0
    for i, v in enumerate(values):
        if g == 0:
            g = abs(v)
            coeffs = [0] * len(values)
            coeffs[i] = 1 if v >= 0 else -1
            continue
        g2, x, y = _egcd(g, v)
        coeffs = [c * x for c in coeffs]
        coeffs[i] = y
        g = g2
    return g, coeffs


def decompose_from_hints(E: CurveQ, Q: list[PointQ], R: PointQ,
                         bound: int = DEFAULT_MULTIPLIER_BOUND) -> RankOneDecomposition:
    """Find Q_i = a_i R + T_i given the free generator R.

    Multipliers are guessed from height ratios and disambiguated (including
    sign) by torsion tests, scanning |a| <= bound as a fallback.
    """
    for Qi in Q:
        if not curve_q.on_curve(E, Qi):
            raise InputError(f"{Qi} is not on the curve")
    if curve_q.torsion_order(E, R) is not None:
        raise TorsionInput("R must be non-torsion")
    hR = curve_q.height_estimate(E, R)
    a = []
    T = []
    for Qi in Q:
        ai = _find_multiplier(E, Qi, R, hR, bound)
        a.append(ai)
        T.append(curve_q.add(E, Qi, curve_q.neg(E, curve_q.scalar_mul(E, ai, R))))
    g = math.gcd(*a)
    if g != 1:
        raise GcdNotOne(f"multipliers {a} share the factor {g}")
    _, b = _combination_for_gcd(tuple(a))
    U = INFINITY
    for bi, Qi in zip(b, Q):
        U = curve_q.add(E, U, curve_q.scalar_mul(E, bi, Qi))
    u = 1
    for Qj, aj in zip(Q, a):
        dev = curve_q.add(E, Qj, curve_q.neg(E, curve_q.scalar_mul(E, aj, U)))
        order = curve_q.torsion_order(E, dev)
        if order is None:
            raise InternalInvariantError("deviation from a valid decomposition is not torsion")
        u = math.lcm(u, order)
    dec = RankOneDecomposition(R, tuple(a), tuple(T), tuple(b), U, u)
    if not verify_decomposition(E, Q, dec):
        raise InternalInvariantError("constructed decomposition fails verification")
    return dec


def _find_multiplier(E: CurveQ, Qi: PointQ, R: PointQ, hR: float, bound: int) -> int:
    if curve_q.torsion_order(E, Qi) is not None:
        return 0
    guess = round(math.sqrt(max(curve_q.height_estimate(E, Qi), 0.0) / hR))
    candidates = []
    if guess > 0:
        candidates.extend((guess, -guess))
    for k in range(1, bound + 1):
        if k != guess:
            candidates.extend((k, -k))
    for ai in candidates:
        diff = curve_q.add(E, Qi, curve_q.neg(E, curve_q.scalar_mul(E, ai, R)))
        if curve_q.torsion_order(E, diff) is not None:
            return ai
    raise DecompositionFailed(
        f"no multiplier with |a| <= {bound} expresses {Qi} through the generator"
    )


def _find_ratio(E: CurveQ, Qi: PointQ, ref: PointQ, h_ratio: float,
                bound: int) -> tuple[int, int]:
    """Coprime (p, q) with q*Qi - p*ref torsion; heights guide the scan."""
    for q in range(1, bound + 1):
        center = round(q * h_ratio)
        for p in {center, center - 1, center + 1}:
            if p == 0:
                continue
            for signed in (p, -p):
                if math.gcd(signed, q) != 1:
                    continue
                diff = curve_q.add(
                    E,
                    curve_q.scalar_mul(E, q, Qi),
                    curve_q.neg(E, curve_q.scalar_mul(E, signed, ref)),
                )
                if curve_q.torsion_order(E, diff) is not None:
                    return signed, q
    raise DecompositionFailed(
        f"no multiple relation with denominators <= {bound} links {Qi} to the generator"
    )


def decompose_auto(E: CurveQ, Q: list[PointQ],
                   bound: int = DEFAULT_MULTIPLIER_BOUND) -> RankOneDecomposition:
    """Decompose without a hint.

    A generator of <Q_1, ..., Q_m> modulo torsion is assembled from the
    pairwise multiple-relations q_i Q_i = p_i Q_ref (mod torsion), then the
    hinted decomposition runs against it.
    """
    free = [Qi for Qi in Q if curve_q.torsion_order(E, Qi) is None]
    if not free:
        raise DecompositionFailed("all downstairs points are torsion (rank-one fails)")
    ref = min(free, key=lambda P: curve_q.height_estimate(E, P))
    h_ref = curve_q.height_estimate(E, ref)
    ratios = []
    for Qi in Q:
        if curve_q.torsion_order(E, Qi) is not None:
            ratios.append((0, 1))
            continue
        h_ratio = math.sqrt(max(curve_q.height_estimate(E, Qi), 0.0) / h_ref)
        ratios.append(_find_ratio(E, Qi, ref, h_ratio, bound))
    M = math.lcm(*[q for _, q in ratios])
    v = tuple(p * (M // q) for p, q in ratios)
    _, coeffs = _combination_for_gcd(v)
    R = INFINITY
    for ci, Qi in zip(coeffs, Q):
        R = curve_q.add(E, R, curve_q.scalar_mul(E, ci, Qi))
    return decompose_from_hints(E, Q, R, bound=bound)


# -- the G_n analysis -----------------------------------------------------------

@dataclass(frozen=True)
class _AuxContext:
    spec: QuotientAVSpec
    a: tuple[int, ...]
    Z: tuple[PointQ, ...]
    torsion_bound: int
    z_period: int
    prime: int
    red: curve_fp.CurveFp
    torsion: tuple[curve_fp.PointFp, ...]
    h_reduced: frozenset
    z_reduced: tuple[curve_fp.PointFp, ...]


@lru_cache(maxsize=32)
def _aux_context(spec: QuotientAVSpec, a: tuple[int, ...], Z: tuple[PointQ, ...],
                 bound: int, skip_below: int) -> _AuxContext:
    E = spec.base
    if not E.is_integral():
        raise InputError("the pipeline needs an integral base model")
    if math.gcd(*a) != 1:
        raise GcdNotOne(f"gcd of multipliers {a} is not 1")
    t = 1
    for Zi in Z:
        order = curve_q.torsion_order(E, Zi)
        if order is None:
            raise NotTorsion(f"deviation {Zi} is not torsion")
        t = math.lcm(t, order)
    lam = spec.exponent * t
    p = curve_fp.find_full_torsion_prime(E, lam, bound=bound, skip_below=skip_below)
    red = curve_fp.reduce_curve(E, p)
    torsion = tuple(curve_fp.torsion_points(red, lam))
    h_reduced = frozenset(
        tuple(curve_fp.reduce_point(E, comp, p) for comp in h)
        for h in seqlib.enumerate_subgroup(spec)
    )
    z_reduced = tuple(curve_fp.reduce_point(E, Zi, p) for Zi in Z)
    return _AuxContext(spec, a, Z, lam, t, p, red, torsion, h_reduced, z_reduced)


def _gn_at_context(ctx: _AuxContext, n: int) -> list[curve_fp.PointFp]:
    out = []
    shifts = [curve_fp.scalar_mul_fp(ctx.red, n, Zi) for Zi in ctx.z_reduced]
    for V in ctx.torsion:
        image = tuple(
            curve_fp.add_fp(ctx.red, curve_fp.scalar_mul_fp(ctx.red, ai, V), shift)
            for ai, shift in zip(ctx.a, shifts)
        )
        if image in ctx.h_reduced:
            out.append(V)
    return out


def compute_gn(spec: QuotientAVSpec, a, Z, n: int,
               aux_bound: int = curve_fp.DEFAULT_AUX_PRIME_BOUND,
               skip_below: int = 0) -> list[curve_fp.PointFp]:
    """G_n = {V : (a_i V + n Z_i)_i in H}, enumerated at an auxiliary prime.

    Torsion confinement: N(a_i V + n Z_i) = O for all i forces
    (N * lcm(ord Z_i)) V = O, so V ranges over the lambda-torsion, which is
    fully rational at the chosen prime.
    """
    ctx = _aux_context(spec, tuple(a), tuple(Z), aux_bound, skip_below)
    return _gn_at_context(ctx, n)


def compute_d(spec: QuotientAVSpec, a, Z,
              aux_bound: int = curve_fp.DEFAULT_AUX_PRIME_BOUND) -> int:
    """Smallest n >= 1 with G_n nonempty; bounded by the Z period."""
    ctx = _aux_context(spec, tuple(a), tuple(Z), aux_bound, 0)
    for n in range(1, ctx.z_period + 1):
        if _gn_at_context(ctx, n):
            return n
    raise InternalInvariantError(
        "G_t with t the Z period must contain the identity"
    )


def analyze_gn(spec: QuotientAVSpec, a, Z,
               aux_bound: int = curve_fp.DEFAULT_AUX_PRIME_BOUND) -> GnAnalysis:
    ctx = _aux_context(spec, tuple(a), tuple(Z), aux_bound, 0)
    d = compute_d(spec, a, Z, aux_bound=aux_bound)
    g0 = _gn_at_context(ctx, 0)
    gd = _gn_at_context(ctx, d)
    witness = f"V_d = {gd[0]} mod {ctx.prime}"
    return GnAnalysis(ctx.torsion_bound, tuple(Z), d, len(g0), witness, ctx.prime)


# -- E0 / Q0 construction ---------------------------------------------------------

def lift_deviations(spec: QuotientAVSpec, dec: RankOneDecomposition
                    ) -> tuple[PointQ, tuple[PointQ, ...]]:
    """U0 = sum b_i L_i and the raw deviations L_i - a_i U0."""
    E = spec.base
    U0 = INFINITY
    for bi, Li in zip(dec.b, spec.lift):
        U0 = curve_q.add(E, U0, curve_q.scalar_mul(E, bi, Li))
    Z = tuple(
        curve_q.add(E, Li, curve_q.neg(E, curve_q.scalar_mul(E, ai, U0)))
        for ai, Li in zip(dec.a, spec.lift)
    )
    return U0, Z


def gn_deviations(spec: QuotientAVSpec, dec: RankOneDecomposition
                  ) -> tuple[PointQ, tuple[PointQ, ...]]:
    """U0 and the deviations that drive the G_n analysis.

    The analysis runs at indices n/u, where the raw torsion deviations have
    been killed by multiplying through by u, so Z_i = u * (L_i - a_i U0);
    these are killed by the exponent of H.
    """
    U0, raw = lift_deviations(spec, dec)
    Z = tuple(curve_q.scalar_mul(spec.base, dec.u, Zi) for Zi in raw)
    return U0, Z


def _quotient_isogeny(spec: QuotientAVSpec, ctx: _AuxContext,
                      aux_bound: int) -> isogeny.Isogeny:
    g0 = _gn_at_context(ctx, 0)
    E = spec.base
    if len(g0) == 1:
        trivial = isogeny.KernelSpec(E, polyq.ONE, 1)
        return isogeny.velu_quotient(trivial)
    p2 = curve_fp.find_full_torsion_prime(E, ctx.torsion_bound, bound=aux_bound,
                                          skip_below=ctx.prime)
    ctx2 = _aux_context(spec, ctx.a, ctx.Z, aux_bound, ctx.prime)
    if ctx2.prime != p2:
        raise InternalInvariantError("auxiliary prime bookkeeping out of sync")
    g0_confirm = _gn_at_context(ctx2, 0)
    kernel = isogeny.kernel_from_reduced_subgroup(E, g0, ctx.prime,
                                                  confirm=(g0_confirm, p2))
    return isogeny.velu_quotient(kernel)


def _s_auto(spec: QuotientAVSpec, E0: CurveQ, u: int) -> PrimeSet:
    primes = set(curve_q.bad_primes(spec.base)) | set(curve_q.bad_primes(E0)) | {2}
    for value in (spec.exponent, u):
        if value > 1:
            primes |= set(factor(value).primes())
    return PrimeSet(primes)


def _candidate_q0s(E0: CurveQ, base: PointQ, n1: int) -> list[PointQ]:
    torsion = curve_q.rational_torsion_points(E0)
    primary = [curve_q.add(E0, base, tau) for tau in torsion]
    primary.sort(key=curve_q._point_sort_key)
    seen = list(dict.fromkeys(primary))
    if n1 > 1:
        for gamma in list(seen):
            for pre in curve_q.preimage_points(E0, n1, gamma):
                if pre not in seen:
                    seen.append(pre)
    return seen


def build_E0_Q0(spec: QuotientAVSpec, dec: RankOneDecomposition, gn: GnAnalysis,
                validate_up_to: int = DEFAULT_VALIDATE_UP_TO,
                aux_bound: int = curve_fp.DEFAULT_AUX_PRIME_BOUND,
                ) -> tuple[CurveQ, PointQ, isogeny.Isogeny]:
    """Quotient curve E0 = E/G_0 and a validated rational point Q0.

    The candidate psi(n1 * U0) is corrected, when needed, by rational
    torsion translates of E0 and rational n1-division preimages, in
    deterministic order; candidates are validated against the quotient
    sequence by exact prime-support comparison for all n <= validate_up_to.
    """
    ctx = _aux_context(spec, dec.a, gn.Z, aux_bound, 0)
    psi = _quotient_isogeny(spec, ctx, aux_bound)
    E0v = psi.codomain
    E0, uscale = curve_q.integral_model(E0v)
    n1 = dec.u * gn.d
    U0, _ = lift_deviations(spec, dec)
    base = curve_q.map_to_integral(
        isogeny.evaluate(psi, curve_q.scalar_mul(spec.base, n1, U0)), uscale
    )
    s_auto = _s_auto(spec, E0, dec.u)
    lhs_supports = {
        n: seqlib.quotient_support_integer(spec, s_auto, n)
        for n in range(1, validate_up_to + 1)
    }
    for candidate in _candidate_q0s(E0, base, n1):
        if curve_q.torsion_order(E0, candidate) is not None:
            continue
        if _candidate_validates(spec, E0, candidate, n1, s_auto,
                                lhs_supports, validate_up_to):
            return E0, candidate, psi
    raise NoRationalQ0(
        "no rational candidate reproduces the quotient sequence; "
        "the quotient point lives in a proper extension field"
    )


def _candidate_validates(spec, E0, Q0, n1, s_auto, lhs_supports, validate_up_to) -> bool:
    for n in range(1, validate_up_to + 1):
        lhs = lhs_supports[n]
        if n % n1 != 0:
            if lhs != 1:
                return False
            continue
        rhs = seqlib.elliptic_support_integer(E0, Q0, s_auto, n // n1)
        if not same_support(lhs, rhs):
            return False
    return True


# -- pipeline and criterion --------------------------------------------------------

def downstairs_points(spec: QuotientAVSpec) -> list[PointQ]:
    """phi(P) = (N L_1, ..., N L_m) under phi o q = [N]."""
    return [curve_q.scalar_mul(spec.base, spec.exponent, Li) for Li in spec.lift]


def pipeline(spec: QuotientAVSpec,
             validate_up_to: int = DEFAULT_VALIDATE_UP_TO,
             aux_bound: int = curve_fp.DEFAULT_AUX_PRIME_BOUND,
             check_value_budget: int = CHECK_VALUE_BUDGET,
             cache: FactorCache | None = None) -> PipelineResult:
    """Full reduction: n1 = u*d, (E0, Q0), S_auto, verified equalities."""
    Q = downstairs_points(spec)
    dec = decompose_auto(spec.base, Q)
    _, raw = lift_deviations(spec, dec)
    u_lift = 1
    for Zi in raw:
        NZ = curve_q.scalar_mul(spec.base, spec.exponent, Zi)
        order = curve_q.torsion_order(spec.base, NZ)
        if order is None:
            raise InternalInvariantError("lift-side deviation is not torsion")
        u_lift = math.lcm(u_lift, order)
    if u_lift != dec.u:
        raise InternalInvariantError(
            f"torsion period differs between routes: downstairs {dec.u}, lift {u_lift}"
        )
    _, Z = gn_deviations(spec, dec)
    gn = analyze_gn(spec, dec.a, Z, aux_bound=aux_bound)
    n1 = dec.u * gn.d
    E0, Q0, psi = build_E0_Q0(spec, dec, gn, validate_up_to=validate_up_to,
                              aux_bound=aux_bound)
    s_auto = _s_auto(spec, E0, dec.u)
    checks = _check_records(spec, E0, Q0, n1, s_auto, validate_up_to,
                            check_value_budget, cache)
    return PipelineResult(
        n1=n1, E0=E0, Q0=Q0, S_auto=s_auto, verified_up_to=validate_up_to,
        u=dec.u, d=gn.d, aux_prime=gn.aux_prime, checks=tuple(checks),
        quotient_map=psi,
    )


def _check_records(spec, E0, Q0, n1, s_auto, validate_up_to, budget, cache):
    records = []
    for n in range(1, validate_up_to + 1):
        lhs_support = seqlib.quotient_support_integer(spec, s_auto, n)
        if n % n1 != 0:
            ok = lhs_support == 1
            lhs_val = 1 if ok else _try_radical(spec, s_auto, n, budget, cache)
            records.append(CheckRecord(n, lhs_val, 1, ok))
            continue
        rhs_support = seqlib.elliptic_support_integer(E0, Q0, s_auto, n // n1)
        ok = same_support(lhs_support, rhs_support)
        lhs_val = _try_radical(spec, s_auto, n, budget, cache)
        rhs_val = _try_elliptic_radical(E0, Q0, s_auto, n // n1, budget, cache)
        if ok and lhs_val is not None and rhs_val is not None and lhs_val != rhs_val:
            raise InternalInvariantError(
                f"support equality but radical mismatch at n={n}: {lhs_val} vs {rhs_val}"
            )
        records.append(CheckRecord(n, lhs_val, rhs_val, ok))
    return records


def _try_radical(spec, s_auto, n, budget, cache):
    try:
        return seqlib.c_n_quotient(spec, s_auto, n, budget=budget, cache=cache).radical_value
    except FactorBudgetExceeded:
        return None


def _try_elliptic_radical(E0, Q0, s_auto, n, budget, cache):
    try:
        return seqlib.c_n_elliptic(E0, Q0, s_auto, n, budget=budget, cache=cache).radical_value
    except FactorBudgetExceeded:
        return None


def primitive_criterion(spec: QuotientAVSpec,
                        dec: RankOneDecomposition | None = None,
                        gn: GnAnalysis | None = None,
                        aux_bound: int = curve_fp.DEFAULT_AUX_PRIME_BOUND) -> bool:
    """True iff the sequence has primitive divisors for almost all n (n1 = 1).

    Computed as u = 1 and d = 1.  The two kernel-inclusion conditions
    behind the criterion (diagonal torsion scaled by the multipliers lands
    in H; the deviation tuple does not) are evaluated at the auxiliary
    prime and cross-checked against the emptiness of G_1.
    """
    if dec is None:
        dec = decompose_auto(spec.base, downstairs_points(spec))
    if gn is None:
        _, Z = gn_deviations(spec, dec)
        gn = analyze_gn(spec, dec.a, Z, aux_bound=aux_bound)
    ctx = _aux_context(spec, dec.a, gn.Z, aux_bound, 0)
    N = spec.exponent
    diag = curve_fp.torsion_points(ctx.red, N)
    cond_alpha = all(
        tuple(curve_fp.scalar_mul_fp(ctx.red, ai, V) for ai in ctx.a) in ctx.h_reduced
        for V in diag
    )
    h_exact = set(seqlib.enumerate_subgroup(spec))
    cond_shift = tuple(gn.Z) not in h_exact
    if dec.u == 1:
        g1_empty = not _gn_at_context(ctx, 1)
        if g1_empty != (cond_alpha and cond_shift):
            raise InternalInvariantError(
                "kernel-inclusion conditions disagree with the emptiness of G_1"
            )
    return dec.u == 1 and gn.d == 1
