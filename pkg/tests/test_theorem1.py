import math

import pytest

from avseq import curve_fp as cfp
from avseq import curve_q as cq
from avseq import isogeny as iso
from avseq import theorem1 as t1
from avseq.curve_q import INFINITY, CurveQ, point
from avseq.errors import GcdNotOne, NoQualifyingPrime
from avseq.fixtures import ex31_spec, ex35_spec
from avseq.seqlib import QuotientAVSpec
from avseq.theorem1 import RankOneDecomposition

E31 = CurveQ(0, 8, 0, -9, 0)
E35 = CurveQ(0, 0, 0, -21, -20)
PAPER_E0 = CurveQ(0, 8, 0, 36, 288)
QP = point(9, -36)
UP = point(-3, 4)
T1, T2 = point(-1, 0), point(5, 0)
Q = point_2q = cq.scalar_mul(E31, 2, QP)


def test_verify_decomposition_reference():
    dec = RankOneDecomposition(Q, (1, 1), (INFINITY, INFINITY), (1, 0), Q, 1)
    assert t1.verify_decomposition(E31, [Q, Q], dec)


def test_verify_decomposition_gcd_error_and_false():
    dec = RankOneDecomposition(Q, (2, 2), (INFINITY, INFINITY), (1, 0), Q, 1)
    with pytest.raises(GcdNotOne):
        t1.verify_decomposition(E31, [Q, Q], dec)
    wrong = RankOneDecomposition(Q, (1, 1), (QP, INFINITY), (1, 0), Q, 1)
    assert not t1.verify_decomposition(E31, [Q, Q], wrong)


def test_decompose_from_hints_single_point():
    dec = t1.decompose_from_hints(E35, [UP], UP)
    assert dec.a == (1,) and dec.b == (1,) and dec.U == UP and dec.u == 1


def test_decompose_from_hints_torsion_shift():
    shifted = cq.add(E35, UP, T1)
    dec = t1.decompose_from_hints(E35, [shifted, UP], UP)
    assert dec.a == (1, 1)
    assert dec.u == 2  # one deviation has exact order 2
    assert t1.verify_decomposition(E35, [shifted, UP], dec)


def test_decompose_reference_fixture():
    dec = t1.decompose_from_hints(E31, [Q, Q], Q)
    assert dec.a == (1, 1) and dec.u == 1


def test_decompose_auto_refines_common_multiple():
    # both points are multiples of U': 2U' and 3U'; gcd(2,3) = 1 needs refining
    two = cq.scalar_mul(E35, 2, UP)
    three = cq.scalar_mul(E35, 3, UP)
    dec = t1.decompose_auto(E35, [two, three])
    assert math.gcd(*dec.a) == 1
    assert t1.verify_decomposition(E35, [two, three], dec)
    assert dec.u == 1


def test_compute_gn_reference():
    spec = ex35_spec()
    Z = (T1, INFINITY)
    assert t1.compute_gn(spec, (1, 1), Z, 1) == []
    g0 = t1.compute_gn(spec, (1, 1), Z, 0)
    assert len(g0) == 4
    assert any(V.is_infinity for V in g0)


def test_compute_gn_trivial_contains_identity():
    spec = ex35_spec()
    Z = (INFINITY, INFINITY)
    for n in (0, 1, 5):
        assert any(V.is_infinity for V in t1.compute_gn(spec, (1, 1), Z, n))


def test_compute_d_reference():
    spec35 = ex35_spec()
    assert t1.compute_d(spec35, (1, 1), (T1, INFINITY)) == 2
    spec31 = ex31_spec()
    assert t1.compute_d(spec31, (1, 1), (INFINITY, INFINITY)) == 1
    assert t1.compute_d(spec35, (1, 1), (INFINITY, INFINITY)) == 1


def test_gn_nonempty_exactly_at_multiples_of_d():
    spec = ex35_spec()
    a, Z = (1, 1), (T1, INFINITY)
    d = t1.compute_d(spec, a, Z)
    ctx = t1._aux_context(spec, a, Z, 10 ** 5, 0)
    t = ctx.z_period
    for n in range(1, t + 1):
        nonempty = bool(t1._gn_at_context(ctx, n))
        assert nonempty == (n % d == 0)


def test_gn_cardinality_period():
    spec = ex35_spec()
    a, Z = (1, 1), (T1, INFINITY)
    ctx = t1._aux_context(spec, a, Z, 10 ** 5, 0)
    d = t1.compute_d(spec, a, Z)
    g0 = len(t1._gn_at_context(ctx, 0))
    for k in range(1, 5):
        assert len(t1._gn_at_context(ctx, k * d)) == g0


def test_gn_invariant_across_three_auxiliary_primes():
    spec = ex35_spec()
    a, Z = (1, 1), (T1, INFINITY)
    sizes = []
    primes = []
    skip = 0
    for _ in range(3):
        ctx = t1._aux_context(spec, a, Z, 10 ** 5, skip)
        primes.append(ctx.prime)
        sizes.append([len(t1._gn_at_context(ctx, n)) for n in range(0, 9)])
        skip = ctx.prime
    assert len(set(primes)) == 3
    assert sizes[0] == sizes[1] == sizes[2]


def test_gn_torsion_confinement():
    spec = ex35_spec()
    a, Z = (1, 1), (T1, INFINITY)
    ctx = t1._aux_context(spec, a, Z, 10 ** 5, 0)
    for n in range(0, 5):
        for V in t1._gn_at_context(ctx, n):
            assert cfp.scalar_mul_fp(ctx.red, ctx.torsion_bound, V).is_infinity


def test_pipeline_ex31():
    res = t1.pipeline(ex31_spec())
    assert res.n1 == 1 and res.u == 1 and res.d == 1
    transform = iso.isomorphic_over_q(res.E0, PAPER_E0)
    assert transform is not None
    image = transform.apply(res.Q0)
    assert image in (point(8, -40), cq.neg(PAPER_E0, point(8, -40)))
    assert set(res.S_auto) == {2, 3, 5}
    assert res.verified_up_to == 12
    assert all(c.ok for c in res.checks)


def test_pipeline_ex35():
    res = t1.pipeline(ex35_spec())
    assert res.n1 == 2 and res.u == 1 and res.d == 2
    assert iso.isomorphic_over_q(res.E0, E35) is not None
    assert set(res.S_auto) == {2, 3}
    assert all(c.ok for c in res.checks)
    # even-index identities carry the reference values where factored
    lhs = {c.n: c.lhs for c in res.checks}
    assert lhs[2] == 715


def test_pipeline_trivial_spec():
    spec = QuotientAVSpec(E35, 1, [], (UP,))
    res = t1.pipeline(spec, validate_up_to=8)
    assert res.n1 == 1
    assert res.E0 == E35 and res.Q0 == UP
    assert res.quotient_map.degree == 1


def test_pipeline_u_equals_two_spec():
    # H trivial on E^2, lift (U'+T1, U'): downstairs (2U'+..., ...) has u = 2
    spec = QuotientAVSpec(E35, 2, [], (cq.add(E35, UP, T1), UP))
    res = t1.pipeline(spec, validate_up_to=8)
    assert res.u == 2 and res.d == 1 and res.n1 == 2


def test_primitive_criterion_fixtures():
    assert t1.primitive_criterion(ex31_spec()) is True
    assert t1.primitive_criterion(ex35_spec()) is False
    assert t1.primitive_criterion(QuotientAVSpec(E35, 1, [], (UP,))) is True


def test_primitive_criterion_matches_pipeline_n1():
    for spec in (ex31_spec(), ex35_spec(), QuotientAVSpec(E35, 1, [], (UP,))):
        res = t1.pipeline(spec, validate_up_to=6)
        assert t1.primitive_criterion(spec) == (res.n1 == 1)


def test_u_route_agreement_on_fixtures():
    for spec in (ex31_spec(), ex35_spec()):
        Qs = t1.downstairs_points(spec)
        dec = t1.decompose_auto(spec.base, Qs)
        _, Z = t1.lift_deviations(spec, dec)
        u_lift = 1
        for Zi in Z:
            NZ = cq.scalar_mul(spec.base, spec.exponent, Zi)
            u_lift = math.lcm(u_lift, cq.torsion_order(spec.base, NZ))
        assert u_lift == dec.u


def test_aux_prime_bound_failure():
    spec = ex35_spec()
    with pytest.raises(NoQualifyingPrime):
        t1.compute_gn(spec, (1, 1), (T1, INFINITY), 1, aux_bound=7)
