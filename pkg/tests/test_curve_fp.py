import math
import random

import numpy as np
import pytest

from avseq import curve_fp as cfp
from avseq import curve_q as cq
from avseq import fp_kernels as K
from avseq.curve_fp import INFINITY_FP, CurveFp, PointFp
from avseq.curve_q import CurveQ, point
from avseq.errors import BadReductionPrime, InputError, NoQualifyingPrime, PrimeTooLarge

E31 = CurveQ(0, 8, 0, -9, 0)
E35 = CurveQ(0, 0, 0, -21, -20)
E0 = CurveQ(0, 8, 0, 36, 288)
UP = point(-3, 4)


def test_reduce_point_examples():
    assert cfp.reduce_point(E35, UP, 5) == PointFp(2, 4)
    q0_3 = cq.scalar_mul(E0, 3, point(8, -40))
    assert cfp.reduce_point(E0, q0_3, 7).is_infinity
    assert cfp.reduce_point(E35, cq.INFINITY, 5).is_infinity


def test_reduce_point_bad_prime_rejected():
    with pytest.raises(BadReductionPrime):
        cfp.reduce_point(E35, UP, 3)
    with pytest.raises(BadReductionPrime):
        cfp.reduce_point(E35, UP, 2)
    with pytest.raises(BadReductionPrime):
        cfp.reduce_curve(E35, 9)


def test_is_zero_mod_examples():
    twoU = cq.scalar_mul(E35, 2, UP)
    assert cfp.is_zero_mod(E35, twoU, 2, 5)
    assert not cfp.is_zero_mod(E35, UP, 1, 5)


def test_is_zero_mod_agrees_with_rational_oracle():
    rng = random.Random(3)
    disc = abs(int(E35.discriminant()))
    primes = [p for p in range(5, 100, 2)
              if all(p % q for q in range(2, p)) and disc % p]
    for _ in range(40):
        n = rng.randrange(1, 9)
        p = rng.choice(primes)
        nP = cq.scalar_mul(E35, n, UP)
        expected = cfp.reduce_point(E35, nP, p).is_infinity
        assert cfp.is_zero_mod(E35, UP, n, p) == expected


def test_group_order_examples():
    assert cfp.group_order(CurveFp(5, 0, 0, 0, 1, 0)) == 4
    with pytest.raises(PrimeTooLarge):
        cfp.group_order(CurveFp(1000003, 0, 0, 0, 1, 0), max_p=10 ** 4)


def test_group_order_hasse_bound_random_curves():
    rng = random.Random(41)
    count = 0
    while count < 50:
        p = rng.choice([101, 211, 307, 401, 503])
        a, b = rng.randrange(p), rng.randrange(p)
        if (4 * a ** 3 + 27 * b ** 2) % p == 0:
            continue
        order = cfp.group_order(CurveFp(p, 0, 0, 0, a, b))
        assert abs(order - p - 1) <= 2 * math.isqrt(p) + 1
        count += 1


def test_group_order_lagrange():
    red = cfp.reduce_curve(E35, 101)
    order = cfp.group_order(red)
    pts = cfp.all_points(red)
    rng = random.Random(17)
    for P in rng.sample(pts, 20):
        assert cfp.scalar_mul_fp(red, order, P).is_infinity


def test_all_points_matches_group_order():
    for p in (5, 7, 11, 101, 401):
        if int(E31.discriminant()) % p == 0:
            continue
        red = cfp.reduce_curve(E31, p)
        assert len(cfp.all_points(red)) == cfp.group_order(red)


def test_torsion_points_examples():
    red7 = cfp.reduce_curve(E31, 7)
    assert cfp.torsion_points(red7, 1) == [INFINITY_FP]
    two = cfp.torsion_points(red7, 2)
    assert len(two) == 4  # the cubic splits mod 7
    for P in two:
        assert cfp.scalar_mul_fp(red7, 2, P).is_infinity


def test_torsion_points_closed_under_add_and_neg():
    red = cfp.reduce_curve(E35, 73)
    four = cfp.torsion_points(red, 4)
    assert len(four) == 16
    pts = set(four)
    for P in four:
        assert cfp.neg_fp(red, P) in pts
        for Q in four:
            assert cfp.add_fp(red, P, Q) in pts


def test_full_torsion_count_is_square_when_present():
    red = cfp.reduce_curve(E35, 73)
    assert len(cfp.torsion_points(red, 2)) == 4
    assert len(cfp.torsion_points(red, 4)) == 16


def test_find_full_torsion_prime():
    p1 = cfp.find_full_torsion_prime(E31, 1)
    assert p1 == 7  # smallest good odd prime for a {2,3,5}-bad curve
    p2 = cfp.find_full_torsion_prime(E31, 2)
    red = cfp.reduce_curve(E31, p2)
    assert len(cfp.torsion_points(red, 2)) == 4
    p4 = cfp.find_full_torsion_prime(E35, 4)
    assert p4 % 4 == 1  # Weil pairing necessary condition
    with pytest.raises(NoQualifyingPrime):
        cfp.find_full_torsion_prime(E35, 4, bound=10)


def test_reduction_is_homomorphism():
    rng = random.Random(23)
    pts = [cq.scalar_mul(E35, n, UP) for n in range(-10, 11)]
    pts += [cq.add(E35, P, point(-1, 0)) for P in pts[:5]]
    for _ in range(100):
        P, Q = rng.choice(pts), rng.choice(pts)
        p = rng.choice([5, 7, 11, 13, 17])
        lhs = cfp.reduce_point(E35, cq.add(E35, P, Q), p)
        red = cfp.reduce_curve(E35, p)
        rhs = cfp.add_fp(red, cfp.reduce_point(E35, P, p), cfp.reduce_point(E35, Q, p))
        assert lhs == rhs


def test_point_order_divides_group_order():
    red = cfp.reduce_curve(E35, 101)
    order = cfp.group_order(red)
    for P in cfp.all_points(red)[:25]:
        o = cfp.point_order(red, P)
        assert order % o == 0
        assert cfp.scalar_mul_fp(red, o, P).is_infinity


@pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba unavailable")
def test_kernel_paths_agree():
    for p, curve in ((101, (0, -21, -20)), (1009, (3, 5, 7)), (10007, (0, 1, 0))):
        A, B, C = (c % p for c in curve)
        assert K.order_count_np(p, A, B, C) == K.order_count_nb(p, A, B, C)
        xs_np, ys_np = K.all_points_np(p, A, B, C)
        xs_nb, ys_nb = K.all_points_nb(p, A, B, C)
        assert np.array_equal(xs_np, xs_nb)
        assert np.array_equal(ys_np, ys_nb)
        for N in (2, 3, 12):
            mask_np = K.killed_by_np(p, A, B, C, N, xs_np, ys_np)
            mask_nb = K.killed_by_nb(p, A, B, C, N, xs_np, ys_np)
            assert np.array_equal(mask_np, mask_nb)


def test_kernel_killed_by_against_slow_reference():
    p, curve = 61, (0, -21, -20)
    A, B, C = (c % p for c in curve)
    E = CurveFp(p, 0, A, 0, B, C)
    xs, ys = K.all_points(p, A, B, C)
    mask = K.killed_by(p, A, B, C, 6, xs, ys)
    for x, y, killed in zip(xs, ys, mask):
        P = PointFp(int(x), int(y))
        assert cfp.scalar_mul_fp(E, 6, P).is_infinity == bool(killed)


def test_curvefp_validation():
    with pytest.raises(BadReductionPrime):
        CurveFp(2, 0, 0, 0, 1, 1)
    with pytest.raises(BadReductionPrime):
        CurveFp(5, 0, 0, 0, 0, 0)
    with pytest.raises(InputError):
        cfp.torsion_points(cfp.reduce_curve(E35, 5), 10)  # 5 | 10
