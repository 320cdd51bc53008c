import random

import pytest

from avseq import curve_fp as cfp
from avseq import curve_q as cq
from avseq import seqlib as sl
from avseq.arith import PrimeSet, is_prime
from avseq.curve_q import INFINITY, CurveQ, point
from avseq.errors import InputError, TorsionLift, TorsionPoint
from avseq.fixtures import (
    EX31_EXPECTED,
    EX35_EXPECTED,
    ex31_spec,
    ex35_spec,
)
from avseq.seqlib import ALL, QuotientAVSpec

E31 = CurveQ(0, 8, 0, -9, 0)
E35 = CurveQ(0, 0, 0, -21, -20)
E0 = CurveQ(0, 8, 0, 36, 288)
Q0 = point(8, -40)
UP = point(-3, 4)
T1, T2 = point(-1, 0), point(5, 0)


def test_enumerate_subgroup_trivial():
    spec = QuotientAVSpec(E35, 1, [], (UP,))
    assert sl.enumerate_subgroup(spec) == [(INFINITY,)]
    assert spec.exponent == 1


def test_enumerate_subgroup_ex35():
    spec = ex35_spec()
    H = sl.enumerate_subgroup(spec)
    assert len(H) == 8
    assert spec.exponent == 2
    T3 = cq.add(E35, T1, T2)
    for h in H:
        diff = cq.add(E35, h[0], cq.neg(E35, h[1]))
        assert diff in (INFINITY, T3)


def test_enumerate_subgroup_ex31():
    spec = ex31_spec()
    H = sl.enumerate_subgroup(spec)
    assert len(H) == 4
    diag = {h[0] for h in H if h[0] == h[1]}
    assert diag == {INFINITY, point(0, 0)}


def test_congruence_primes_examples():
    q3 = cq.scalar_mul(E0, 3, Q0)
    got = sl.congruence_primes(E0, q3, INFINITY, PrimeSet([2]))
    assert set(got) == {7, 17, 41}
    assert sl.congruence_primes(E0, Q0, Q0, PrimeSet()) is ALL


def test_congruence_primes_brute_force_oracle():
    rng = random.Random(1009)
    spec = ex35_spec()
    s_eff = sl.effective_exclusions(E35, PrimeSet([2, 3]), extra=spec.exponent)
    disc = abs(int(E35.discriminant()))
    good = [p for p in range(5, 1000) if is_prime(p) and disc % p]
    h_components = sorted({c for h in sl.enumerate_subgroup(spec) for c in h},
                          key=cq._point_sort_key)
    for _ in range(10):
        n = rng.randrange(1, 9)
        R = cq.scalar_mul(E35, n, UP)
        h = rng.choice(h_components)
        if R == h:
            continue
        got = sl.congruence_primes(E35, R, h, s_eff)
        small = {p for p in got if p < 1000}
        brute = {p for p in good
                 if p not in s_eff
                 and cfp.reduce_point(E35, R, p) == cfp.reduce_point(E35, h, p)}
        assert small == brute


def test_c_n_elliptic_reference_terms():
    S = PrimeSet([2])
    for n, expected in ((1, 1), (4, 13 * 29 * 101), (5, 103 * 113 * 1087 * 2377)):
        term = sl.c_n_elliptic(E0, Q0, S, n)
        assert term.radical_value == expected


def test_c_n_elliptic_rejects_torsion():
    with pytest.raises(TorsionPoint):
        sl.c_n_elliptic(E35, T1, PrimeSet(), 3)


def test_c_n_quotient_reference_terms():
    spec = ex35_spec()
    S = PrimeSet([2, 3])
    for n in range(1, 7):
        assert sl.c_n_quotient(spec, S, n).radical_value == EX35_EXPECTED[n - 1]
    spec31 = ex31_spec()
    S31 = PrimeSet([2])
    for n in range(1, 8):
        assert sl.c_n_quotient(spec31, S31, n).radical_value == EX31_EXPECTED[n - 1]


def test_c_n_quotient_equals_elliptic_for_even_terms():
    spec = ex35_spec()
    S = PrimeSet([2, 3])
    twoU = cq.scalar_mul(E35, 2, UP)
    for n in (2, 4, 6):
        lhs = sl.c_n_quotient(spec, S, n).radical_value
        rhs = sl.c_n_elliptic(E35, twoU, S, n).radical_value
        assert lhs == rhs


def test_c_n_quotient_vanishes_at_odd_indices():
    spec = ex35_spec()
    S = PrimeSet([2, 3])
    for n in range(1, 14, 2):
        assert sl.c_n_quotient(spec, S, n).radical_value == 1


def test_c_n_quotient_torsion_lift():
    spec = QuotientAVSpec(E35, 1, [], (T1,))
    with pytest.raises(TorsionLift):
        sl.c_n_quotient(spec, PrimeSet(), 2)


def test_c_n_quotient_brute_force_membership():
    spec = ex35_spec()
    S = PrimeSet([2, 3])
    s_eff = sl.effective_exclusions(E35, S, extra=spec.exponent)
    disc = abs(int(E35.discriminant()))
    good = [p for p in range(5, 1000) if is_prime(p) and disc % p and p not in s_eff]
    H = sl.enumerate_subgroup(spec)
    for n in range(1, 13):
        term_primes = {p for p in sl.c_n_quotient(spec, S, n).primes() if p < 1000}
        nL = tuple(cq.scalar_mul(E35, n, L) for L in spec.lift)
        brute = set()
        for p in good:
            red = tuple(cfp.reduce_point(E35, Li, p) for Li in nL)
            hbar = {tuple(cfp.reduce_point(E35, c, p) for c in h) for h in H}
            if red in hbar:
                brute.add(p)
        assert term_primes == brute, n


def test_terms_squarefree_and_coprime_to_s():
    spec = ex35_spec()
    S = PrimeSet([2, 3])
    for n in range(1, 7):
        term = sl.c_n_quotient(spec, S, n)
        assert all(e == 1 for _, e in term.factorization.factors)
        assert all(p not in S for p in term.primes())
        assert term.factorization.value == term.radical_value


def test_s_enlargement_only_deletes_primes():
    spec = ex35_spec()
    S = PrimeSet([2, 3])
    bigger = PrimeSet([2, 3, 5])
    for n in (2, 4, 6):
        base = set(sl.c_n_quotient(spec, S, n).primes())
        shrunk = set(sl.c_n_quotient(spec, bigger, n).primes())
        assert shrunk == base - {5}


def test_elliptic_divisibility_of_term_primes():
    S = PrimeSet([2])
    terms = {n: set(sl.c_n_elliptic(E0, Q0, S, n).primes()) for n in range(1, 13)}
    for n in range(1, 13):
        for m in range(1, n):
            if n % m == 0:
                assert terms[m] <= terms[n]


def test_primitive_report_reference():
    S = PrimeSet([2])
    spec31 = ex31_spec()
    terms = [sl.c_n_quotient(spec31, S, n) for n in range(1, 8)]
    reported = sl.primitive_report(terms)
    assert set(reported[5].primitive_primes) == {11, 89, 2713, 8329}
    assert set(reported[3].primitive_primes) == {13, 29, 101}
    assert len(reported[0].primitive_primes) == 0
    with pytest.raises(InputError):
        sl.primitive_report(terms[1:])


def test_spec_validation():
    with pytest.raises(InputError):
        QuotientAVSpec(E35, 2, [], (UP,))  # lift length mismatch
    from avseq.errors import NotTorsion, OffCurve
    with pytest.raises(OffCurve):
        QuotientAVSpec(E35, 1, [((point(1, 1)),)], (UP,))
    with pytest.raises(NotTorsion):
        QuotientAVSpec(E35, 1, [(UP,)], (UP,))
    with pytest.raises(InputError):
        QuotientAVSpec(E35, 1, [(T1,)], (UP,), exponent=3)  # 3 does not kill H
