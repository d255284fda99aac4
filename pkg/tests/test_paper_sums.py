import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subconv_lab.arith import inv, units
from subconv_lab.characters import character, primitive_characters, principal_character
from subconv_lab.classical_sums import kloosterman as kloosterman_direct
from subconv_lab.errors import ModuliNotCoprime, NonInvertible, VanishingViolation
from subconv_lab.paper_sums import (
    MixedSumSpec,
    PaperModuli,
    bstar_branch_check,
    bstar_direct,
    c_error_sweep,
    char_exp_check,
    deligne_ratio_sweep,
    factorization_Astar,
    factorization_Bstar,
    lift_a,
    mixed_sum_S,
    sum_B,
    sum_C_error,
    sum_Cfrak,
    sum_Cfrak_closed,
    sum_Cstar,
)


def e(x):
    return cmath.exp(2j * math.pi * x)


CHI5 = primitive_characters(5)
CHI7 = primitive_characters(7)
CHI35 = primitive_characters(35)


def test_moduli_validation():
    with pytest.raises(ValueError):
        PaperModuli(5, 5)
    with pytest.raises(ValueError):
        PaperModuli(9, 7)
    assert PaperModuli(5, 7, 6).qhat(2) == 3


def test_lift_a_unique():
    a = lift_a(3, 4, 7, 10.0)
    assert 10 < a <= 14 and (a * 3 - 7) % 4 == 0
    with pytest.raises(NonInvertible):
        lift_a(2, 4, 7, 10.0)


# ---- C(m, q)

def _C_loop(n, a, m, q, M1, M2, chi):
    R = M1 * M1 * M2 * q
    abar = inv(a, q * M1)
    return sum(chi(b) * e(-abar * b / (q * M1 * M1)) * e(m * b / R) for b in range(R) if b % M1 == n % M1)


def test_C_error_matches_loop_and_q1_range():
    chi = CHI35[3]
    for q, a, m in ((1, 1, 7), (2, 1, 7), (2, 3, 4)):
        assert abs(sum_C_error(2, a, m, q, 5, 7, chi) - _C_loop(2, a, m, q, 5, 7, chi)) < 1e-9


def test_C_error_vanishing_and_ratio():
    chi = CHI35[0]
    # a m = 7 (mod 10) fails for m = 1
    assert abs(sum_C_error(1, 1, 1, 2, 5, 7, chi)) < 1e-8
    live = sum_C_error(1, 1, 7, 2, 5, 7, chi)
    assert abs(live) / (2 * 5 * math.sqrt(7)) <= 1.5
    with pytest.raises(ModuliNotCoprime):
        sum_C_error(1, 1, 7, 5, 5, 7, chi)


def test_C_error_sweep_small():
    r = c_error_sweep(instances=((5, 7, 2),))
    assert r.passed and not r.violations and r.summary["max_ratio"] <= 1.5


# ---- dual character sum

def test_Cfrak_vanishing():
    chi1, chi2 = CHI5[0], CHI7[1]
    # gcd(m, q) > 1
    assert abs(sum_Cfrak(1, 1, 2, 2, chi1, chi2)) < 1e-8
    # a m != M2 mod q
    assert abs(sum_Cfrak(1, 1, 1, 3, chi1, chi2)) < 1e-8
    assert sum_Cfrak_closed(1, 1, 1, 3, chi1, chi2) == 0


def test_Cfrak_closed_form_exhaustive_5_7_3():
    q = 3
    for chi1 in CHI5:
        for chi2 in CHI7:
            for a in units(q):
                for b in units(5):
                    for m in range(q * 35):
                        bf = sum_Cfrak(a, b, m, q, chi1, chi2)
                        cf = sum_Cfrak_closed(a, b, m, q, chi1, chi2)
                        assert abs(bf - cf) <= 1e-9 * q * math.sqrt(35)


def test_char_exp_check_seeded_subsample_is_deterministic():
    r1 = char_exp_check(moduli=((5, 7),), qs=(1, 2), pairs_per_moduli=2, seed=3)
    r2 = char_exp_check(moduli=((5, 7),), qs=(1, 2), pairs_per_moduli=2, seed=3)
    assert r1.passed and [c.to_dict() for c in r1.cells] == [c.to_dict() for c in r2.cells]


# ---- B and C*

def _B_loop(n1, n2, m, q, chi1, M2):
    M1 = chi1.modulus
    qh = q // n1
    first = kloosterman_direct(M2 * inv(m * M1 % qh, qh) if qh > 1 else 0, n2 * inv(M1 % qh, qh) if qh > 1 else 0, qh)
    second = sum(np.conj(chi1(inv(M2, M1) * m - b)) * kloosterman_direct(inv(b * qh, M1), n2 * inv(qh, M1), M1) for b in units(M1))
    return first * second


@pytest.mark.parametrize("n1,n2,m,q", [(1, 3, 1, 1), (2, 3, 1, 2), (1, 10, 3, 2), (1, 4, 2, 3), (3, 0, 4, 3)])
def test_B_against_loop(n1, n2, m, q):
    chi1 = CHI5[2]
    assert abs(sum_B(n1, n2, m, q, chi1, 7) - _B_loop(n1, n2, m, q, chi1, 7)) < 1e-9


def test_B_qhat_one_and_conjugation():
    chi1 = CHI5[1]
    # qhat = 1: first factor is 1, so B equals the M1 part alone
    second = sum(np.conj(chi1(inv(7, 5) * 3 - b)) * kloosterman_direct(inv(b, 5), 2, 5) for b in units(5))
    assert abs(sum_B(2, 2, 3, 2, chi1, 7) - second) < 1e-9
    # Kloosterman sums are real, so conjugating chi1 conjugates B
    for n2 in range(10):
        assert abs(sum_B(1, n2, 3, 2, chi1.conj(), 7) - np.conj(sum_B(1, n2, 3, 2, chi1, 7))) < 1e-9


def test_Cstar_zero_frequency():
    chi1 = CHI5[0]
    scale = 2 * 3 * 5**2.5
    assert abs(sum_Cstar(1, 0, 1, 1, 2, 3, chi1, 7)) < 1e-6 * scale
    v = sum_Cstar(1, 0, 3, 3, 2, 2, chi1, 7)
    assert v.real >= 0 and abs(v.imag) < 1e-9 * scale


@pytest.mark.parametrize("n2,m,mp", [(13, 7, 11), (1, 1, 1), (5, 13, 1), (29, 11, 19)])
def test_Cstar_factorizes(n2, m, mp):
    chi1 = CHI5[-1]
    C = sum_Cstar(1, n2, m, mp, 2, 3, chi1, 7)
    A = factorization_Astar(n2, m, mp, 2, 3, 5, 7)
    B = factorization_Bstar(n2, m, mp, 2, 3, chi1, 7)
    assert abs(C - A * B) <= 1e-9 * max(abs(C), 6 * 5**2.5)


# ---- A*

def test_Astar_zero_frequency_examples():
    p = 3
    assert abs(factorization_Astar(0, 1, 4, p, p, 5, 7) - p * p * (p - 1)) < 1e-9
    assert abs(factorization_Astar(0, 1, 1, 2, 3, 5, 7)) < 1e-9
    # p does not divide m - m': c_p = -1
    assert abs(factorization_Astar(0, 1, 2, p, p, 5, 7) + p * p) < 1e-9


# ---- B* and the mixed sum

def test_Bstar_branches_5_7():
    for chi1 in CHI5:
        for qh in (1, 2, 3):
            for qhp in (1, 2, 3):
                for m in range(5):
                    for mp in range(5):
                        for n2 in range(5):
                            factorization_Bstar(n2, m, mp, qh, qhp, chi1, 7)


def test_Bstar_check_suite_and_diagonal_guard():
    r = bstar_branch_check(M1s=(5,))
    assert r.passed and r.summary["diagonal_ratio_max"] <= 2.0


def test_mixed_sum_principal_is_exponential_sum():
    spec = MixedSumSpec(5, 7, 2, 3, 1, 2, 3)
    chi0 = principal_character(5)
    it = {x: inv(x, 5) for x in range(1, 5)}
    total = 0
    for x1 in range(1, 5):
        for x2 in range(1, 5):
            for x3 in range(1, 5):
                if (spec.m2bar * 2 - x1) % 5 and (spec.m2bar * 3 - x2) % 5:
                    g = -spec.a1 * 3 * it[x1] * (1 - 2 * x3) + spec.a2 * it[x2] * (it[x3] - 2)
                    total += e(g / 5)
    assert abs(mixed_sum_S(spec, chi0) - total) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 5))
def test_mixed_sum_conjugation(m, mp, n2, qh, qhp, j):
    chi1 = CHI7[j % len(CHI7)]
    spec = MixedSumSpec(7, 5, m, mp, n2, qh, qhp)
    neg = MixedSumSpec(7, 5, m, mp, -n2, qh, qhp)
    assert abs(mixed_sum_S(neg, chi1.conj()) - np.conj(mixed_sum_S(spec, chi1))) < 1e-9


def test_mixed_sum_deligne_guard_M1_7():
    worst = 0.0
    for chi1 in CHI7:
        for m in range(7):
            for n2 in range(1, 7):
                worst = max(worst, abs(mixed_sum_S(MixedSumSpec(7, 11, m, 3, n2, 2, 3), chi1)))
    assert worst <= 20 * 7**1.5


def test_mixed_spec_rejects_diagonal_branch():
    with pytest.raises(ValueError):
        MixedSumSpec(5, 7, 1, 1, 5, 1, 1)


def test_deligne_sweep_empty_and_deterministic():
    empty = deligne_ratio_sweep(M1s=())
    assert empty.passed and empty.cells == [] and empty.summary["n_cells"] == 0
    a, b = deligne_ratio_sweep(M1s=(5,)), deligne_ratio_sweep(M1s=(5,))
    assert a.passed and math.isfinite(a.summary["max_ratio"])
    assert [c.to_dict() for c in a.cells] == [c.to_dict() for c in b.cells]
    assert a.summary["max_ratio"] == b.summary["max_ratio"]


def test_bstar_direct_rejects_shared_factor():
    with pytest.raises(ModuliNotCoprime):
        bstar_direct(1, 1, 1, 5, 1, CHI5[0], 7)
