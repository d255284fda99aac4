import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subconv_lab.arith import (
    ExactPhase,
    ResidueClass,
    crt_combine,
    divisors,
    e_residues,
    euler_phi,
    factorize,
    inv,
    kahan_sum,
    mobius,
    mod_inverse,
    multiplicative_order,
    phase_to_complex,
    primitive_root,
    units,
)
from subconv_lab.errors import ModuliNotCoprime, NonInvertible, NotPrime


def test_mod_inverse_examples():
    assert mod_inverse(ResidueClass(1, 7)) == ResidueClass(1, 7)
    assert mod_inverse(ResidueClass(3, 7)).value == 5
    with pytest.raises(NonInvertible):
        mod_inverse(ResidueClass(2, 4))


def test_crt_examples():
    assert crt_combine(ResidueClass(0, 3), ResidueClass(0, 5)) == ResidueClass(0, 15)
    assert crt_combine(ResidueClass(2, 3), ResidueClass(3, 5)) == ResidueClass(8, 15)
    with pytest.raises(ModuliNotCoprime):
        crt_combine(ResidueClass(1, 4), ResidueClass(1, 6))


def test_primitive_root_examples():
    assert primitive_root(5).value == 2
    assert primitive_root(7).value == 3
    assert primitive_root(2).value == 1
    with pytest.raises(NotPrime):
        primitive_root(9)


def test_phase_examples():
    assert phase_to_complex(ExactPhase(0, 1)) == 1
    assert phase_to_complex(ExactPhase(1, 2)) == -1
    assert phase_to_complex(ExactPhase(1, 4)) == 1j
    assert ExactPhase(3, 6) == ExactPhase(1, 2)
    assert ExactPhase(1, 3) + ExactPhase(2, 3) == ExactPhase(0, 1)


def test_kahan_examples():
    assert kahan_sum([]) == 0
    assert kahan_sum([1, -1]) == 0
    assert abs(kahan_sum([1e-6] * 10**6) - 1) < 1e-12


def test_residue_rejects_bad_modulus():
    with pytest.raises(ValueError):
        ResidueClass(1, 0)
    with pytest.raises(ValueError):
        ResidueClass(1, 2**31 + 1)


def test_equal_phases_are_bit_identical():
    # e(1/3) reached through different denominators
    a = e_residues(np.array([1]), 3)[0]
    b = phase_to_complex(ExactPhase(2, 6))
    assert a == b


@given(st.integers(1, 5000))
def test_divisor_functions(n):
    ds = divisors(n)
    assert ds == [d for d in range(1, n + 1) if n % d == 0]
    assert math.prod(p**k for p, k in factorize(n).items()) == n
    assert euler_phi(n) == len(units(n))
    # sum of mu(d) over d | n is [n == 1]
    assert sum(mobius(d) for d in ds) == (1 if n == 1 else 0)


@given(st.integers(2, 10**6), st.integers(-10**6, 10**6))
def test_inverse_property(m, a):
    if math.gcd(a, m) != 1:
        with pytest.raises(NonInvertible):
            inv(a, m)
    else:
        assert a * inv(a, m) % m == 1


@given(st.integers(0, 10**4), st.integers(1, 97), st.integers(0, 10**4), st.integers(1, 89))
def test_crt_property(r1, m1, r2, m2):
    if math.gcd(m1, m2) != 1:
        return
    x = crt_combine(ResidueClass(r1, m1), ResidueClass(r2, m2))
    assert x.modulus == m1 * m2
    assert x.value % m1 == r1 % m1 and x.value % m2 == r2 % m2


@given(st.sampled_from([3, 5, 7, 11, 13, 101, 997]))
def test_primitive_root_generates(p):
    assert multiplicative_order(primitive_root(p).value, p) == p - 1


@given(st.integers(-50, 50), st.integers(1, 60), st.integers(-50, 50), st.integers(1, 60))
def test_phase_addition_matches_fractions(a, b, c, d):
    s = ExactPhase(a, b) + ExactPhase(c, d)
    f = Fraction(a, b) + Fraction(c, d)
    assert Fraction(s.numerator, s.denominator) == f - math.floor(f)
    assert abs(complex(s) - complex(ExactPhase(a, b)) * complex(ExactPhase(c, d))) < 1e-14
