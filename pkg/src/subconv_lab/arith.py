"""Exact residue arithmetic and exact additive phases.

Residues are plain Python ints (arbitrary precision), so products of desk-scale
moduli never wrap.  Phases ``e(num/den)`` stay as reduced fractions until the
last moment; complex conversion goes through a cached table of roots of unity
so that equal phases always map to bit-identical complex numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import ModuliNotCoprime, NonInvertible, NotPrime

MAX_MODULUS = 2**31


@dataclass(frozen=True)
class ResidueClass:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if self.modulus > MAX_MODULUS:
            raise ValueError(f"modulus {self.modulus} exceeds 2**31")
        object.__setattr__(self, "value", self.value % self.modulus)

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class ExactPhase:
    """The phase e(numerator/denominator), stored reduced with 0 <= num < den."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError("denominator must be positive")
        g = math.gcd(self.numerator, self.denominator)
        den = self.denominator // g
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "numerator", (self.numerator // g) % den)

    def __add__(self, other: "ExactPhase") -> "ExactPhase":
        den = math.lcm(self.denominator, other.denominator)
        num = self.numerator * (den // self.denominator) + other.numerator * (den // other.denominator)
        return ExactPhase(num, den)

    def __neg__(self) -> "ExactPhase":
        return ExactPhase(-self.numerator, self.denominator)

    def __sub__(self, other: "ExactPhase") -> "ExactPhase":
        return self + (-other)

    def __complex__(self) -> complex:
        return phase_to_complex(self)


def mod_inverse(a: ResidueClass) -> ResidueClass:
    if math.gcd(a.value, a.modulus) != 1:
        raise NonInvertible(f"{a.value} is not invertible mod {a.modulus}")
    if a.modulus == 1:
        return ResidueClass(0, 1)
    return ResidueClass(pow(a.value, -1, a.modulus), a.modulus)


def inv(a: int, m: int) -> int:
    """Integer form of :func:`mod_inverse`; the inverse mod 1 is 0."""
    if m == 1:
        return 0
    if math.gcd(a, m) != 1:
        raise NonInvertible(f"{a} is not invertible mod {m}")
    return pow(a, -1, m)


def crt_combine(r1: ResidueClass, r2: ResidueClass) -> ResidueClass:
    m1, m2 = r1.modulus, r2.modulus
    if math.gcd(m1, m2) != 1:
        raise ModuliNotCoprime(f"moduli {m1} and {m2} share a factor")
    m = m1 * m2
    x = (r1.value * m2 * inv(m2, m1) + r2.value * m1 * inv(m1, m2)) % m
    return ResidueClass(x, m)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for n up to ~1e12."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def num_divisors(n: int) -> int:
    return math.prod(e + 1 for e in factorize(n).values())


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def units(m: int) -> list[int]:
    """Residues in [0, m) coprime to m (for m = 1 this is [0])."""
    return [x for x in range(m) if math.gcd(x, m) == 1]


def multiplicative_order(g: int, m: int) -> int:
    if math.gcd(g, m) != 1:
        raise NonInvertible(f"{g} is not a unit mod {m}")
    k, x = 1, g % m
    while x != 1 % m:
        x = x * g % m
        k += 1
    return k


def primitive_root(p: int) -> ResidueClass:
    """Smallest generator of (Z/pZ)*."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return ResidueClass(primitive_root_mod(p), p)


@lru_cache(maxsize=None)
def primitive_root_mod(m: int) -> int:
    """Smallest generator of the cyclic group (Z/mZ)*; m = 1, 2, 4, p^k, 2p^k."""
    if m <= 2:
        return 1
    phi = euler_phi(m)
    prime_factors = list(factorize(phi))
    for g in range(2, m):
        if math.gcd(g, m) != 1:
            continue
        if all(pow(g, phi // r, m) != 1 for r in prime_factors):
            return g
    raise ValueError(f"(Z/{m}Z)* is not cyclic")


def phase_to_complex(phase: ExactPhase) -> complex:
    return complex(roots_of_unity(phase.denominator)[phase.numerator])


@lru_cache(maxsize=256)
def roots_of_unity(m: int) -> np.ndarray:
    """Table of e(k/m) for k = 0..m-1, with the exactly representable ones pinned."""
    k = np.arange(m)
    table = np.exp(2j * np.pi * k / m)
    # the quarter points are exact; cos/sin of 2πk/m leaves ~1e-16 residue there
    for num, val in ((0, 1), (1, 1j), (2, -1), (3, -1j)):
        if (num * m) % 4 == 0:
            table[num * m // 4] = val
    table.setflags(write=False)
    return table


def e_residues(r, m: int) -> np.ndarray:
    """e(r/m) for integer array r, reduced exactly mod m first."""
    return roots_of_unity(m)[np.mod(r, m)]


def kahan_sum(terms: Iterable[complex]) -> complex:
    """Correctly rounded sum of complex terms (real and imaginary parts via fsum)."""
    re, im = [], []
    for z in terms:
        z = complex(z)
        re.append(z.real)
        im.append(z.imag)
    return complex(math.fsum(re), math.fsum(im))


@lru_cache(maxsize=4096)
def inverse_table(m: int) -> np.ndarray:
    """inverse_table(m)[x] = x^{-1} mod m for units x, -1 elsewhere."""
    out = np.full(m, -1, dtype=np.int64)
    for x in units(m):
        out[x] = inv(x, m) if m > 1 else 0
    out.setflags(write=False)
    return out
