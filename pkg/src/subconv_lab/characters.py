"""Dirichlet characters in CRT-factored form.

Indexing convention
-------------------
Write the modulus as a product of prime powers ``p^k`` in increasing order of
``p``.  Each component group ``(Z/p^k)*`` is cyclic (moduli divisible by 8 are
rejected) with generator ``g`` = the smallest primitive root mod ``p^k``.  The
component character with exponent index ``j`` is

    chi(g^r) = e(j * r / phi(p^k)).

A composite character is the product of its components, and an integer index
is decoded in mixed radix, least significant digit on the smallest prime.  For
a prime modulus this is simply ``chi(g^r) = e(index * r / (p - 1))``.

Character values are stored as exact exponents over the common order
``D = lcm(phi(p^k))`` and only turned into complex numbers through
:func:`subconv_lab.arith.roots_of_unity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .arith import e_residues, euler_phi, factorize, primitive_root_mod, roots_of_unity
from .errors import ModuliNotCoprime, UnsupportedModulus


@dataclass(frozen=True)
class CharacterComponent:
    prime: int
    exponent: int
    generator: int
    index: int

    @property
    def modulus(self) -> int:
        return self.prime**self.exponent

    @property
    def order_of_group(self) -> int:
        return euler_phi(self.modulus)

    def conductor(self) -> int:
        phi = self.order_of_group
        j = self.index % phi
        if j == 0:
            return 1
        # chi is trivial on the kernel of reduction to p^e iff phi | j * phi(p^e)
        for e in range(1, self.exponent + 1):
            if (j * euler_phi(self.prime**e)) % phi == 0:
                return self.prime**e
        return self.modulus


@lru_cache(maxsize=512)
def _discrete_logs(m: int) -> np.ndarray:
    """dlog[x] = r with g^r = x mod m for units x, -1 otherwise."""
    g = primitive_root_mod(m)
    out = np.full(m, -1, dtype=np.int64)
    x = 1 % m
    for r in range(euler_phi(m)):
        out[x] = r
        x = x * g % m
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    components: tuple[CharacterComponent, ...] = field(repr=False)

    @cached_property
    def order_denominator(self) -> int:
        return math.lcm(1, *(c.order_of_group for c in self.components))

    @cached_property
    def exponents(self) -> np.ndarray:
        """Exact value table: chi(n) = e(exponents[n] / D), or 0 where exponents[n] < 0."""
        M, D = self.modulus, self.order_denominator
        n = np.arange(M)
        total = np.zeros(M, dtype=np.int64)
        dead = np.zeros(M, dtype=bool)
        for c in self.components:
            logs = _discrete_logs(c.modulus)[n % c.modulus]
            dead |= logs < 0
            scale = D // c.order_of_group
            total += (c.index % c.order_of_group) * np.where(logs < 0, 0, logs) * scale
        out = np.mod(total, D)
        out[dead] = -1
        out.setflags(write=False)
        return out

    @cached_property
    def values(self) -> np.ndarray:
        ex = self.exponents
        table = roots_of_unity(self.order_denominator)
        vals = np.where(ex < 0, 0, table[np.where(ex < 0, 0, ex)])
        vals = vals.astype(complex)
        vals.setflags(write=False)
        return vals

    def __call__(self, n) -> complex | np.ndarray:
        return evaluate(self, n)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if math.gcd(self.modulus, other.modulus) != 1:
            raise ModuliNotCoprime(f"moduli {self.modulus} and {other.modulus} share a factor")
        comps = tuple(sorted(self.components + other.components, key=lambda c: c.prime))
        return DirichletCharacter(self.modulus * other.modulus, comps)

    def conj(self) -> "DirichletCharacter":
        comps = tuple(
            CharacterComponent(c.prime, c.exponent, c.generator, (-c.index) % c.order_of_group)
            for c in self.components
        )
        return DirichletCharacter(self.modulus, comps)

    @property
    def index(self) -> int:
        out, radix = 0, 1
        for c in self.components:
            out += (c.index % c.order_of_group) * radix
            radix *= c.order_of_group
        return out

    @property
    def is_principal(self) -> bool:
        return all(c.index % c.order_of_group == 0 for c in self.components)

    @property
    def is_primitive(self) -> bool:
        return conductor(self) == self.modulus

    @property
    def parity(self) -> int:
        v = evaluate(self, -1)
        return 1 if v.real > 0 else -1

    def label(self) -> str:
        return f"chi_{self.modulus}[{self.index}]"


@dataclass(frozen=True)
class GaussSumResult:
    tau: complex
    epsilon: complex


def _check_modulus(modulus: int) -> None:
    if modulus < 1:
        raise UnsupportedModulus(f"modulus must be positive, got {modulus}")
    if modulus % 8 == 0:
        raise UnsupportedModulus(f"modulus {modulus} is divisible by 8 (non-cyclic 2-part)")


def character(modulus: int, index: int | Sequence[int]) -> DirichletCharacter:
    """Character mod ``modulus``; see the module docstring for the index convention."""
    _check_modulus(modulus)
    parts = sorted(factorize(modulus).items()) if modulus > 1 else []
    if isinstance(index, (int, np.integer)):
        digits, rest = [], int(index)
        for p, k in parts:
            phi = euler_phi(p**k)
            digits.append(rest % phi)
            rest //= phi
    else:
        digits = [int(i) for i in index]
        if len(digits) != len(parts):
            raise ValueError(f"need {len(parts)} component indices, got {len(digits)}")
    comps = tuple(
        CharacterComponent(p, k, primitive_root_mod(p**k), d % euler_phi(p**k))
        for (p, k), d in zip(parts, digits)
    )
    return DirichletCharacter(modulus, comps)


def characters_mod(modulus: int) -> Iterator[DirichletCharacter]:
    _check_modulus(modulus)
    for j in range(euler_phi(modulus)):
        yield character(modulus, j)


def primitive_characters(modulus: int) -> list[DirichletCharacter]:
    return [chi for chi in characters_mod(modulus) if chi.is_primitive]


def principal_character(modulus: int) -> DirichletCharacter:
    return character(modulus, 0)


def evaluate(chi: DirichletCharacter, n):
    """chi(n); zero when gcd(n, modulus) > 1.  Accepts ints or integer arrays."""
    if np.ndim(n) == 0:
        return complex(chi.values[int(n) % chi.modulus])
    return chi.values[np.mod(np.asarray(n, dtype=np.int64), chi.modulus)]


def gauss_sum(chi: DirichletCharacter) -> GaussSumResult:
    M = chi.modulus
    a = np.arange(M)
    tau = complex(np.sum(chi.values * e_residues(a, M)))
    return GaussSumResult(tau=tau, epsilon=tau / math.sqrt(M))


def conductor(chi: DirichletCharacter) -> int:
    return math.prod(c.conductor() for c in chi.components)


def conductor_bruteforce(chi: DirichletCharacter) -> int:
    """Smallest f | M such that chi(n) = 1 whenever n = 1 mod f and gcd(n, M) = 1."""
    M = chi.modulus
    for f in range(1, M + 1):
        if M % f:
            continue
        ok = True
        for n in range(1, M, f):
            if math.gcd(n, M) == 1 and abs(evaluate(chi, n) - 1) > 1e-9:
                ok = False
                break
        if ok:
            return f
    return M
