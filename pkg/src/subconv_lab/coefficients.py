"""Satake-parameter model of GL(3) Hecke eigenvalues lambda(m, n).

The local value at a prime p is the Schur polynomial

    lambda(p^a, p^b) = s_{(a+b, a, 0)}(beta_1, beta_2, beta_3)

of the local parameter triple, evaluated by the 3x3 Jacobi-Trudi determinant in
the complete homogeneous polynomials h_k.  With beta = (1, 1, 1) every h_k is
an integer and the result is exact; this is the d_3 (minimal parabolic
Eisenstein) case with lambda(1, n) = d_3(n).

In ``unitary`` mode the local triple at p is (p^{-alpha_1}, p^{-alpha_2},
p^{-alpha_3}) for a purely imaginary archimedean triple, unless overridden per
prime; each such triple has modulus-one entries with product 1.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .arith import divisors, factorize, mobius
from .report import Cell, SweepReport

Triple = tuple[complex, complex, complex]


@dataclass(frozen=True)
class SatakeTriple:
    """Archimedean Langlands parameters; they sum to zero and |Re| < 1/2."""

    alpha1: complex = 0
    alpha2: complex = 0
    alpha3: complex = 0

    def __post_init__(self):
        if abs(self.alpha1 + self.alpha2 + self.alpha3) > 1e-12:
            raise ValueError("Langlands parameters must sum to zero")
        if any(abs(complex(a).real) >= 0.5 for a in self.as_tuple()):
            raise ValueError("need |Re(alpha_i)| < 1/2")

    def as_tuple(self) -> Triple:
        return (self.alpha1, self.alpha2, self.alpha3)

    @property
    def is_trivial(self) -> bool:
        return all(a == 0 for a in self.as_tuple())

    @property
    def is_self_dual(self) -> bool:
        # the contragredient has parameters {-alpha}
        key = lambda z: (round(z.real, 12), round(z.imag, 12))
        a = sorted((complex(z) for z in self.as_tuple()), key=key)
        b = sorted((-complex(z) for z in self.as_tuple()), key=key)
        return all(abs(x - y) < 1e-12 for x, y in zip(a, b))


def complete_homogeneous(triple: Triple, kmax: int) -> list:
    """h_0..h_kmax of three variables via h_k = e1 h_{k-1} - e2 h_{k-2} + e3 h_{k-3}."""
    b1, b2, b3 = triple
    e1, e2, e3 = b1 + b2 + b3, b1 * b2 + b1 * b3 + b2 * b3, b1 * b2 * b3
    h = [1, e1, e1 * e1 - e2]
    for k in range(3, kmax + 1):
        h.append(e1 * h[k - 1] - e2 * h[k - 2] + e3 * h[k - 3])
    return h[: kmax + 1]


def schur3(partition: tuple[int, int, int], triple: Triple):
    """Schur polynomial s_partition(triple) by the Jacobi-Trudi determinant."""
    l1, l2, l3 = partition
    h = complete_homogeneous(triple, l1 + 2)

    def H(k):
        return h[k] if k >= 0 else 0

    m = [[H(li - i + j) for j in range(3)] for i, li in enumerate((l1, l2, l3))]
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def weyl_dimension(a: int, b: int) -> int:
    return (a + 1) * (b + 1) * (a + b + 2) // 2


@dataclass
class HeckeCoefficientModel:
    mode: str = "trivial"
    archimedean: SatakeTriple = field(default_factory=SatakeTriple)
    local_overrides: Mapping[int, Triple] = field(default_factory=dict)
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("trivial", "unitary"):
            raise ValueError(f"unknown coefficient mode {self.mode!r}")
        if self.mode == "trivial" and (self.local_overrides or not self.archimedean.is_trivial):
            raise ValueError("trivial mode takes no parameters")
        if self.mode == "unitary":
            if any(abs(complex(a).real) > 1e-12 for a in self.archimedean.as_tuple()):
                raise ValueError("unitary mode needs purely imaginary archimedean parameters")
            for p, t in self.local_overrides.items():
                if any(abs(abs(b) - 1) > 1e-12 for b in t) or abs(t[0] * t[1] * t[2] - 1) > 1e-12:
                    raise ValueError(f"local triple at {p} must be unitary with product 1")

    @classmethod
    def trivial(cls) -> "HeckeCoefficientModel":
        return cls("trivial")

    @classmethod
    def unitary(cls, archimedean: SatakeTriple, overrides: Mapping[int, Triple] | None = None):
        return cls("unitary", archimedean, dict(overrides or {}))

    def local_triple(self, p: int) -> Triple:
        if self.mode == "trivial":
            return (1, 1, 1)
        if p in self.local_overrides:
            return tuple(complex(b) for b in self.local_overrides[p])
        return tuple(complex(p ** (-complex(a))) for a in self.archimedean.as_tuple())

    def local(self, p: int, a: int, b: int):
        key = (p, a, b)
        val = self._memo.get(key)
        if val is None:
            val = schur3((a + b, a, 0), self.local_triple(p))
            self._memo[key] = val
        return val

    def warm(self, primes, max_exponent: int) -> None:
        """Pre-populate the memo table so concurrent readers never write."""
        for p in primes:
            for a in range(max_exponent + 1):
                for b in range(max_exponent + 1):
                    self.local(p, a, b)


def lambda_(model: HeckeCoefficientModel, m: int, n: int) -> complex:
    """lambda(m, n) as a product of local Schur values; exact ints in trivial mode."""
    return complex(lambda_exact(model, m, n))


def lambda_exact(model: HeckeCoefficientModel, m: int, n: int):
    if m < 1 or n < 1:
        raise ValueError("lambda needs positive arguments")
    if m > 10**6 or n > 10**6:
        raise ValueError("lambda supports arguments up to 10**6")
    fm, fn = factorize(m) if m > 1 else {}, factorize(n) if n > 1 else {}
    out = 1
    for p in set(fm) | set(fn):
        out = out * model.local(p, fm.get(p, 0), fn.get(p, 0))
    return out


def d3_bruteforce(n: int) -> int:
    """Number of ordered triples (x, y, z) with xyz = n."""
    return sum(1 for x in divisors(n) for y in divisors(n // x))


def _smallest_prime_factors(x: int) -> np.ndarray:
    spf = np.zeros(x + 1, dtype=np.int64)
    for p in range(2, x + 1):
        if spf[p] == 0:
            spf[p::p][spf[p::p] == 0] = p
    return spf


def coefficient_tables(model: HeckeCoefficientModel, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (lambda(1, n), lambda(n, 1)) for 0 <= n <= x (index 0 unused)."""
    spf = _smallest_prime_factors(max(x, 1))
    dtype = np.int64 if model.mode == "trivial" else complex
    right = np.zeros(x + 1, dtype=dtype)
    left = np.zeros(x + 1, dtype=dtype)
    if x >= 1:
        right[1] = left[1] = 1
    for n in range(2, x + 1):
        p = int(spf[n])
        k, r = 0, n
        while r % p == 0:
            r //= p
            k += 1
        right[n] = right[r] * model.local(p, 0, k)
        left[n] = left[r] * model.local(p, k, 0)
    return right, left


def ramanujan_average_check(
    model: HeckeCoefficientModel, x: float, guard: float = 10.0, strict: bool = True
) -> SweepReport:
    """Sum |lambda(n1, n2)|^2 over n1^2 n2 <= x, at each decade 10^2..x and at x.

    Uses lambda(n1, n2) = sum_{d | (n1, n2)} mu(d) lambda(n1/d, 1) lambda(1, n2/d).
    The ratio to x (log x)^4 is compared with ``guard`` (empirical regression
    guard, not a constant from the literature).
    """
    from .errors import GuardExceeded

    if x < 1 or x > 10**6:
        raise ValueError("x must lie in [1, 10**6]")
    start = time.perf_counter()
    X = int(math.floor(x))
    right, left = coefficient_tables(model, X)
    sq = np.zeros(X + 1)  # sq[t] = sum of |lambda(n1,n2)|^2 with n1^2 n2 = t
    n1 = 1
    while n1 * n1 <= X:
        top = X // (n1 * n1)
        vals = np.zeros(top + 1, dtype=complex)
        for d in divisors(n1):
            mu = mobius(d)
            if mu == 0 or d > top:
                continue
            k = np.arange(1, top // d + 1)
            vals[d * k] += mu * complex(left[n1 // d]) * right[k]
        n2 = np.arange(1, top + 1)
        np.add.at(sq, n1 * n1 * n2, np.abs(vals[1:]) ** 2)
        n1 += 1
    cumulative = np.cumsum(sq)
    points = [10**k for k in range(2, 7) if 10**k < x] + [x]
    report = SweepReport(
        suite="ramanujan-average",
        grid={"x_max": x, "mode": model.mode},
        guard=guard,
        guard_label="empirical regression guard",
        columns=["x"],
    )
    for xv in points:
        total = float(cumulative[int(math.floor(xv))])
        ref = xv * math.log(xv) ** 4 if xv > 1 else None
        report.cells.append(Cell({"x": xv}, total, ref, total / ref if ref else None))
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and not report.passed:
        raise GuardExceeded(f"Ramanujan-average ratio exceeds {guard}", witness=report.summary["argmax"], report=report)
    return report


def d3_table(x: int) -> np.ndarray:
    """d_3(n) for 0 <= n <= x (index 0 unused) by a prime sieve; exact int64."""
    out = np.ones(x + 1, dtype=np.int64)
    out[0] = 0
    if x < 2:
        return out
    is_p = np.ones(x + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(x**0.5) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    for p in np.flatnonzero(is_p):
        p = int(p)
        out[p::p] *= 3
        e, pe = 2, p * p
        while pe <= x:
            out[pe::pe] = out[pe::pe] * (e + 2) // e
            e, pe = e + 1, pe * p
    return out
