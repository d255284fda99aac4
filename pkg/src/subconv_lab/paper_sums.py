"""Complete character sums of the twisted GL(3) argument, by brute force and in closed form.

Conventions: M = M1 M2 with M1 != M2 odd primes, chi = chi1 chi2 with chi_i
mod M_i, ``xbar`` is an inverse modulo whatever modulus the expression lives
in, and chi(0) = 0.  Every closed form here is checked against the brute-force
definition, which is the ground truth.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import e_residues, euler_phi, inv, is_prime, units
from .characters import DirichletCharacter, gauss_sum
from .classical_sums import kloosterman_table, ramanujan_closed_form
from .errors import (
    BranchIdentityMismatch,
    ClosedFormMismatch,
    ModuliNotCoprime,
    NonInvertible,
    VanishingViolation,
)

IDENTITY_RTOL = 1e-6


@dataclass(frozen=True)
class PaperModuli:
    M1: int
    M2: int
    q: int = 1

    def __post_init__(self):
        for p in (self.M1, self.M2):
            if not (is_prime(p) and p % 2 == 1):
                raise ValueError(f"{p} must be an odd prime")
        if self.M1 == self.M2:
            raise ValueError("M1 and M2 must be distinct primes")
        if self.q < 1:
            raise ValueError("q must be positive")

    @property
    def M(self) -> int:
        return self.M1 * self.M2

    def qhat(self, n1: int) -> int:
        if self.q % n1:
            raise ValueError(f"n1={n1} does not divide q={self.q}")
        return self.q // n1


def lift_a(m: int, q: int, M2: int, Q: float) -> int:
    """The unique a in (Q, q + Q] with a m = M2 (mod q)."""
    if math.gcd(m, q) != 1:
        raise NonInvertible(f"m={m} is not invertible mod q={q}")
    r = (M2 * inv(m % q, q)) % q if q > 1 else 0
    lo = math.floor(Q) + 1
    hits = [a for a in range(lo, math.floor(q + Q) + 1) if a > Q and (a - r) % q == 0]
    if len(hits) != 1:
        raise ArithmeticError(f"a(m={m}, q={q}) is not unique in (Q, q+Q]: {hits}")
    return hits[0]


def _chi_at(chi: DirichletCharacter, n) -> np.ndarray:
    return chi.values[np.mod(np.asarray(n, dtype=np.int64), chi.modulus)]


def _kl(a, b, c: int) -> np.ndarray:
    """S(a, b; c) for integer arrays a, b (broadcast)."""
    t = kloosterman_table(c)
    return t[np.mod(a, c), np.mod(b, c)]


# ---------------------------------------------------------------- error sum C(m, q)


def sum_C_error(n: int, a: int, m: int, q: int, M1: int, M2: int, chi: DirichletCharacter) -> complex:
    """C(m,q) = sum_{b mod M1^2 M2 q, b = n (M1)} chi(b) e(-abar b/(q M1^2)) e(m b/(M1^2 M2 q)).

    Raises VanishingViolation if the sum is nonzero although a m != M2 (mod M1 q).
    """
    if math.gcd(a, q * M1) != 1:
        raise NonInvertible(f"a={a} is not invertible mod q M1={q * M1}")
    if math.gcd(q, M1 * M2) != 1:
        raise ModuliNotCoprime(f"q={q} shares a factor with M={M1 * M2}")
    R = M1 * M1 * M2 * q
    b = n % M1 + M1 * np.arange(M1 * M2 * q, dtype=np.int64)
    abar = inv(a, q * M1)
    # common denominator R: -abar b M2 + m b
    phase = e_residues((-abar * M2 + m) * b, R)
    val = complex(np.sum(_chi_at(chi, b) * phase))
    if (a * m - M2) % (M1 * q) != 0 and abs(val) > 1e-8 * q * M1 * math.sqrt(M2):
        raise VanishingViolation(
            f"C(m,q) = {val:.3g} does not vanish",
            witness={"n": n, "a": a, "m": m, "q": q, "M1": M1, "M2": M2},
        )
    return val


# ---------------------------------------------------------------- dual character sum


def sum_Cfrak(a: int, b: int, m: int, q: int, chi1: DirichletCharacter, chi2: DirichletCharacter) -> complex:
    """Brute force: sum_{c mod qM} chi(c) e(-(a' M1 + b q) c/(q M1) + c m/(q M)), a' = (a M1)bar mod q."""
    M1, M2 = chi1.modulus, chi2.modulus
    _check_cfrak(a, b, q, M1, M2)
    return complex(cfrak_bruteforce_all_m(a, b, q, chi1, chi2)[m % (q * M1 * M2)])


def _check_cfrak(a, b, q, M1, M2):
    if math.gcd(a, q) != 1:
        raise NonInvertible(f"a={a} is not invertible mod q={q}")
    if math.gcd(b, M1) != 1:
        raise NonInvertible(f"b={b} is not invertible mod M1={M1}")
    if math.gcd(q, M1 * M2) != 1 or math.gcd(M1, M2) != 1:
        raise ModuliNotCoprime("q, M1, M2 must be pairwise coprime")


def cfrak_bruteforce_all_m(a: int, b: int, q: int, chi1: DirichletCharacter, chi2: DirichletCharacter) -> np.ndarray:
    """Brute-force values for every m mod qM (exact phases, one matrix product)."""
    M1, M2 = chi1.modulus, chi2.modulus
    R = q * M1 * M2
    ap = inv((a * M1) % q, q) if q > 1 else 0
    c = np.arange(R, dtype=np.int64)
    chi = _chi_at(chi1, c) * _chi_at(chi2, c)
    lin = e_residues(-(ap * M1 + b * q) * M2 * c, R)
    return (chi * lin) @ e_residues(np.outer(c, c), R)


def sum_Cfrak_closed(a: int, b: int, m: int, q: int, chi1: DirichletCharacter, chi2: DirichletCharacter) -> complex:
    """eps1 eps2 q sqrt(M) chi2bar(m) chi2(q M1) chi1bar((q M2)bar m - b) if a m = M2 (q), else 0."""
    M1, M2 = chi1.modulus, chi2.modulus
    _check_cfrak(a, b, q, M1, M2)
    if (a * m - M2) % q != 0:
        return 0j
    eps = gauss_sum(chi1).epsilon * gauss_sum(chi2).epsilon
    x = (inv((q * M2) % M1, M1) * m - b) % M1
    return complex(
        eps * q * math.sqrt(M1 * M2)
        * np.conj(chi2(m)) * chi2(q * M1) * np.conj(chi1(x))
    )


def check_char_exp(a, b, m, q, chi1, chi2, rtol: float = IDENTITY_RTOL) -> float:
    """Relative discrepancy brute force vs closed form; raises ClosedFormMismatch above ``rtol``."""
    bf = sum_Cfrak(a, b, m, q, chi1, chi2)
    cf = sum_Cfrak_closed(a, b, m, q, chi1, chi2)
    scale = q * math.sqrt(chi1.modulus * chi2.modulus)
    err = abs(bf - cf) / scale
    if err > rtol:
        raise ClosedFormMismatch(
            f"closed form differs by {err:.3g}",
            witness={"a": a, "b": b, "m": m, "q": q, "chi1": chi1.label(), "chi2": chi2.label()},
        )
    return err


# ---------------------------------------------------------------- B, C*, A*, B*


def sum_B(n1: int, n2: int, m: int, q: int, chi1: DirichletCharacter, M2: int) -> complex:
    """B(n1,n2,m,q) = S(M2 (m M1)bar, n2 M1bar; qhat) * sum*_b chi1bar(M2bar m - b) S((b qhat)bar, n2 qhatbar; M1)."""
    M1 = chi1.modulus
    if q % n1:
        raise ValueError(f"n1={n1} does not divide q={q}")
    if math.gcd(q, M1) != 1:
        raise ModuliNotCoprime(f"q={q} is not coprime to M1={M1}")
    qh = q // n1
    if math.gcd(m, qh) != 1:
        raise NonInvertible(f"m={m} is not invertible mod qhat={qh}")
    return complex(_B_row(qh, m, chi1, M2)[n2 % (qh * M1)])


@lru_cache(maxsize=4096)
def _B_row(qh: int, m: int, chi1: DirichletCharacter, M2: int) -> np.ndarray:
    """B(., c, m, q) for every c mod qhat M1 (it is periodic with that period)."""
    M1 = chi1.modulus
    R = qh * M1
    c = np.arange(R, dtype=np.int64)
    if qh > 1:
        first = _kl(M2 * inv((m * M1) % qh, qh), c * inv(M1 % qh, qh), qh)
    else:
        first = np.ones(R)
    bs = np.array(units(M1), dtype=np.int64)
    w = np.conj(_chi_at(chi1, inv(M2 % M1, M1) * m - bs))
    ibq = np.array([inv(int(x) * qh % M1, M1) for x in bs])
    second = w @ _kl(ibq[:, None], (c * inv(qh % M1, M1))[None, :], M1)
    out = first * second
    out.setflags(write=False)
    return out


def cstar_all_n2(n1: int, m: int, mp: int, q: int, qp: int, chi1: DirichletCharacter, M2: int) -> np.ndarray:
    """C*(n1, n2, m, m', q, q') for every n2 mod qhat qhat' M1 (brute force, exact phases)."""
    M1 = chi1.modulus
    for x in (q, qp):
        if x % n1:
            raise ValueError(f"n1={n1} must divide q and q'")
    if math.gcd(q * qp, M1) != 1:
        raise ModuliNotCoprime("q q' must be coprime to M1")
    qh, qhp = q // n1, qp // n1
    R = qh * qhp * M1
    c = np.arange(R, dtype=np.int64)
    prod = _B_row(qh, m % (qh * M1), chi1, M2)[c % (qh * M1)] * np.conj(_B_row(qhp, mp % (qhp * M1), chi1, M2)[c % (qhp * M1)])
    return prod @ e_residues(np.outer(c, c), R)


def sum_Cstar(n1, n2, m, mp, q, qp, chi1, M2) -> complex:
    qh, qhp = q // n1, qp // n1
    R = qh * qhp * chi1.modulus
    return complex(cstar_all_n2(n1, m, mp, q, qp, chi1, M2)[n2 % R])


def astar_all_n2(m: int, mp: int, qh: int, qhp: int, M1: int, M2: int) -> np.ndarray:
    """A*(n2) for every n2 mod qhat qhat' by direct summation over c."""
    if math.gcd(m * mp, qh * qhp) != 1:
        raise NonInvertible("need gcd(m m', qhat qhat') = 1")
    R = qh * qhp
    c = np.arange(R, dtype=np.int64)
    s1 = _kl(M2 * inv((m * M1) % qh, qh), c, qh) if qh > 1 else np.ones(R)
    s2 = _kl(M2 * inv((mp * M1) % qhp, qhp), c, qhp) if qhp > 1 else np.ones(R)
    return (s1 * s2) @ e_residues(np.outer(c, c), R)


def factorization_Astar(n2: int, m: int, mp: int, qh: int, qhp: int, M1: int, M2: int) -> complex:
    """A* with the zero-frequency evaluation asserted: qhat^2 c_qhat(m - m') if qhat = qhat', else 0."""
    val = complex(astar_all_n2(m, mp, qh, qhp, M1, M2)[n2 % (qh * qhp)])
    if n2 % (qh * qhp) == 0:
        expect = qh * qhp * ramanujan_closed_form(qh, m - mp) if qh == qhp else 0
        if abs(val - expect) > 1e-8 * qh * qhp * max(qh, qhp):
            raise ClosedFormMismatch(
                f"A* = {val:.6g}, expected {expect}",
                witness={"m": m, "mp": mp, "qh": qh, "qhp": qhp, "M1": M1, "M2": M2},
            )
    return val


def astar_reference(n2: int, qh: int, qhp: int) -> float:
    return qh * qhp * math.gcd(math.gcd(qh, qhp), n2)


def _bstar_F(qh: int, m, chi1: DirichletCharacter, M2: int, conj_chi: bool) -> np.ndarray:
    """F[m, c] = sum*_b chi(M2bar m - b) S((b qhat)bar, c qhatbar; M1), chi = chi1bar or chi1."""
    M1 = chi1.modulus
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    bs = np.array(units(M1), dtype=np.int64)
    vals = _chi_at(chi1, (inv(M2 % M1, M1) * m[:, None] - bs[None, :]))
    w = np.conj(vals) if conj_chi else vals
    ibq = np.array([inv(int(x) * qh % M1, M1) for x in bs])
    c = np.arange(M1, dtype=np.int64)
    return w @ _kl(ibq[:, None], (c * inv(qh % M1, M1))[None, :], M1)


def bstar_direct(n2: int, m: int, mp: int, qh: int, qhp: int, chi1: DirichletCharacter, M2: int) -> complex:
    """B* by direct summation over c, b, b'."""
    M1 = chi1.modulus
    if math.gcd(qh * qhp, M1) != 1:
        raise ModuliNotCoprime("qhat qhat' must be coprime to M1")
    F1 = _bstar_F(qh, m, chi1, M2, True)[0]
    F2 = _bstar_F(qhp, mp, chi1, M2, False)[0]
    c = np.arange(M1, dtype=np.int64)
    return complex(np.sum(F1 * F2 * e_residues(c * inv((qh * qhp) % M1, M1) * n2, M1)))


def _pair_sum(m, mp, chi1, M2) -> complex:
    """P = (sum*_b chi1bar(M2bar m - b)) (sum*_b' chi1(M2bar m' - b'))."""
    M1 = chi1.modulus
    bs = np.array(units(M1), dtype=np.int64)
    m2b = inv(M2 % M1, M1)
    return complex(np.sum(np.conj(_chi_at(chi1, m2b * m - bs))) * np.sum(_chi_at(chi1, m2b * mp - bs)))


def bstar_branch_value(n2: int, m: int, mp: int, qh: int, qhp: int, chi1: DirichletCharacter, M2: int) -> complex:
    """The evaluation B* is claimed to equal, by branch.

    M1 | n2:   M1^2 sum*_b chi1bar(M2bar m - b) chi1(M2bar m' - b (qhat qhat'bar)^2) - M1 P
    M1 \\nmid n2: M1 S_{M1}(f1, f2; g) - M1 P   (the removed gamma = qhatbar term equals P)
    """
    M1 = chi1.modulus
    P = _pair_sum(m, mp, chi1, M2)
    if n2 % M1 == 0:
        bs = np.array(units(M1), dtype=np.int64)
        m2b = inv(M2 % M1, M1)
        r = (qh * inv(qhp % M1, M1)) ** 2 % M1
        main = np.sum(np.conj(_chi_at(chi1, m2b * m - bs)) * _chi_at(chi1, m2b * mp - bs * r))
        return complex(M1 * M1 * main - M1 * P)
    spec = MixedSumSpec(M1, M2, m, mp, n2, qh, qhp)
    return M1 * mixed_sum_S(spec, chi1) - M1 * P


def factorization_Bstar(n2, m, mp, qh, qhp, chi1, M2, rtol: float = IDENTITY_RTOL) -> complex:
    """B* by direct summation, with the branch identity asserted (BranchIdentityMismatch)."""
    val = bstar_direct(n2, m, mp, qh, qhp, chi1, M2)
    claim = bstar_branch_value(n2, m, mp, qh, qhp, chi1, M2)
    M1 = chi1.modulus
    scale = max(abs(val), M1**2.5)
    if abs(val - claim) > rtol * scale:
        raise BranchIdentityMismatch(
            f"B* = {val:.6g} but branch evaluation gives {claim:.6g}",
            witness={"n2": n2, "m": m, "mp": mp, "qh": qh, "qhp": qhp, "chi1": chi1.label(), "M2": M2},
        )
    return val


def deligne_reference(M1: int, n2: int, m: int, mp: int, qh: int, qhp: int) -> float:
    g = math.gcd(math.gcd(M1, n2), (m * qh * qh - mp * qhp * qhp))
    return M1**2.5 * math.sqrt(g)


# ---------------------------------------------------------------- mixed sums


@dataclass(frozen=True)
class MixedSumSpec:
    """Data of S_{M1}(f1, f2; g) with f1 = M2bar m - x1, f2 = M2bar m' - x2 and

    g = -(qhat n2)bar qhat' x1^{-1} (1 - qhat x3) + (qhat' n2)bar x2^{-1} (x3^{-1} - qhat).
    """

    M1: int
    M2: int
    m: int
    mp: int
    n2: int
    qh: int
    qhp: int

    def __post_init__(self):
        if self.n2 % self.M1 == 0:
            raise ValueError("the mixed sum needs M1 not dividing n2")
        if math.gcd(self.qh * self.qhp * self.M2, self.M1) != 1:
            raise ModuliNotCoprime("qhat, qhat', M2 must be invertible mod M1")
        for x, xi in ((self.M2, self.m2bar), (self.qh * self.n2, self.a1), (self.qhp * self.n2, self.a2)):
            if (x * xi) % self.M1 != 1:
                raise ArithmeticError("stored inverse failed verification")

    @property
    def m2bar(self) -> int:
        return inv(self.M2 % self.M1, self.M1)

    @property
    def a1(self) -> int:
        return inv((self.qh * self.n2) % self.M1, self.M1)

    @property
    def a2(self) -> int:
        return inv((self.qhp * self.n2) % self.M1, self.M1)

    def g_numerator(self, x1, x2, x3) -> np.ndarray:
        M1 = self.M1
        it = inverse_array(M1)
        return (
            -self.a1 * self.qhp * it[x1] * (1 - self.qh * x3)
            + self.a2 * it[x2] * (it[x3] - self.qh)
        ) % M1


@lru_cache(maxsize=64)
def inverse_array(M1: int) -> np.ndarray:
    from .arith import inverse_table

    out = inverse_table(M1).copy()
    out[out < 0] = 0
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _cube(M1: int):
    x = np.arange(1, M1, dtype=np.int64)
    return tuple(a.ravel() for a in np.meshgrid(x, x, x, indexing="ij"))


def mixed_sum_S(spec: MixedSumSpec, chi1: DirichletCharacter) -> complex:
    """Brute force over (F_{M1}^*)^3 with chi(0) = 0 where f1 or f2 vanishes."""
    M1 = spec.M1
    if chi1.modulus != M1:
        raise ValueError("character modulus must equal M1")
    x1, x2, x3 = _cube(M1)
    f1 = spec.m2bar * spec.m - x1
    f2 = spec.m2bar * spec.mp - x2
    vals = np.conj(_chi_at(chi1, f1)) * _chi_at(chi1, f2) * e_residues(spec.g_numerator(x1, x2, x3), M1)
    return complex(np.sum(vals))


# ---------------------------------------------------------------- vectorized grids


def bstar_grid(qh: int, qhp: int, chi1: DirichletCharacter, M2: int) -> np.ndarray:
    """B*[m, m', n2] for all residues m, m', n2 mod M1 at fixed (qhat, qhat')."""
    M1 = chi1.modulus
    ms = np.arange(M1)
    F1 = _bstar_F(qh, ms, chi1, M2, True)
    F2 = _bstar_F(qhp, ms, chi1, M2, False)
    c = np.arange(M1, dtype=np.int64)
    E = e_residues(np.outer(c, c), M1)  # E[c, r] = e(c r / M1)
    Bt = np.einsum("ac,bc,cr->abr", F1, F2, E, optimize=True)
    r_of_n2 = (inv((qh * qhp) % M1, M1) * np.arange(M1)) % M1
    return Bt[:, :, r_of_n2]


def phi_count(n: int) -> int:
    return euler_phi(n)


# ---------------------------------------------------------------- sweeps

# Guards below are empirical regression constants, not constants from the literature.
C_ERROR_GUARD = 1.5
ASTAR_GUARD = 4.0
BSTAR_DIAGONAL_GUARD = 2.0
DELIGNE_GUARD = 20.0
REGRESSION_LABEL = "empirical regression guard"
IDENTITY_LABEL = "identity tolerance (relative error)"


def _worst(cells: list) -> list:
    return [max(cells, key=lambda c: c.ratio)] if cells else []


def sum_C_error_all_m(n: int, a: int, q: int, M1: int, M2: int, chi: DirichletCharacter) -> np.ndarray:
    """C(m, q) for every m mod M1^2 M2 q (exact phases)."""
    if math.gcd(a, q * M1) != 1:
        raise NonInvertible(f"a={a} is not invertible mod q M1={q * M1}")
    if math.gcd(q, M1 * M2) != 1:
        raise ModuliNotCoprime(f"q={q} shares a factor with M={M1 * M2}")
    R = M1 * M1 * M2 * q
    b = n % M1 + M1 * np.arange(M1 * M2 * q, dtype=np.int64)
    abar = inv(a, q * M1)
    f = _chi_at(chi, b) * e_residues(-abar * M2 * b, R)
    return f @ e_residues(np.outer(b, np.arange(R, dtype=np.int64)), R)


def c_error_sweep(instances=((5, 7, 2), (5, 7, 3), (7, 11, 2)), guard: float = C_ERROR_GUARD, strict: bool = True):
    """|C(m,q)| / (q M1 sqrt(M2)) over all n, a, m and all primitive chi mod M; vanishing asserted."""
    from .characters import primitive_characters
    from .errors import GuardExceeded
    from .report import Cell, SweepReport

    start = time.perf_counter()
    report = SweepReport(
        suite="c-error",
        grid={"instances": [list(t) for t in instances], "characters": "all primitive mod M"},
        guard=guard,
        guard_label=REGRESSION_LABEL,
        columns=["M1", "M2", "q", "chi", "n", "a", "m"],
    )
    total = 0
    for M1, M2, q in instances:
        PaperModuli(M1, M2, q)
        ref = q * M1 * math.sqrt(M2)
        m = np.arange(M1 * M1 * M2 * q)
        for chi in primitive_characters(M1 * M2):
            best = None
            for n in range(M1):
                for a in units(q * M1):
                    vals = sum_C_error_all_m(n, a, q, M1, M2, chi)
                    total += len(vals)
                    dead = (a * m - M2) % (M1 * q) != 0
                    bad = np.flatnonzero(dead & (np.abs(vals) > 1e-8 * ref))
                    inputs = {"M1": M1, "M2": M2, "q": q, "chi": chi.index, "n": n, "a": a}
                    for i in bad:
                        report.violations.append(Cell({**inputs, "m": int(i)}, complex(vals[i]), ref, float(abs(vals[i]) / ref)))
                    i = int(np.argmax(np.abs(vals)))
                    c = Cell({**inputs, "m": i}, complex(vals[i]), ref, float(abs(vals[i]) / ref))
                    if best is None or c.ratio > best.ratio:
                        best = c
            report.cells.append(best)
    report.grid["n_evaluated"] = total
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and report.violations:
        raise VanishingViolation("C(m,q) fails to vanish", witness=report.violations[0].inputs, report=report)
    if strict and not report.passed:
        raise GuardExceeded(f"C ratio exceeds {guard}", witness=report.summary["argmax"], report=report)
    return report


def char_exp_check(
    moduli=((5, 7), (7, 11), (5, 11)),
    qs=(1, 2, 3, 4, 6),
    pairs_per_moduli: int | None = 4,
    seed: int = 0,
    rtol: float = IDENTITY_RTOL,
    strict: bool = True,
):
    """Brute-force vs closed form for every valid (a, b, m) and seeded character pairs."""
    from .characters import primitive_characters
    from .report import Cell, SweepReport

    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    report = SweepReport(
        suite="char-exp",
        grid={"moduli": [list(t) for t in moduli], "q": list(qs), "pairs_per_moduli": pairs_per_moduli, "seed": seed},
        guard=rtol,
        guard_label=IDENTITY_LABEL,
        columns=["M1", "M2", "q", "chi1", "chi2", "a", "b", "m"],
    )
    total = 0
    for M1, M2 in moduli:
        pairs = [(c1, c2) for c1 in primitive_characters(M1) for c2 in primitive_characters(M2)]
        if pairs_per_moduli is not None and pairs_per_moduli < len(pairs):
            idx = sorted(rng.choice(len(pairs), size=pairs_per_moduli, replace=False).tolist())
            pairs = [pairs[i] for i in idx]
        for chi1, chi2 in pairs:
            scale_eps = gauss_sum(chi1).epsilon * gauss_sum(chi2).epsilon
            for q in qs:
                PaperModuli(M1, M2, q)
                R = q * M1 * M2
                m = np.arange(R)
                scale = q * math.sqrt(M1 * M2)
                best = None
                for a in units(q):
                    a = a if q > 1 else 1
                    live = (a * m - M2) % q == 0
                    c2 = np.conj(chi2.values[m % M2]) * chi2(q * M1)
                    qm2 = inv((q * M2) % M1, M1)
                    for b in units(M1):
                        bf = cfrak_bruteforce_all_m(a, b, q, chi1, chi2)
                        cf = np.where(live, scale_eps * scale * c2 * np.conj(chi1.values[(qm2 * m - b) % M1]), 0)
                        err = np.abs(bf - cf) / scale
                        total += R
                        i = int(np.argmax(err))
                        inputs = {"M1": M1, "M2": M2, "q": q, "chi1": chi1.index, "chi2": chi2.index, "a": a, "b": b, "m": i}
                        c = Cell(inputs, complex(bf[i]), scale, float(err[i]))
                        if err[i] > rtol:
                            report.violations.append(c)
                        if best is None or c.ratio > best.ratio:
                            best = c
                report.cells.append(best)
    report.grid["n_evaluated"] = total
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and report.violations:
        w = report.violations[0]
        raise ClosedFormMismatch("char-exp closed form mismatch", witness=w.inputs, report=report)
    return report


def cstar_factorization_check(
    moduli=((5, 7), (7, 11), (5, 11)),
    qs=(1, 2, 3, 4, 6),
    rtol: float = IDENTITY_RTOL,
    strict: bool = True,
    workers: int = 1,
):
    """C* = A* B* for every n1 | (q, q'), all n2 mod qhat qhat' M1, all m, m' classes, all primitive chi1.

    Relative error is measured against max(|C*|, qhat qhat' M1^{5/2}).
    """
    from .parallel import ordered_map
    from .report import SweepReport

    start = time.perf_counter()
    report = SweepReport(
        suite="cstar-factorization",
        grid={"moduli": [list(t) for t in moduli], "q": list(qs), "characters": "all primitive mod M1"},
        guard=rtol,
        guard_label=IDENTITY_LABEL,
        columns=["M1", "M2", "q", "qp", "n1", "chi1", "m", "mp", "n2"],
    )
    jobs = []
    for M1, M2 in moduli:
        for q in qs:
            for qp in qs:
                PaperModuli(M1, M2, q)
                PaperModuli(M1, M2, qp)
                for n1 in _common_divisors(q, qp):
                    jobs.append((M1, M2, q, qp, n1, rtol))
    total = 0
    for cells, viol, n in ordered_map(_cstar_job, jobs, workers=workers):
        report.cells.extend(cells)
        report.violations.extend(viol)
        total += n
    report.grid["n_evaluated"] = total
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and report.violations:
        raise ClosedFormMismatch("C* != A* B*", witness=report.violations[0].inputs, report=report)
    return report


def _common_divisors(q, qp):
    g = math.gcd(q, qp)
    return [d for d in range(1, g + 1) if g % d == 0]


def _cstar_job(M1, M2, q, qp, n1, rtol):
    from .characters import primitive_characters
    from .report import Cell

    qh, qhp = q // n1, qp // n1
    R = qh * qhp * M1
    n2 = np.arange(R)
    ms = [m for m in range(qh * M1) if math.gcd(m, qh) == 1]
    mps = [m for m in range(qhp * M1) if math.gcd(m, qhp) == 1]
    scale0 = qh * qhp * M1**2.5
    cells, viol, total = [], [], 0
    for chi1 in primitive_characters(M1):
        G = bstar_grid(qh, qhp, chi1, M2)
        best = None
        for m in ms:
            for mp in mps:
                C = cstar_all_n2(n1, m, mp, q, qp, chi1, M2)
                # A* only sees m mod qhat and m' mod qhat'
                A = astar_all_n2(_coprime_lift(m, qh, qhp), _coprime_lift(mp, qhp, qh), qh, qhp, M1, M2)
                prod = A[n2 % (qh * qhp)] * G[m % M1, mp % M1, n2 % M1]
                err = np.abs(C - prod) / np.maximum(np.abs(C), scale0)
                total += R
                i = int(np.argmax(err))
                inputs = {"M1": M1, "M2": M2, "q": q, "qp": qp, "n1": n1, "chi1": chi1.index, "m": m, "mp": mp, "n2": i}
                c = Cell(inputs, complex(C[i]), float(max(abs(C[i]), scale0)), float(err[i]))
                if err[i] > rtol:
                    viol.append(c)
                if best is None or c.ratio > best.ratio:
                    best = c
        cells.append(best)
    return cells, viol, total


def astar_check(qmax: int = 12, M1: int = 13, M2: int = 17, guard: float = ASTAR_GUARD, strict: bool = True):
    """A* at n2 = 0 against its evaluation (asserted) and |A*|/(qhat qhat'(qhat,qhat',n2)) for n2 != 0."""
    from .errors import GuardExceeded
    from .report import Cell, SweepReport

    start = time.perf_counter()
    if math.gcd(M1 * M2, math.lcm(*range(1, qmax + 1))) != 1:
        raise ModuliNotCoprime("M1, M2 must be coprime to every qhat <= qmax")
    report = SweepReport(
        suite="astar",
        grid={"qmax": qmax, "M1": M1, "M2": M2},
        guard=guard,
        guard_label=REGRESSION_LABEL,
        columns=["qh", "qhp", "m", "mp", "n2", "kind"],
    )
    total = 0
    for qh in range(1, qmax + 1):
        for qhp in range(1, qmax + 1):
            R = qh * qhp
            n2 = np.arange(R)
            ref = qh * qhp * np.gcd(math.gcd(qh, qhp), n2)  # gcd(., 0) = gcd(qh, qhp)
            best, zero_best = None, None
            for m in units(qh):
                for mp in units(qhp):
                    m_, mp_ = (m or 1), (mp or 1)
                    if math.gcd(m_ * mp_, R) != 1:
                        # m is a class mod qhat, mp mod qhat'; pick coprime lifts
                        m_ = _coprime_lift(m_, qh, qhp)
                        mp_ = _coprime_lift(mp_, qhp, qh)
                    A = astar_all_n2(m_, mp_, qh, qhp, M1, M2)
                    total += R
                    expect = qh * qhp * ramanujan_closed_form(qh, m_ - mp_) if qh == qhp else 0
                    err0 = abs(A[0] - expect) / (qh * qhp * max(qh, qhp))
                    z = Cell({"qh": qh, "qhp": qhp, "m": m_, "mp": mp_, "n2": 0, "kind": "zero"}, complex(A[0]), float(expect), None, {"scaled_error": err0})
                    if err0 > 1e-8:
                        report.violations.append(z)
                    if zero_best is None or err0 > zero_best.extra["scaled_error"]:
                        zero_best = z
                    if R > 1:
                        ratio = np.abs(A[1:]) / ref[1:]
                        i = int(np.argmax(ratio)) + 1
                        c = Cell({"qh": qh, "qhp": qhp, "m": m_, "mp": mp_, "n2": i, "kind": "nonzero"}, complex(A[i]), float(ref[i]), float(ratio[i - 1]))
                        if best is None or c.ratio > best.ratio:
                            best = c
            report.cells.append(zero_best)
            if best is not None:
                report.cells.append(best)
    report.grid["n_evaluated"] = total
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and report.violations:
        raise ClosedFormMismatch("A* zero-frequency evaluation fails", witness=report.violations[0].inputs, report=report)
    if strict and not report.passed:
        raise GuardExceeded(f"A* ratio exceeds {guard}", witness=report.summary["argmax"], report=report)
    return report


def _coprime_lift(m: int, mod: int, other: int) -> int:
    """Smallest representative of m mod ``mod`` coprime to mod * other."""
    x = m % mod if mod > 1 else 1
    while math.gcd(x, mod * other) != 1:
        x += mod
    return x


def bstar_branch_check(
    M1s=(5, 7), M2: int | None = None, rtol: float = IDENTITY_RTOL,
    diagonal_guard: float = BSTAR_DIAGONAL_GUARD, strict: bool = True, workers: int = 1,
):
    """Both branch evaluations of B* over all unit classes qhat, qhat', all m, m', n2 and primitive chi1.

    Also records |B*|/M1^{5/2} on the M1 | n2, m qhat^2 != m' qhat'^2 cells against ``diagonal_guard``.
    """
    from .errors import GuardExceeded
    from .parallel import ordered_map
    from .report import SweepReport

    start = time.perf_counter()
    report = SweepReport(
        suite="bstar",
        grid={"M1": list(M1s), "M2": M2, "characters": "all primitive mod M1"},
        guard=rtol,
        guard_label=IDENTITY_LABEL,
        columns=["M1", "M2", "chi1", "qh", "qhp", "m", "mp", "n2", "kind"],
    )
    jobs = []
    from .characters import primitive_characters

    for M1 in M1s:
        m2 = M2 if M2 is not None else default_M2(M1)
        for chi1 in primitive_characters(M1):
            jobs.append((M1, m2, chi1.index, rtol))
    diag_max, diag_arg, total = 0.0, None, 0
    for cells, viol, (dmax, darg), n in ordered_map(_bstar_job, jobs, workers=workers):
        report.cells.extend(cells)
        report.violations.extend(viol)
        total += n
        if dmax > diag_max:
            diag_max, diag_arg = dmax, darg
    report.grid["n_evaluated"] = total
    report.finalize(wall_time=time.perf_counter() - start)
    report.summary["diagonal_ratio_max"] = diag_max
    report.summary["diagonal_ratio_argmax"] = diag_arg
    report.summary["diagonal_guard"] = diagonal_guard
    report.summary["diagonal_guard_label"] = REGRESSION_LABEL
    if diag_max > diagonal_guard:
        report.summary["passed"] = False
    if strict and report.violations:
        raise BranchIdentityMismatch("B* branch identity fails", witness=report.violations[0].inputs, report=report)
    if strict and not report.passed:
        raise GuardExceeded(f"M1 | n2 ratio exceeds {diagonal_guard}", witness=diag_arg, report=report)
    return report


def default_M2(M1: int) -> int:
    return 11 if M1 == 7 else 7


def _bstar_job(M1, M2, chi_index, rtol):
    from .characters import character
    from .report import Cell

    chi1 = character(M1, chi_index)
    scale0 = M1**2.5
    best = {"zero": None, "mixed": None}
    viol, total = [], 0
    dmax, darg = 0.0, None
    for qh in units(M1):
        for qhp in units(M1):
            G = bstar_grid(qh, qhp, chi1, M2)
            for m in range(M1):
                for mp in range(M1):
                    for n2 in range(M1):
                        val = complex(G[m, mp, n2])
                        claim = bstar_branch_value(n2, m, mp, qh, qhp, chi1, M2)
                        err = abs(val - claim) / max(abs(val), scale0)
                        total += 1
                        kind = "zero" if n2 == 0 else "mixed"
                        inputs = {"M1": M1, "M2": M2, "chi1": chi_index, "qh": qh, "qhp": qhp, "m": m, "mp": mp, "n2": n2, "kind": kind}
                        c = Cell(inputs, val, float(max(abs(val), scale0)), float(err))
                        if err > rtol:
                            viol.append(c)
                        if best[kind] is None or err > best[kind].ratio:
                            best[kind] = c
                        if n2 == 0 and (m * qh * qh - mp * qhp * qhp) % M1 != 0:
                            r = abs(val) / scale0
                            if r > dmax:
                                dmax, darg = r, inputs
    return [c for c in best.values() if c is not None], viol, (dmax, darg), total


def deligne_ratio_sweep(
    M1s=(5, 7, 11, 13),
    chars: str | list[int] = "all",
    M2: int | None = None,
    guard: float = DELIGNE_GUARD,
    strict: bool = True,
    workers: int = 1,
):
    """max |B*| / (M1^{5/2} (M1, n2, m qhat^2 - m' qhat'^2)^{1/2}) over the exhaustive grid.

    The report keeps the worst cell of each (M1, chi1, branch) group; the
    global maximum and its witness are in the summary.
    """
    from .characters import primitive_characters
    from .errors import GuardExceeded
    from .parallel import ordered_map
    from .report import SweepReport

    start = time.perf_counter()
    for M1 in M1s:
        if M1 > 17:
            raise ValueError("deligne_ratio_sweep supports M1 <= 17")
        PaperModuli(M1, M2 if M2 is not None else default_M2(M1))
    report = SweepReport(
        suite="deligne",
        grid={"M1": list(M1s), "M2": M2, "characters": chars if isinstance(chars, str) else list(chars)},
        guard=guard,
        guard_label=REGRESSION_LABEL,
        columns=["M1", "M2", "chi1", "qh", "qhp", "m", "mp", "n2", "kind"],
    )
    jobs = []
    for M1 in M1s:
        m2 = M2 if M2 is not None else default_M2(M1)
        idx = [c.index for c in primitive_characters(M1)] if chars == "all" else list(chars)
        jobs += [(M1, m2, i) for i in idx]
    total = 0
    for cells, n in ordered_map(_deligne_job, jobs, workers=workers):
        report.cells.extend(cells)
        total += n
    report.grid["n_evaluated"] = total
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and not report.passed:
        raise GuardExceeded(f"Deligne ratio exceeds {guard}", witness=report.summary["argmax"], report=report)
    return report


def _deligne_job(M1, M2, chi_index):
    from .characters import character
    from .report import Cell

    chi1 = character(M1, chi_index)
    r = np.arange(M1)
    best = {}
    total = 0
    for qh in units(M1):
        for qhp in units(M1):
            G = bstar_grid(qh, qhp, chi1, M2)
            # gcd(M1, n2, m qh^2 - m' qhp^2) for prime M1 is M1 iff both vanish mod M1
            diff = (r[:, None] * qh * qh - r[None, :] * qhp * qhp) % M1
            g = np.where((diff[:, :, None] == 0) & (r[None, None, :] == 0), M1, 1)
            ratio = np.abs(G) / (M1**2.5 * np.sqrt(g))
            total += ratio.size
            for kind, mask in (("zero", r == 0), ("mixed", r != 0)):
                sub = np.where(mask[None, None, :], ratio, -1.0)
                i = np.unravel_index(int(np.argmax(sub)), sub.shape)
                c = Cell(
                    {"M1": M1, "M2": M2, "chi1": chi_index, "qh": qh, "qhp": qhp, "m": int(i[0]), "mp": int(i[1]), "n2": int(i[2]), "kind": kind},
                    complex(G[i]), float(M1**2.5 * math.sqrt(g[i])), float(ratio[i]),
                )
                if kind not in best or c.ratio > best[kind].ratio:
                    best[kind] = c
    return [best["zero"], best["mixed"]], total
