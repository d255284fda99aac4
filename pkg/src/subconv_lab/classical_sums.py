"""Kloosterman and Ramanujan sums, the Weil bound sweep, twisted multiplicativity."""

from __future__ import annotations

import math
import time
from functools import lru_cache

import numpy as np

from .arith import e_residues, inv, inverse_table, mobius, num_divisors, divisors, units
from .errors import BoundViolation, IdentityViolation, ModuliNotCoprime
from .report import Cell, SweepReport

# slack for floating comparison against bounds that are attained exactly (c = 1)
BOUND_SLACK = 1e-9


def kloosterman(a: int, b: int, c: int) -> complex:
    """S(a, b; c) by direct summation over units alpha mod c."""
    if c < 1:
        raise ValueError("Kloosterman modulus must be positive")
    if c == 1:
        return 1 + 0j
    alpha = np.array(units(c), dtype=np.int64)
    alpha_bar = inverse_table(c)[alpha]
    r = (a % c) * alpha + (b % c) * alpha_bar
    return complex(np.sum(e_residues(r, c)))


@lru_cache(maxsize=64)
def kloosterman_table(c: int) -> np.ndarray:
    """Real c x c array with entry [a, b] = S(a, b; c).

    Column b is the length-c DFT of alpha -> e(b * alpha_bar / c) supported on
    units, so the whole table costs O(c^2 log c).
    """
    if c == 1:
        out = np.ones((1, 1))
    else:
        alpha = np.array(units(c), dtype=np.int64)
        alpha_bar = inverse_table(c)[alpha]
        f = np.zeros((c, c), dtype=complex)
        b = np.arange(c, dtype=np.int64)
        f[alpha, :] = e_residues(np.outer(alpha_bar, b), c)
        out = (np.fft.ifft(f, axis=0) * c).real
    out.setflags(write=False)
    return out


def ramanujan(ell: int, u: int) -> complex:
    """c_ell(u) by direct summation."""
    if ell < 1:
        raise ValueError("Ramanujan modulus must be positive")
    alpha = np.array(units(ell), dtype=np.int64)
    return complex(np.sum(e_residues((u % ell) * alpha, ell)))


def ramanujan_closed_form(ell: int, u: int) -> int:
    g = math.gcd(ell, u) if u != 0 else ell
    return sum(d * mobius(ell // d) for d in divisors(g))


def weil_bound(a: int, b: int, c: int) -> float:
    return num_divisors(c) * math.sqrt(math.gcd(math.gcd(a, b), c) * c)


def _weil_cells_for_modulus(c: int, all_cells: bool) -> tuple[list[Cell], Cell]:
    table = kloosterman_table(c)
    a = np.arange(c)
    g = np.gcd(np.gcd(a[:, None], a[None, :]), c)
    bound = num_divisors(c) * np.sqrt(g * c)
    ratio = np.abs(table) / bound
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)

    def cell(x, y):
        return Cell(
            inputs={"a": int(x), "b": int(y), "c": c},
            value=complex(table[x, y]),
            reference=float(bound[x, y]),
            ratio=float(ratio[x, y]),
        )

    worst = cell(i, j)
    if all_cells:
        return [cell(x, y) for x in range(c) for y in range(c)], worst
    return [worst], worst


def weil_check(
    c_max: int,
    *,
    primes_only: bool = False,
    all_cells: bool = False,
    strict: bool = True,
    workers: int = 1,
) -> SweepReport:
    """Check |S(a,b;c)| <= d(c) sqrt(gcd(a,b,c)) sqrt(c) for all c <= c_max, a, b mod c.

    By default the report keeps one cell per modulus (the worst (a, b)), which
    still contains the global maximum; ``all_cells`` keeps every triple.
    """
    from .parallel import ordered_map
    from .arith import is_prime

    if c_max > 2000:
        raise ValueError("weil_check supports c_max <= 2000")
    start = time.perf_counter()
    moduli = [c for c in range(1, c_max + 1) if not primes_only or is_prime(c)]
    results = ordered_map(_weil_cells_for_modulus, [(c, all_cells) for c in moduli], workers=workers)
    report = SweepReport(
        suite="weil",
        grid={"c_max": c_max, "primes_only": primes_only, "all_cells": all_cells},
        guard=1.0,
        guard_label="Weil bound (theorem)",
        columns=["a", "b", "c"],
        reference_name="bound",
    )
    for cells, worst in results:
        report.cells.extend(cells)
        if worst.ratio > 1 + BOUND_SLACK:
            report.violations.append(worst)
    report.finalize(wall_time=time.perf_counter() - start, slack=BOUND_SLACK)
    if strict and report.violations:
        w = report.violations[0]
        raise BoundViolation(f"Weil bound violated at {w.inputs}", witness=w.inputs, report=report)
    return report


def kloosterman_multiplicativity_check(c1: int, c2: int, tol: float = 1e-8) -> bool:
    """S(a,b;c1 c2) = S(a c2bar, b c2bar; c1) S(a c1bar, b c1bar; c2) for all a, b < c1 c2."""
    if math.gcd(c1, c2) != 1:
        raise ModuliNotCoprime(f"{c1} and {c2} are not coprime")
    c = c1 * c2
    big = kloosterman_table(c)
    t1, t2 = kloosterman_table(c1), kloosterman_table(c2)
    i1, i2 = inv(c2 % c1, c1), inv(c1 % c2, c2)
    a = np.arange(c)
    rhs = t1[np.ix_(a * i1 % c1, a * i1 % c1)] * t2[np.ix_(a * i2 % c2, a * i2 % c2)]
    diff = np.abs(big - rhs)
    if diff.max() > tol:
        x, y = np.unravel_index(int(np.argmax(diff)), diff.shape)
        raise IdentityViolation(
            f"twisted multiplicativity fails for ({c1},{c2}) at a={x}, b={y}",
            witness={"a": int(x), "b": int(y), "c1": c1, "c2": c2, "error": float(diff[x, y])},
        )
    return True
