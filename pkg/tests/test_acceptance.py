"""Acceptance criteria 1-13 at their stated tolerances.

Each test records a PASS/FAIL line; the lines are printed together at the end
of the pytest run (see conftest.py) and when this file is run as a script.
Full-grid suites take ~5 minutes in total on one core.
"""

from __future__ import annotations

import math
import sys

import numpy as np
import pytest

from subconv_lab.classical_sums import weil_check
from subconv_lab.coefficients import (
    HeckeCoefficientModel,
    coefficient_tables,
    d3_bruteforce,
    lambda_exact,
    ramanujan_average_check,
)
from subconv_lab.config import RunConfig
from subconv_lab.paper_sums import deligne_ratio_sweep
from subconv_lab.suites import run_verify

FULL = RunConfig(grid="full")
RESULTS: dict[int, str] = {}


def record(n: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    assert ok, RESULTS[n]


def _suite(name: str, cfg: RunConfig = FULL):
    r = run_verify(name, cfg)
    return r, f"cells={r.summary['n_cells']} max={r.summary['max_ratio']:.3g} violations={r.summary['n_violations']}"


@pytest.mark.slow
def test_c01_gauss_sum_magnitude():
    r, d = _suite("characters")
    record(1, "Gauss sums, M <= 200", r.passed and r.summary["max_ratio"] < 1e-9, d)


@pytest.mark.slow
def test_c02_weil_bound():
    r = weil_check(1000, strict=False)
    record(2, "Weil bound, c <= 1000", not r.violations and r.summary["max_ratio"] <= 1 + 1e-9,
           f"moduli={r.summary['n_cells']} max |S|/bound={r.summary['max_ratio']:.6f}")


@pytest.mark.slow
def test_c03_char_exp_closed_form():
    r, d = _suite("char-exp")
    record(3, "dual character sum closed form", r.passed and r.summary["max_ratio"] < 1e-6, d)


@pytest.mark.slow
def test_c04_cstar_factorization():
    r, d = _suite("cstar-factorization")
    record(4, "C* = A* B*", r.passed and r.summary["max_ratio"] < 1e-6, d)


@pytest.mark.slow
def test_c05_astar_zero_frequency():
    r = run_verify("astar", FULL)
    zero = max(c.extra["scaled_error"] for c in r.cells if c.inputs["kind"] == "zero")
    record(5, "A* at n2 = 0, qhat, qhat' <= 12", not r.violations and zero <= 1e-8,
           f"max scaled error={zero:.3g} violations={len(r.violations)}")


@pytest.mark.slow
def test_c06_bstar_branches():
    r, d = _suite("bstar")
    record(6, "B* branch identities, M1 in {5, 7}", r.passed and r.summary["max_ratio"] < 1e-6, d)


@pytest.mark.slow
def test_c07_deligne_ratio():
    r = deligne_ratio_sweep((5, 7, 11, 13), strict=False)
    m = r.summary["max_ratio"]
    record(7, "Deligne ratio, M1 in {5, 7, 11, 13}", m is not None and math.isfinite(m) and m <= 20,
           f"max={m:.4f} at {r.summary['argmax']} ({r.grid['n_evaluated']} cells)")


def test_c08_delta_identity():
    r, d = _suite("delta")
    record(8, "delta expansion, |n| <= 50", r.passed and r.summary["max_ratio"] < 1e-8, d)


@pytest.mark.slow
def test_c09_voronoi():
    r, d = _suite("voronoi")
    ok = r.passed and all(c.extra["monotone"] and len(c.extra["trace"]) >= 4 for c in r.cells)
    record(9, "Voronoi formula, q in {1, 2, 3, 5}", ok and r.summary["max_ratio"] < 1e-3, d)


def _pipeline_cells(r, checks):
    return [c for c in r.cells if c.inputs["check"] in checks]


@pytest.fixture(scope="module")
def pipeline_report():
    return run_verify("pipeline", FULL)


@pytest.mark.slow
def test_c10_circle_and_split(pipeline_report):
    cells = _pipeline_cells(pipeline_report, ("circle", "congruence-split"))
    worst = {k: max(c.extra["residual"] for c in cells if c.inputs["check"] == k) for k in ("circle", "congruence-split")}
    n_inst = len({(c.inputs["M1"], c.inputs["N"]) for c in cells})
    record(10, "circle decomposition and congruence split",
           n_inst == 6 and worst["circle"] < 1e-6 and worst["congruence-split"] < 1e-8,
           f"instances={n_inst} circle={worst['circle']:.3g} split={worst['congruence-split']:.3g}")


@pytest.mark.slow
def test_c11_poisson(pipeline_report):
    res = max(c.extra["residual"] for c in _pipeline_cells(pipeline_report, ("poisson",)))
    stab = max(c.extra["residual"] for c in _pipeline_cells(pipeline_report, ("poisson-tail",)))
    record(11, "Poisson step", res < 1e-4 and stab < 1e-6, f"residual={res:.3g} stability={stab:.3g}")


@pytest.mark.slow
def test_c12_voronoi_step():
    r, d = _suite("voronoi-step")
    strict = sum(c.extra["monotone_strict"] for c in r.cells)
    ok = r.passed and all(c.extra["monotone"] for c in r.cells) and r.summary["max_ratio"] < 5e-2
    record(12, "end-to-end Voronoi step", ok, f"{d} strictly monotone={strict}/{len(r.cells)}")


def test_c13_coefficient_model():
    model = HeckeCoefficientModel.trivial()
    weyl = all(
        lambda_exact(model, p**a, p**b) == (a + 1) * (b + 1) * (a + b + 2) // 2
        for p in (2, 3, 5) for a in range(7) for b in range(7)
    )
    X = 10**4
    right, left = coefficient_tables(model, X)
    d3 = all(int(right[n]) == d3_bruteforce(n) for n in range(1, X + 1))
    mult = True
    for m in range(2, X // 2 + 1):
        n = np.arange(2, X // m + 1)
        n = n[np.gcd(n, m) == 1]
        mult &= bool(np.all(right[m * n] == right[m] * right[n]) and np.all(left[m * n] == left[m] * left[n]))
    ram = ramanujan_average_check(model, X, guard=10.0, strict=False)
    record(13, "coefficient model", weyl and d3 and mult and ram.passed,
           f"weyl={weyl} d3={d3} multiplicative={mult} ramanujan max={ram.summary['max_ratio']:.3g}")


def main() -> int:
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    report = None
    for t in tests:
        try:
            if "pipeline_report" in t.__code__.co_varnames[: t.__code__.co_argcount]:
                report = report or run_verify("pipeline", FULL)
                t(report)
            else:
                t()
        except AssertionError:
            pass
    for n in sorted(RESULTS):
        print(RESULTS[n])
    return 0 if len(RESULTS) == 13 and all(" PASS " in v for v in RESULTS.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
