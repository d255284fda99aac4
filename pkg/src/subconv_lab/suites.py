"""Named verification suites and sweeps; each returns a finalized SweepReport.

Suites never raise on a failed check: violations land in the report and
``report.passed`` is False, so the caller can always write the report first.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from . import paper_sums as ps
from .analytic.contour import ContourSpec
from .analytic.delta import delta_eval
from .analytic.testfunctions import bump
from .analytic.voronoi import voronoi_check
from .arith import units
from .characters import conductor_bruteforce, characters_mod, conductor, gauss_sum, primitive_characters
from .classical_sums import (
    kloosterman,
    kloosterman_multiplicativity_check,
    kloosterman_table,
    ramanujan,
    ramanujan_closed_form,
    weil_check,
)
from .coefficients import HeckeCoefficientModel
from .config import RunConfig
from .errors import CheckFailure
from .pipeline import (
    PipelineParams,
    S_circle_decomposition,
    congruence_split,
    istar_decay_sweep,
    poisson_step_check,
    voronoi_step_check,
)
from .report import Cell, SweepReport

IDENTITY_LABEL = ps.IDENTITY_LABEL

VORONOI_BUMP = bump(75.0, 25.0)  # supported on [50, 100]
VORONOI_LEVELS = (100.0, 400.0, 1600.0, 6400.0, 25600.0, 102400.0)


def _stamp(report: SweepReport, cfg: RunConfig) -> SweepReport:
    report.config_hash = cfg.config_hash
    return report


# ---------------------------------------------------------------- verify suites


def suite_characters(cfg: RunConfig) -> SweepReport:
    """||tau(chi)| - sqrt(M)| for every primitive chi mod M <= 200 (8 does not divide M); conductors too."""
    start = time.perf_counter()
    top = 200 if cfg.grid == "full" else 60
    tol = cfg.tolerances.gauss
    report = SweepReport(
        suite="characters", grid={"M_max": top, "exclude": "8 | M"}, guard=tol,
        guard_label="identity tolerance (absolute)", columns=["M", "chi"], reference_name="sqrt_M",
    )
    n = 0
    for M in range(1, top + 1):
        if M % 8 == 0:
            continue
        worst = None
        for chi in characters_mod(M):
            if M <= 60 and conductor(chi) != conductor_bruteforce(chi):
                report.violations.append(Cell({"M": M, "chi": chi.index}, None, None, None, {"check": "conductor"}))
            if not chi.is_primitive:
                continue
            n += 1
            tau = gauss_sum(chi).tau
            err = abs(abs(tau) - math.sqrt(M))
            c = Cell({"M": M, "chi": chi.index}, tau, math.sqrt(M), err)
            if err >= tol:
                report.violations.append(c)
            if worst is None or err > worst.ratio:
                worst = c
        if worst is not None:
            report.cells.append(worst)
    report.grid["n_primitive"] = n
    return report.finalize(time.perf_counter() - start)


def suite_classical(cfg: RunConfig) -> SweepReport:
    """Kloosterman table vs direct sums, Ramanujan closed form, twisted multiplicativity."""
    start = time.perf_counter()
    cmax = 60 if cfg.grid == "full" else 30
    report = SweepReport(
        suite="classical", grid={"c_max": cmax}, guard=1e-9,
        guard_label="identity tolerance (absolute)", columns=["check", "c"],
    )
    for c in range(1, cmax + 1):
        t = kloosterman_table(c)
        err = max(abs(kloosterman(a, b, c) - t[a, b]) for a in range(c) for b in range(0, c, max(1, c // 7)))
        report.cells.append(Cell({"check": "kloosterman", "c": c}, None, None, err))
        err = max(abs(ramanujan(c, u) - ramanujan_closed_form(c, u)) for u in range(-c, c + 1))
        report.cells.append(Cell({"check": "ramanujan", "c": c}, None, None, err))
    for c1 in range(1, 13):
        for c2 in range(1, 13):
            if math.gcd(c1, c2) != 1:
                continue
            try:
                kloosterman_multiplicativity_check(c1, c2)
                report.cells.append(Cell({"check": "multiplicativity", "c": c1 * c2}, None, None, 0.0, {"c1": c1, "c2": c2}))
            except CheckFailure as exc:
                report.violations.append(Cell({"check": "multiplicativity", "c": c1 * c2}, None, None, None, exc.witness))
    return report.finalize(time.perf_counter() - start)


def suite_char_exp(cfg: RunConfig) -> SweepReport:
    if cfg.grid == "full":
        kw = dict(moduli=((5, 7), (7, 11), (5, 11)), qs=(1, 2, 3, 4, 6), pairs_per_moduli=None)
    else:
        kw = dict(moduli=((5, 7),), qs=(1, 2, 3), pairs_per_moduli=4)
    return ps.char_exp_check(**kw, seed=cfg.seed, rtol=cfg.tolerances.identity, strict=False)


def suite_cstar(cfg: RunConfig) -> SweepReport:
    if cfg.grid == "full":
        kw = dict(moduli=((5, 7), (7, 11), (5, 11)), qs=(1, 2, 3, 4, 6))
    else:
        kw = dict(moduli=((5, 7),), qs=(1, 2, 3))
    return ps.cstar_factorization_check(**kw, rtol=cfg.tolerances.identity, strict=False, workers=cfg.workers)


def suite_astar(cfg: RunConfig) -> SweepReport:
    qmax = 12 if cfg.grid == "full" else 6
    return ps.astar_check(qmax=qmax, guard=cfg.guards.astar, strict=False)


def suite_bstar(cfg: RunConfig) -> SweepReport:
    M1s = (5, 7) if cfg.grid == "full" else (5,)
    return ps.bstar_branch_check(M1s, rtol=cfg.tolerances.identity, diagonal_guard=cfg.guards.bstar_diagonal,
                                 strict=False, workers=cfg.workers)


def suite_delta(cfg: RunConfig) -> SweepReport:
    """|delta_eval(n, Q) - delta(n)| for |n| <= 50 and Q in {4.5, 8, 10, 16}; every cell is kept."""
    start = time.perf_counter()
    tol = cfg.tolerances.delta
    Qs = (4.5, 8.0, 10.0, 16.0)
    report = SweepReport(
        suite="delta", grid={"n_max": 50, "Q": list(Qs)}, guard=tol,
        guard_label="identity tolerance (absolute)", columns=["n", "Q"], reference_name="delta",
    )
    for Q in Qs:
        for n in range(-50, 51):
            v = delta_eval(n, Q)
            target = 1.0 if n == 0 else 0.0
            c = Cell({"n": n, "Q": Q}, v, target, abs(v - target))
            report.cells.append(c)
            if c.ratio >= tol:
                report.violations.append(c)
    return report.finalize(time.perf_counter() - start)


def suite_voronoi(cfg: RunConfig) -> SweepReport:
    """Voronoi for the d_3 model with g = bump on [50, 100]: residual after refinement, monotone trace."""
    start = time.perf_counter()
    qs = (1, 2, 3, 5) if cfg.grid == "full" else (1, 2)
    tol = cfg.tolerances.voronoi
    model = HeckeCoefficientModel.trivial()
    contour = ContourSpec(sigma=cfg.analytic.sigma, height=1600.0, step=0.05)
    report = SweepReport(
        suite="voronoi", grid={"q": list(qs), "g": "bump(75, 25)", "y_levels": list(VORONOI_LEVELS)},
        guard=tol, guard_label="identity tolerance (relative)", columns=["a", "q"],
    )
    for q in qs:
        for a in units(q):
            a = a if q > 1 else 1
            res = voronoi_check(model, a, q, VORONOI_BUMP, VORONOI_LEVELS, contour=contour)
            c = Cell({"a": a, "q": q}, res.lhs, abs(res.lhs), res.final_residual,
                     {"polar": res.polar, "trace": res.trace(), "monotone": res.monotone()})
            report.cells.append(c)
            if res.final_residual >= tol or not res.monotone() or len(res.residuals) < 4:
                report.violations.append(c)
    return report.finalize(time.perf_counter() - start)


def pipeline_instances(cfg: RunConfig) -> list[tuple[int, int, float]]:
    if cfg.grid == "full":
        return [(M1, M2, N) for M1, M2 in ((5, 7), (7, 11)) for N in (500.0, 1000.0, 2000.0)]
    return [(5, 7, 500.0)]


def poisson_instances(p: PipelineParams, qs=(1, 2, 3)) -> list[tuple[int, int, int]]:
    """(a, b, q): smallest admissible a for each q, every b mod M1."""
    out = []
    for q in qs:
        if math.gcd(q, p.M) != 1:
            continue
        a = next(x for x in range(math.floor(p.Q) + 1, math.floor(p.Q + q) + 1) if x > p.Q and math.gcd(x, q) == 1)
        out += [(a, b, q) for b in range(p.M1)]
    return out


def suite_pipeline(cfg: RunConfig) -> SweepReport:
    """Circle decomposition and congruence split on each instance, Poisson step on the pinned one."""
    start = time.perf_counter()
    t = cfg.tolerances
    report = SweepReport(
        suite="pipeline", grid={"instances": [list(x) for x in pipeline_instances(cfg)]},
        guard=1.0, guard_label="residual / tolerance", columns=["check", "M1", "M2", "N", "a", "b", "q"],
    )

    def add(check, p, resid, tol, value=None, extra=None, abq=(None, None, None)):
        a, b, q = abq
        c = Cell({"check": check, "M1": p.M1, "M2": p.M2, "N": p.N, "a": a, "b": b, "q": q},
                 value, tol, resid / tol, {"residual": resid, **(extra or {})})
        report.cells.append(c)
        if resid >= tol:
            report.violations.append(c)

    for M1, M2, N in pipeline_instances(cfg):
        p = PipelineParams.build(N, M1, M2)
        circ = S_circle_decomposition(p, strict=False)
        add("circle", p, circ.residual, t.circle, circ.S)
        split = congruence_split(p, strict=False)
        add("congruence-split", p, split.residual, t.split, split.S_tilde)
    p = PipelineParams.build(500.0, 5, 7)
    for a, b, q in poisson_instances(p):
        r = poisson_step_check(a, b, q, p, strict=False)
        add("poisson", p, r.residual, t.poisson, r.lhs, {"m_cut": r.m_cut}, (a, b, q))
        add("poisson-tail", p, r.stability, t.tail, r.rhs_doubled, {"m_cut": r.m_cut}, (a, b, q))
    return report.finalize(time.perf_counter() - start)


def voronoi_step_instances(p: PipelineParams, qs=(1, 2)) -> list[tuple[int, int, int]]:
    return [(a, b, q) for a, _, q in poisson_instances(p, qs)[:: p.M1] for b in range(1, p.M1)]


def suite_voronoi_step(cfg: RunConfig, instances=None) -> SweepReport:
    """T(a,b;q) against its Poisson + Voronoi transform on the tiny instance M1=5, M2=7, N=200."""
    start = time.perf_counter()
    p = PipelineParams.build(200.0, 5, 7)
    inst = instances or voronoi_step_instances(p)
    tol = cfg.tolerances.voronoi_step
    report = SweepReport(
        suite="voronoi-step", grid={"M1": 5, "M2": 7, "N": 200.0, "instances": [list(x) for x in inst],
                                    "n_cutoff_factors": [32, 128, 512, 2048],
                                    "noise_floor": 0.1 * cfg.tolerances.voronoi_step},
        guard=tol, guard_label="identity tolerance (relative, compounded quadrature)", columns=["a", "b", "q"],
    )
    for a, b, q in inst:
        r = voronoi_step_check(a, b, q, p)
        mono = r.monotone(0.1, floor=0.1 * tol)
        c = Cell({"a": a, "b": b, "q": q}, r.lhs, abs(r.lhs), r.final_residual,
                 {"trace": r.trace(), "monotone": mono, "monotone_strict": r.monotone(0.1), "m_values": r.m_values})
        report.cells.append(c)
        if r.final_residual >= tol or not mono:
            report.violations.append(c)
    return report.finalize(time.perf_counter() - start)


VERIFY_SUITES: dict[str, Callable[[RunConfig], SweepReport]] = {
    "characters": suite_characters,
    "classical": suite_classical,
    "char-exp": suite_char_exp,
    "cstar-factorization": suite_cstar,
    "astar": suite_astar,
    "bstar": suite_bstar,
    "delta": suite_delta,
    "voronoi": suite_voronoi,
    "pipeline": suite_pipeline,
    "voronoi-step": suite_voronoi_step,
}


# ---------------------------------------------------------------- sweeps


def sweep_weil(cfg: RunConfig) -> SweepReport:
    return weil_check(cfg.cmax, strict=False, workers=cfg.workers)


def sweep_deligne(cfg: RunConfig) -> SweepReport:
    return ps.deligne_ratio_sweep(cfg.m1, guard=cfg.guards.deligne, strict=False, workers=cfg.workers)


def sweep_c_error(cfg: RunConfig) -> SweepReport:
    inst = ((5, 7, 2), (5, 7, 3), (7, 11, 2)) if cfg.grid == "full" else ((5, 7, 2),)
    return ps.c_error_sweep(inst, guard=cfg.guards.c_error, strict=False)


def sweep_istar_decay(cfg: RunConfig) -> SweepReport:
    p = PipelineParams.build(200.0, 5, 7)
    Ls = (2.0, 8.0, 32.0) if cfg.grid == "full" else (8.0,)
    return istar_decay_sweep(p, Ls, guard=cfg.guards.istar, strict=False)


SWEEPS: dict[str, Callable[[RunConfig], SweepReport]] = {
    "weil": sweep_weil,
    "deligne": sweep_deligne,
    "c-error": sweep_c_error,
    "istar-decay": sweep_istar_decay,
}


def run_verify(name: str, cfg: RunConfig) -> SweepReport:
    return _stamp(VERIFY_SUITES[name](cfg), cfg)


def run_sweep(name: str, cfg: RunConfig) -> SweepReport:
    return _stamp(SWEEPS[name](cfg), cfg)
