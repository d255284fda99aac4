"""Command-line front end.

    subconv-lab verify SUITE   [--config PATH] [--out DIR] [--workers N] [--grid small|full]
    subconv-lab sweep TARGET   [... same ...] [--cmax C] [--m1 5,7,...]
    subconv-lab pipeline       [... same ...] [--voronoi-step]

Exit codes: 0 all checks pass, 1 a mathematical check failed (the report holds
the witness), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config
from .errors import CheckFailure, SubconvError, UsageError
from .parallel import resolve_workers
from .report import SweepReport, _jsonable, emit_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=str, default=None, help="INI config file")
    p.add_argument("--out", type=str, default=None, help="output directory for reports")
    p.add_argument("--workers", type=int, default=None, help="worker processes (SUBCONV_LAB_WORKERS overrides)")
    p.add_argument("--grid", choices=("small", "full"), default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subconv-lab", description="Numerical checks of a GL(3) x GL(1) circle-method argument.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    common = _common()
    v = sub.add_parser("verify", parents=[common], help="run an identity-check suite")
    v.add_argument("suite")
    s = sub.add_parser("sweep", parents=[common], help="run a bound-ratio sweep (CSV + JSON)")
    s.add_argument("target")
    s.add_argument("--cmax", type=int, default=None, help="largest Kloosterman modulus (weil)")
    s.add_argument("--m1", type=str, default=None, help="comma-separated M1 list (deligne)")
    pl = sub.add_parser("pipeline", parents=[common], help="decomposition checks and audits (JSON lines)")
    pl.add_argument("--voronoi-step", action="store_true", help="also run the Voronoi-step check (N=200)")
    return parser


def _config(args) -> RunConfig:
    over = {"out": args.out, "grid": args.grid}
    if getattr(args, "cmax", None) is not None:
        over["cmax"] = args.cmax
    if getattr(args, "m1", None) is not None:
        try:
            over["m1"] = tuple(int(t) for t in args.m1.split(",") if t.strip())
        except ValueError as exc:
            raise UsageError(f"bad --m1 list {args.m1!r}") from exc
    cfg = load_config(args.config, **over)
    workers = resolve_workers(args.workers if args.workers is not None else cfg.workers)
    return replace(cfg, workers=workers)


def _summary_line(report: SweepReport) -> str:
    s = report.summary
    status = "PASS" if report.passed else "FAIL"
    return (f"{report.suite}: {status} cells={s.get('n_cells')} max_ratio={s.get('max_ratio')} "
            f"guard={s.get('guard')} violations={s.get('n_violations')} argmax={s.get('argmax')}")


def cmd_verify(suite: str, cfg: RunConfig) -> int:
    from .suites import VERIFY_SUITES, run_verify

    if suite not in VERIFY_SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(VERIFY_SUITES)}")
    report = run_verify(suite, cfg)
    path = emit_report(report, "json", Path(cfg.out) / f"verify-{suite}.json")
    print(_summary_line(report))
    print(f"report: {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_sweep(target: str, cfg: RunConfig) -> int:
    from .suites import SWEEPS, run_sweep

    if target not in SWEEPS:
        raise UsageError(f"unknown sweep target {target!r}; choose from {', '.join(SWEEPS)}")
    report = run_sweep(target, cfg)
    out = Path(cfg.out)
    emit_report(report, "csv", out / f"sweep-{target}.csv")
    emit_report(report, "json", out / f"sweep-{target}.json")
    print(_summary_line(report))
    print(f"reports: {out / f'sweep-{target}.csv'} {out / f'sweep-{target}.json'}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_pipeline(cfg: RunConfig, voronoi_step: bool = False) -> int:
    """Decomposition checks on the configured instance; one JSON record per check, no timestamps."""
    from .pipeline import (
        PipelineParams,
        S_circle_decomposition,
        congruence_split,
        error_term_audit,
        poisson_step_check,
        voronoi_step_check,
    )
    from .suites import poisson_instances, voronoi_step_instances

    k = cfg.pipeline
    p = PipelineParams.build(k.N, k.M1, k.M2, None if k.chi1 < 0 else k.chi1, None if k.chi2 < 0 else k.chi2)
    t = cfg.tolerances
    records, failed = [], False

    def emit(rec):
        records.append(rec)
        print(json.dumps(_jsonable(rec), sort_keys=True))

    base = {"N": p.N, "M1": p.M1, "M2": p.M2, "chi1": p.chi1.index, "chi2": p.chi2.index}
    emit({"record": "instance", **base, "Q": p.Q, "main_regime": p.main_regime, "config_hash": cfg.config_hash})
    circ = S_circle_decomposition(p, strict=False)
    ok = circ.residual < t.circle
    failed |= not ok
    emit({"record": "circle", "S": circ.S, "Splus": circ.Splus, "Sminus": circ.Sminus, "residual": circ.residual, "passed": ok})
    split = congruence_split(p, strict=False)
    ok = split.residual < t.split
    failed |= not ok
    emit({"record": "congruence-split", "S_tilde": split.S_tilde, "S0": split.S0, "T": split.T, "residual": split.residual, "passed": ok})
    for a, b, q in poisson_instances(p):
        r = poisson_step_check(a, b, q, p, strict=False)
        ok = r.residual < t.poisson and r.stability < t.tail
        failed |= not ok
        emit({"record": "poisson", "a": a, "b": b, "q": q, "lhs": r.lhs, "m_cut": r.m_cut,
              "trace": [{"m_cut": r.m_cut, "rhs": r.rhs}, {"m_cut": 2 * r.m_cut, "rhs": r.rhs_doubled}],
              "residual": r.residual, "stability": r.stability, "passed": ok})
    audit = error_term_audit(p)
    emit({"record": "error-term-audit", "cells": [c.to_dict() for c in audit.cells]})
    if voronoi_step:
        small = PipelineParams.build(200.0, 5, 7)
        for a, b, q in voronoi_step_instances(small):
            r = voronoi_step_check(a, b, q, small)
            ok = r.final_residual < t.voronoi_step and r.monotone(0.1, floor=0.1 * t.voronoi_step)
            failed |= not ok
            emit({"record": "voronoi-step", "a": a, "b": b, "q": q, "lhs": r.lhs, "trace": r.trace(),
                  "residual": r.final_residual, "passed": ok})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "pipeline.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = _config(args)
        if args.command == "verify":
            return cmd_verify(args.suite, cfg)
        if args.command == "sweep":
            return cmd_sweep(args.target, cfg)
        return cmd_pipeline(cfg, args.voronoi_step)
    except CheckFailure as exc:
        print(f"check failed: {exc}; witness={exc.witness}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, SubconvError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
