"""Sweep reports and their JSON / CSV serialization.

JSON layout (stable key order)::

    {"suite", "tool_version", "config_hash", "grid", "guard", "guard_label",
     "columns", "reference_name", "cells": [...], "violations": [...],
     "summary": {...}, "timing": {"timestamp", "wall_time"}}

``timing`` is the only non-deterministic block.  CSV files hold one row per
cell with the columns ``<inputs...>, value_re, value_im, <reference_name>, ratio``.
Floats are written with 17 significant digits in CSV and with Python's
shortest round-trip repr in JSON; both parse back to the identical double.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__


@dataclass
class Cell:
    inputs: dict[str, Any]
    value: complex | float | None = None
    reference: float | None = None
    ratio: float | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        v = None if self.value is None else complex(self.value)
        return {
            "inputs": self.inputs,
            "value_re": None if v is None else v.real,
            "value_im": None if v is None else v.imag,
            "reference": self.reference,
            "ratio": self.ratio,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Cell":
        value = None
        if d.get("value_re") is not None:
            value = complex(d["value_re"], d["value_im"])
        return cls(d["inputs"], value, d.get("reference"), d.get("ratio"), d.get("extra", {}))


@dataclass
class SweepReport:
    suite: str
    grid: dict[str, Any] = field(default_factory=dict)
    cells: list[Cell] = field(default_factory=list)
    violations: list[Cell] = field(default_factory=list)
    guard: float | None = None
    guard_label: str = ""
    columns: list[str] | None = None
    reference_name: str = "reference"
    summary: dict[str, Any] = field(default_factory=dict)
    config_hash: str = ""
    tool_version: str = __version__
    timestamp: str = ""
    wall_time: float = 0.0

    def finalize(self, wall_time: float = 0.0, slack: float = 0.0) -> "SweepReport":
        ratios = [(c.ratio, i) for i, c in enumerate(self.cells) if c.ratio is not None and math.isfinite(c.ratio)]
        if ratios:
            max_ratio, idx = max(ratios, key=lambda t: t[0])
            argmax = self.cells[idx].inputs
        else:
            max_ratio, argmax = None, None
        within_guard = self.guard is None or max_ratio is None or max_ratio <= self.guard * (1 + slack)
        self.summary = {
            "n_cells": len(self.cells),
            "max_ratio": max_ratio,
            "argmax": argmax,
            "guard": self.guard,
            "n_violations": len(self.violations),
            "passed": bool(within_guard and not self.violations),
        }
        if self.columns is None and self.cells:
            self.columns = list(self.cells[0].inputs)
        self.wall_time = wall_time
        self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return self

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("passed", False))

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "tool_version": self.tool_version,
            "config_hash": self.config_hash,
            "grid": self.grid,
            "guard": self.guard,
            "guard_label": self.guard_label,
            "columns": self.columns or [],
            "reference_name": self.reference_name,
            "cells": [c.to_dict() for c in self.cells],
            "violations": [c.to_dict() for c in self.violations],
            "summary": self.summary,
            "timing": {"timestamp": self.timestamp, "wall_time": self.wall_time},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SweepReport":
        return cls(
            suite=d["suite"],
            grid=d.get("grid", {}),
            cells=[Cell.from_dict(c) for c in d.get("cells", [])],
            violations=[Cell.from_dict(c) for c in d.get("violations", [])],
            guard=d.get("guard"),
            guard_label=d.get("guard_label", ""),
            columns=d.get("columns") or None,
            reference_name=d.get("reference_name", "reference"),
            summary=d.get("summary", {}),
            config_hash=d.get("config_hash", ""),
            tool_version=d.get("tool_version", __version__),
            timestamp=d.get("timing", {}).get("timestamp", ""),
            wall_time=d.get("timing", {}).get("wall_time", 0.0),
        )


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def report_to_json(report: SweepReport) -> str:
    return json.dumps(_jsonable(report.to_dict()), indent=1) + "\n"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def csv_header(report: SweepReport) -> list[str]:
    return list(report.columns or []) + ["value_re", "value_im", report.reference_name, "ratio"]


def report_to_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(report.columns or [])
    writer.writerow(csv_header(report))
    for c in report.cells:
        v = None if c.value is None else complex(c.value)
        writer.writerow(
            [_fmt(c.inputs.get(k)) for k in cols]
            + [_fmt(None if v is None else v.real), _fmt(None if v is None else v.imag), _fmt(c.reference), _fmt(c.ratio)]
        )
    return buf.getvalue()


def emit_report(report: SweepReport, fmt: str, path: str | Path) -> Path:
    """Write ``report`` as ``json`` or ``csv``; raises OSError on IO failure."""
    path = Path(path)
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def load_report(path: str | Path) -> SweepReport:
    return SweepReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
