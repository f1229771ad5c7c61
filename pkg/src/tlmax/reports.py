"""Report containers, trend fits, and deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import __version__

# trials whose RHS falls below this fraction of (LHS + 1) are flagged degenerate
DEGENERATE_TOL = 1e-14


def _clean(obj):
    """Make ``obj`` JSON-safe with stable float formatting."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=1)


def trend_fit(x, y, log: bool = True) -> dict:
    """Least-squares slope of ``log y`` (or ``y``) against ``x`` with a 95% band."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    yy = np.log(y) if log else y
    if len(x) < 3:
        return {"slope": float("nan"), "stderr": float("nan"), "ci95": [float("nan")] * 2,
                "intercept": float("nan"), "r2": float("nan"), "n": len(x)}
    fit = stats.linregress(x, yy)
    tcrit = stats.t.ppf(0.975, len(x) - 2)
    half = tcrit * fit.stderr
    return {"slope": float(fit.slope), "stderr": float(fit.stderr),
            "ci95": [float(fit.slope - half), float(fit.slope + half)],
            "intercept": float(fit.intercept), "r2": float(fit.rvalue**2), "n": len(x)}


def ratio_row(lhs: float, rhs: float, **params) -> dict:
    degenerate = bool(rhs < DEGENERATE_TOL * (lhs + 1.0))
    ratio = float("nan") if degenerate else lhs / rhs
    return {**params, "lhs": float(lhs), "rhs": float(rhs), "ratio": ratio,
            "degenerate": degenerate}


@dataclass
class Report:
    """Named table of rows with threshold checks.

    ``checks`` maps a threshold name to ``{"value", "limit", "passed"}``;
    ``passed`` is the conjunction of all of them.
    """

    name: str
    params: dict
    rows: list = field(default_factory=list)
    trend: dict | None = None
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def add_check(self, name: str, value, limit, passed: bool) -> None:
        self.checks[name] = {"value": value, "limit": limit, "passed": bool(passed)}

    def to_dict(self) -> dict:
        return {"name": self.name, "version": __version__, "params": self.params,
                "trend": self.trend, "checks": self.checks, "passed": self.passed,
                "extra": self.extra, "rows": self.rows}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)


@dataclass
class RatioReport(Report):
    """LHS / RHS table of one inequality check; degenerate rows are excluded from the max."""

    @property
    def live_rows(self) -> list:
        return [r for r in self.rows if not r.get("degenerate", False)]

    @property
    def max_ratio(self) -> float:
        vals = [r["ratio"] for r in self.live_rows]
        return float(max(vals)) if vals else float("nan")

    @property
    def degenerate_count(self) -> int:
        return sum(bool(r.get("degenerate", False)) for r in self.rows)

    def to_dict(self) -> dict:
        out = super().to_dict()
        out.update(max_ratio=self.max_ratio, degenerate_count=self.degenerate_count)
        return out


@dataclass
class GrowthReport(Report):
    """Series against a truncation parameter (K or N) with fitted rates."""


def rows_to_csv(rows: list) -> str:
    """One line per row, columns in first-seen order; schema version in a header comment."""
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    buf.write("# tlmax-csv v1\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def run_jobs(fn, jobs: list, workers: int = 1) -> list:
    """Apply ``fn`` to every job, in order; ``workers > 1`` uses a process pool.

    Results are returned in job order, so reports do not depend on the
    number of workers.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
