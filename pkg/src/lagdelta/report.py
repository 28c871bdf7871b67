"""Verification sweeps over a chart and their JSON/CSV reports."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .ambient import GeometryError, apply_J, inner
from .curvature import gauss_curvature_tensor, second_fundamental_form
from .delta import TupleSpec, canonical_frame_fit, delta_invariant, improved_rhs
from .immersion import ChartImmersion, evaluate_jet, grid_points, lagrangian_residual

SCHEMA_VERSION = 1


@dataclass
class Tolerances:
    lagrangian: float = 1e-9
    constraint: float = 1e-8
    horizontality: float = 1e-8
    cubic_symmetry: float = 1e-8
    inequality: float = 1e-7
    equality: float = 1e-5

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Settings:
    grid: int = 8
    seed: int = 0
    restarts: int = 64
    oracle: int = 0
    fit: bool = True
    workers: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k not in ("tolerances", "workers")}
        d["tolerances"] = self.tolerances.as_dict()
        return d


def clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    return str(x)


def dumps(doc) -> str:
    return json.dumps(clean(doc), sort_keys=True, indent=2) + "\n"


def point_record(chart: ChartImmersion, u, settings: Settings, index: int = 0) -> dict:
    rec = {"index": index, "u": [float(x) for x in u], "error": None}
    res = {}
    try:
        jt = evaluate_jet(chart, u, 2)
        res["lagrangian"] = lagrangian_residual(chart, u, jt)
        if chart.is_lift:
            res["constraint"] = float(abs(inner(jt.value, jt.value, chart.space) - chart.space.c))
            res["horizontality"] = float(np.abs(inner(jt.d1, apply_J(jt.value), chart.space)).max())
        pg = second_fundamental_form(chart, u, jt)
    except GeometryError as exc:
        rec["residuals"] = res
        rec["error"] = str(exc)
        return rec
    res["cubic_symmetry"] = pg.symmetry_residual
    rec["residuals"] = res
    rec["H2"] = pg.mean_sq
    if chart.dim == 5:
        spec = TupleSpec(5, (2, 2))
        R = gauss_curvature_tensor(pg)
        d = delta_invariant(R, spec, restarts=settings.restarts, seed=settings.seed,
                            oracle=settings.oracle)
        rhs = improved_rhs(spec, pg.mean_sq, pg.c)
        rec.update(delta22=d.value, rhs=rhs, equality_residual=d.value - rhs,
                   optimizer_converged=d.converged)
        if settings.oracle:
            rec["oracle_gap"] = d.oracle_gap
        if settings.fit:
            rec["fit"] = canonical_frame_fit(pg, seed=settings.seed).to_dict()
    return rec


def _max(records, getter):
    vals = []
    for r in records:
        try:
            v = getter(r)
        except (KeyError, TypeError):
            continue
        if v is not None:
            vals.append(float(v))
    return max(vals) if vals else None


def summarize(records: list, chart: ChartImmersion, ideal: bool, tol: Tolerances) -> dict:
    s = {
        "points": len(records),
        "errors": sum(1 for r in records if r["error"]),
        "max_lagrangian": _max(records, lambda r: r["residuals"]["lagrangian"]),
        "max_cubic_symmetry": _max(records, lambda r: r["residuals"]["cubic_symmetry"]),
    }
    crit = {"geometry": {"value": s["errors"], "limit": 0, "passed": s["errors"] == 0},
            "lagrangian": _crit(s["max_lagrangian"], tol.lagrangian)}
    if chart.is_lift:
        s["max_constraint"] = _max(records, lambda r: r["residuals"]["constraint"])
        s["max_horizontality"] = _max(records, lambda r: r["residuals"]["horizontality"])
        crit["constraint"] = _crit(s["max_constraint"], tol.constraint)
        crit["horizontality"] = _crit(s["max_horizontality"], tol.horizontality)
    crit["cubic_symmetry"] = _crit(s["max_cubic_symmetry"], tol.cubic_symmetry)
    if chart.dim == 5:
        s["max_equality_residual"] = _max(records, lambda r: r["equality_residual"])
        s["max_abs_equality_residual"] = _max(records, lambda r: abs(r["equality_residual"]))
        crit["inequality"] = _crit(s["max_equality_residual"], tol.inequality)
        if ideal:
            crit["equality"] = _crit(s["max_abs_equality_residual"], tol.equality)
    s["criteria"] = crit
    s["passed"] = all(c["passed"] for c in crit.values())
    return s


def _crit(value, limit):
    return {"value": value, "limit": limit, "passed": value is not None and value <= limit}


def verify_chart(chart: ChartImmersion, settings: Settings | None = None, ideal: bool = False,
                 points=None) -> dict:
    settings = Settings() if settings is None else settings
    pts = grid_points(chart, settings.grid) if points is None else np.asarray(points, float)
    work = lambda iu: point_record(chart, iu[1], settings, iu[0])
    if settings.workers > 1:
        with ThreadPoolExecutor(settings.workers) as ex:
            records = list(ex.map(work, enumerate(pts)))
    else:
        records = [work(x) for x in enumerate(pts)]
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "lagdelta", "version": __version__},
        "chart": chart_identity(chart),
        "ideal_expected": ideal,
        "settings": settings.as_dict(),
        "points": records,
        "summary": summarize(records, chart, ideal, settings.tolerances),
    }


def chart_identity(chart: ChartImmersion) -> dict:
    params = {k: v for k, v in chart.params.items() if not callable(v)}
    return {"name": chart.name, "space": chart.space.label, "dimension": chart.dim,
            "is_lift": chart.is_lift, "domain": {"lower": chart.lower, "upper": chart.upper},
            "params": params}


SCAN_COLUMNS = ["param", "value", "status", "points", "delta22", "H2", "rhs", "equality_residual",
                "max_abs_equality_residual", "min_slack", "max_lagrangian", "fit_a", "fit_b", "fit_mu"]


def scan_rows(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in SCAN_COLUMNS})
    return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def scan_row(param: str, value, build, settings: Settings, points: int = 4) -> dict:
    """Verify a few points of the chart built for one parameter value."""
    row = {"param": param, "value": value}
    try:
        chart = build(value)
    except (GeometryError, ValueError) as exc:
        row["status"] = f"domain-exit: {exc}"
        return row
    from .immersion import sample_points
    pts = sample_points(chart, points, seed=settings.seed)
    recs = [point_record(chart, u, settings, i) for i, u in enumerate(pts)]
    bad = [r for r in recs if r["error"]]
    row["points"] = len(recs)
    if bad:
        row["status"] = f"error: {bad[0]['error']}"
        return row
    first = recs[0]
    row["status"] = "ok"
    row["max_lagrangian"] = max(r["residuals"]["lagrangian"] for r in recs)
    if "delta22" in first:
        row.update(delta22=first["delta22"], H2=first["H2"], rhs=first["rhs"],
                   equality_residual=first["equality_residual"])
        row["max_abs_equality_residual"] = max(abs(r["equality_residual"]) for r in recs)
        row["min_slack"] = min(-r["equality_residual"] for r in recs)
        if "fit" in first:
            row.update(fit_a=first["fit"]["a"], fit_b=first["fit"]["b"], fit_mu=first["fit"]["mu"])
    return row
