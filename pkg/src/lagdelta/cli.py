"""Command-line front end: ``lagdelta {verify,delta,scan,families}``.

Exit codes: 0 all enabled criteria pass, 1 a verification criterion
failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .ambient import GeometryError
from .curvature import (CurvatureTensor, constant_curvature_tensor, gauss_curvature_tensor,
                        gauss_tensor_from_h, second_fundamental_form)
from .delta import TupleSpec, delta_invariant, pattern_41, random_curvature_tensor
from .families.ode import OdeState, first_integral_residual, integrate_mu_nu
from .families.registry import FAMILIES, build_family, family_entry
from .immersion import chart_from_document
from .report import SCAN_COLUMNS, Settings, Tolerances, dumps, scan_row, scan_rows, verify_chart

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _kv(items):
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"--param expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _family_params(args):
    params = _kv(args.param)
    names = ("mu0", "nu0") if args.command == "delta" else ("mu0", "nu0", "c")
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    return params


def _chart(args):
    if bool(args.family) == bool(args.chart):
        raise UsageError("give exactly one of --family or --chart")
    if args.family:
        entry = family_entry(args.family)
        return build_family(args.family, **_family_params(args)), entry.ideal
    doc = _load_json(args.chart)
    return chart_from_document(doc), bool(doc.get("ideal", False))


def _write(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _settings(args, **over) -> Settings:
    tol = Tolerances()
    if args.tol is not None:
        tol.equality = args.tol
    for name in ("lagrangian", "constraint", "horizontality", "cubic_symmetry", "inequality"):
        v = getattr(args, f"tol_{name}", None)
        if v is not None:
            setattr(tol, name, v)
    return Settings(grid=getattr(args, "grid", 8), seed=args.seed, restarts=args.restarts,
                    oracle=getattr(args, "oracle", 0) or 0, workers=getattr(args, "workers", 1),
                    tolerances=tol, **over)


# -- verify -----------------------------------------------------------------------

def cmd_verify(args) -> int:
    chart, ideal = _chart(args)
    if args.no_equality:
        ideal = False
    report = verify_chart(chart, _settings(args), ideal=ideal)
    _write(dumps(report), args.out)
    summ = report["summary"]
    for name, c in summ["criteria"].items():
        print(f"{name:16s} {'pass' if c['passed'] else 'FAIL'}  value={c['value']} limit={c['limit']}",
              file=sys.stderr)
    return EXIT_OK if summ["passed"] else EXIT_FAIL


# -- delta ----------------------------------------------------------------------------

def _tensor_from_doc(doc) -> CurvatureTensor:
    if "R" in doc:
        R = np.array(doc["R"], dtype=float)
    else:
        m = int(doc["dimension"])
        R = np.zeros((m,) * 4)
        for *idx, val in doc["components"]:
            R[tuple(int(i) for i in idx)] = float(val)
    if R.ndim != 4 or len(set(R.shape)) != 1:
        raise UsageError("tensor must be m x m x m x m")
    T = CurvatureTensor(R)
    if T.symmetry_defect() > 1e-9:
        raise UsageError(f"not an algebraic curvature tensor (defect {T.symmetry_defect():.2e})")
    return T


def _parse_tuple(text, n):
    try:
        parts = tuple(int(x) for x in text.replace("(", "").replace(")", "").split(",") if x.strip())
        return TupleSpec(n, parts)
    except ValueError as exc:
        raise UsageError(f"invalid tuple {text!r}: {exc} (S(n) needs 2 <= n_j < n and sum n_j <= n)") from None


def cmd_delta(args) -> int:
    sources = [bool(args.tensor), bool(args.model), bool(args.family or args.chart)]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --tensor, --model, or --family/--chart with --point")
    source = {}
    if args.tensor:
        R = _tensor_from_doc(_load_json(args.tensor))
        source = {"tensor": args.tensor}
    elif args.model:
        m = args.dim
        if args.model == "flat":
            R = constant_curvature_tensor(m, 0.0)
        elif args.model == "constant":
            R = constant_curvature_tensor(m, args.c)
        elif args.model == "ratio4":
            if m != 5:
                raise UsageError("the ratio-4 tensor is 5-dimensional")
            R = gauss_tensor_from_h(pattern_41(0.0, 0.0, args.mu), args.c)
        else:
            R = random_curvature_tensor(args.seed, m)
        source = {"model": args.model, "dimension": m, "c": args.c, "mu": args.mu}
    else:
        chart, _ = _chart(args)
        u = chart.center if args.point is None else np.array([float(x) for x in args.point.split(",")])
        R = gauss_curvature_tensor(second_fundamental_form(chart, u))
        source = {"chart": chart.name, "point": u}
    spec = _parse_tuple(args.tuple, R.dim)
    res = delta_invariant(R, spec, restarts=args.restarts, seed=args.seed, oracle=args.oracle or 0)
    doc = {"schema_version": 1, "tool": {"name": "lagdelta", "version": __version__},
           "source": source, "result": res.to_dict()}
    _write(dumps(doc), args.out)
    return EXIT_OK if res.converged else EXIT_FAIL


# -- scan ---------------------------------------------------------------------------------

def _values(text):
    """'a:b:n' (inclusive linspace), 'a:b' integer range, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) == 3:
            return list(np.linspace(float(parts[0]), float(parts[1]), int(parts[2])))
        if len(parts) == 2:
            return list(range(int(parts[0]), int(parts[1]) + 1))
        raise UsageError(f"bad value grid {text!r}")
    return [float(x) if any(ch in x for ch in ".eE") else int(x) for x in text.split(",")]


def cmd_scan(args) -> int:
    if args.ode:
        fam = args.ode.upper()
        traj = integrate_mu_nu(fam, OdeState(0.0, args.mu0 or 1.0, args.nu0 or 0.0, family=fam),
                               args.span, args.step)
        text = traj.to_csv()
        if fam == "CH5":
            lines = text.splitlines()
            lines[0] += ",mu2_plus_nu2"
            for i, (mu, nu) in enumerate(zip(traj.mu, traj.nu), start=1):
                lines[i] += "," + repr(float(mu * mu + nu * nu))
            text = "\n".join(lines) + "\n"
        _write(text, args.out)
        return EXIT_OK if traj.reason is None and first_integral_residual(traj) <= 1e-8 else EXIT_FAIL
    if not args.family or not args.param_name or not args.values:
        raise UsageError("scan needs --family, --vary and --values (or --ode)")
    entry = family_entry(args.family)
    base = _kv(args.param)
    values = _values(args.values)
    if any(b < a for a, b in zip(values, values[1:])):
        raise UsageError("scan values must be monotone increasing")
    settings = _settings(args)

    def build(v):
        return build_family(args.family, **{**base, args.param_name: v})

    rows = [scan_row(args.param_name, v, build, settings, args.points) for v in values]
    if args.format == "json":
        _write(dumps({"schema_version": 1, "columns": SCAN_COLUMNS, "rows": rows}), args.out)
    else:
        _write(scan_rows(rows), args.out)
    tol = settings.tolerances
    ok = True
    for r in rows:
        if r.get("status") != "ok":
            continue
        if r.get("min_slack") is not None and r["min_slack"] < -tol.inequality:
            ok = False
        if entry.ideal and r.get("max_abs_equality_residual") is not None \
                and r["max_abs_equality_residual"] > tol.equality:
            ok = False
    return EXIT_OK if ok else EXIT_FAIL


# -- families -------------------------------------------------------------------------------

def cmd_families(args) -> int:
    if args.format == "json":
        doc = {name: {"summary": e.summary, "c": e.c, "ideal": e.ideal,
                      "params": {p.name: p.describe() for p in e.params}}
               for name, e in sorted(FAMILIES.items())}
        _write(dumps(doc), args.out)
    else:
        lines = []
        for name, e in sorted(FAMILIES.items()):
            ps = ", ".join(p.describe() for p in e.params) or "-"
            lines.append(f"{name:20s} c={e.c:+d}  {ps}\n    {e.summary}")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------------------

def _common(p, grid=True):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=64, help="optimizer restarts per point")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--tol", type=float, help="equality tolerance (default 1e-5)")
    if grid:
        p.add_argument("--grid", type=int, default=8, help="grid resolution per axis (two axes)")
        p.add_argument("--oracle", type=int, default=0, help="brute-force oracle samples per point")
        p.add_argument("--workers", type=int, default=1)
    for name in ("lagrangian", "constraint", "horizontality", "cubic-symmetry", "inequality"):
        p.add_argument(f"--tol-{name}", type=float, dest=f"tol_{name.replace('-', '_')}")


def _chart_args(p):
    p.add_argument("--family", help="built-in family name (see 'families')")
    p.add_argument("--chart", help="JSON chart document")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="family parameter")
    p.add_argument("--mu0", type=float)
    p.add_argument("--nu0", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lagdelta", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lagdelta {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify a family or chart on a grid and write a JSON report")
    _chart_args(v)
    v.add_argument("--c", type=float, help="family constant c")
    v.add_argument("--no-equality", action="store_true", help="check the inequality only")
    v.add_argument("--format", choices=["json"], default="json")
    _common(v)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("delta", help="delta invariant of a curvature tensor or chart point")
    _chart_args(d)
    d.add_argument("--tensor", help="JSON tensor: {'R': nested list} or {'dimension', 'components'}")
    d.add_argument("--model", choices=["flat", "constant", "ratio4", "random"])
    d.add_argument("--dim", type=int, default=5)
    d.add_argument("--c", type=float, default=0.0)
    d.add_argument("--mu", type=float, default=0.5)
    d.add_argument("--point", help="comma-separated chart coordinates (default: box centre)")
    d.add_argument("--tuple", default="2,2")
    d.add_argument("--oracle", type=int, default=0)
    d.add_argument("--format", choices=["json"], default="json")
    _common(d, grid=False)
    d.set_defaults(func=cmd_delta)

    s = sub.add_parser("scan", help="sweep a family parameter (CSV) or tabulate an ODE trajectory")
    _chart_args(s)
    s.add_argument("--c", type=float)
    s.add_argument("--vary", dest="param_name", help="parameter to sweep")
    s.add_argument("--values", help="a:b:n, a:b (integers) or comma list")
    s.add_argument("--points", type=int, default=4, help="sample points per row")
    s.add_argument("--ode", choices=["C5", "CP5", "CH5", "c5", "cp5", "ch5"])
    s.add_argument("--span", type=float, default=1.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    _common(s, grid=False)
    s.set_defaults(func=cmd_scan)

    f = sub.add_parser("families", help="list built-in families with parameter ranges")
    f.add_argument("--format", choices=["text", "json"], default="text")
    f.add_argument("--out")
    f.set_defaults(func=cmd_families)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, KeyError, ValueError, GeometryError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"lagdelta: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
