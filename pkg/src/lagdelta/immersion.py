"""Parametrized immersion charts, their jets and the Lagrangian test.

A chart is a map from an axis-aligned box in R^m into an ambient model.
Built-in charts supply ``jet_map`` (exact derivatives through :mod:`jet`);
user charts may supply only ``point_map`` and fall back to Richardson
finite differences.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import jet as J
from .ambient import AmbientSpace, GeometryError, apply_J, inner
from .jet import Jet

IMMERSION_FLOOR = 1e-6
# per-order steps (times domain scale) for the O(h^4) Richardson stencils
FD_STEPS = (1e-3, 2e-3, 5e-3)
CHART_SCHEMA_VERSION = 1


class DegenerateImmersion(GeometryError):
    pass


@dataclass(frozen=True)
class Jet3:
    """Value and partial derivatives (full symmetric arrays) at one chart point."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None
    backend: str = "jet"

    @property
    def order(self) -> int:
        return 1 + (self.d2 is not None) + (self.d3 is not None)


@dataclass(frozen=True, eq=False)
class ChartImmersion:
    name: str
    space: AmbientSpace
    lower: np.ndarray
    upper: np.ndarray
    jet_map: Callable[[list[Jet]], Jet] | None = None
    point_map: Callable[[np.ndarray], np.ndarray] | None = None
    is_lift: bool = False
    params: dict = field(default_factory=dict)
    max_order: int = 3

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if self.jet_map is None and self.point_map is None:
            raise ValueError("a chart needs jet_map or point_map")
        if self.is_lift != self.space.is_lift_model:
            raise ValueError("is_lift must match the ambient model")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def scale(self) -> float:
        return float(np.max(self.upper - self.lower))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, u, margin: float = 0.0) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u > self.lower + margin) and np.all(u < self.upper - margin))

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.point_map is not None:
            return np.asarray(self.point_map(u), dtype=complex)
        return np.asarray(self.jet_map(Jet.variables(u, 0)).value, dtype=complex)

    def black_box(self) -> ChartImmersion:
        """Same map with derivatives hidden (forces the finite-difference backend)."""
        return ChartImmersion(self.name + "/fd", self.space, self.lower, self.upper,
                              point_map=self.__call__, is_lift=self.is_lift,
                              params=dict(self.params), max_order=self.max_order)


# -- jets ---------------------------------------------------------------

def evaluate_jet(f: ChartImmersion, u, order: int = 2, backend: str = "auto",
                 steps=None) -> Jet3:
    """Value and partial derivatives of ``f`` at ``u`` up to ``order`` (1..3)."""
    u = np.asarray(u, dtype=float)
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if order > f.max_order:
        raise ValueError(f"chart {f.name!r} supports derivatives up to order {f.max_order}")
    if u.shape != (f.dim,) or not f.contains(u):
        raise GeometryError(f"point {u} is not strictly inside the chart domain")
    if backend == "auto":
        backend = "jet" if f.jet_map is not None else "fd"
    if backend == "jet":
        if f.jet_map is None:
            raise ValueError("chart has no jet map")
        d = f.jet_map(Jet.variables(u, order)).derivatives()
        d = [np.asarray(x, dtype=complex) for x in d]
        return Jet3(d[0], d[1], d[2] if order >= 2 else None, d[3] if order >= 3 else None, "jet")
    if backend == "fd":
        return _fd_jet(f, u, order, steps)
    raise ValueError(f"unknown backend {backend!r}")


def _richardson(g, h):
    """Combine an O(h^2) stencil at h and h/2 into an O(h^4) estimate."""
    return (4.0 * g(h / 2) - g(h)) / 3.0


def _fd_jet(f: ChartImmersion, u, order, steps) -> Jet3:
    steps = FD_STEPS if steps is None else steps
    m = f.dim
    E = np.eye(m)
    val = f(u)
    span = f.scale
    # keep the widest stencil inside the box
    room = np.min(np.minimum(u - f.lower, f.upper - u))

    def step(k):
        h = steps[k] * span
        if 2 * h > room:
            h = room / 2.5
        return h

    h1 = step(0)
    d1 = np.stack([_richardson(lambda h, e=E[i]: (f(u + h * e) - f(u - h * e)) / (2 * h), h1)
                   for i in range(m)])
    d2 = d3 = None
    if order >= 2:
        h2 = step(1)
        d2 = np.zeros((m, m) + val.shape, dtype=complex)
        for i in range(m):
            for j in range(i, m):
                if i == j:
                    g = lambda h, e=E[i]: (f(u + h * e) - 2 * val + f(u - h * e)) / h**2
                else:
                    g = lambda h, a=E[i], b=E[j]: (f(u + h * a + h * b) - f(u + h * a - h * b)
                                                   - f(u - h * a + h * b) + f(u - h * a - h * b)) / (4 * h * h)
                d2[i, j] = d2[j, i] = _richardson(g, h2)
    if order >= 3:
        h3 = step(2)
        d3 = np.zeros((m, m, m) + val.shape, dtype=complex)

        def second(v, i, j, h):
            if i == j:
                e = E[i]
                return (f(v + h * e) - 2 * f(v) + f(v - h * e)) / h**2
            a, b = E[i], E[j]
            return (f(v + h * a + h * b) - f(v + h * a - h * b)
                    - f(v - h * a + h * b) + f(v - h * a - h * b)) / (4 * h * h)

        for i, j, k in itertools.combinations_with_replacement(range(m), 3):
            ek = E[k]

            def g(h, i=i, j=j, ek=ek):
                inner_h = h / 2
                return (second(u + h * ek, i, j, inner_h) - second(u - h * ek, i, j, inner_h)) / (2 * h)

            val3 = _richardson(g, h3)
            for p in set(itertools.permutations((i, j, k))):
                d3[p] = val3
    return Jet3(val, d1, d2, d3, "fd")


# -- first-order geometry ------------------------------------------------

def induced_metric(f: ChartImmersion, u, jet3: Jet3 | None = None,
                   floor: float = IMMERSION_FLOOR) -> np.ndarray:
    jt = jet3 if jet3 is not None else evaluate_jet(f, u, 1)
    d1 = jt.d1
    g = inner(d1[:, None, :], d1[None, :, :], f.space)
    g = 0.5 * (g + g.T)
    ev = np.linalg.eigvalsh(g)
    if ev[0] <= 0 or math.sqrt(ev[0] / ev[-1]) < floor:
        raise DegenerateImmersion(f"induced metric degenerate at {u} (eigenvalues {ev})")
    return g


def lagrangian_residual(f: ChartImmersion, u, jet3: Jet3 | None = None) -> float:
    """Largest |omega(L_i, L_j)|; for lifts the position vector joins the tangent directions."""
    jt = jet3 if jet3 is not None else evaluate_jet(f, u, 1)
    vecs = list(jt.d1)
    if f.is_lift:
        vecs.append(jt.value)
    worst = 0.0
    for i, j in itertools.combinations(range(len(vecs)), 2):
        worst = max(worst, abs(float(inner(apply_J(vecs[i]), vecs[j], f.space))))
    return worst


def immersion_condition(f: ChartImmersion, u, floor: float = IMMERSION_FLOOR) -> float:
    """Ratio of smallest to largest singular value of the Jacobian."""
    d1 = evaluate_jet(f, u, 1).d1
    g = inner(d1[:, None, :], d1[None, :, :], f.space)
    ev = np.linalg.eigvalsh(0.5 * (g + g.T))
    return float(math.sqrt(max(ev[0], 0.0) / ev[-1]))


# -- polynomial charts ----------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Real or complex polynomial as a table of (exponent tuple, coefficient)."""

    nvars: int
    terms: tuple

    def __call__(self, xs):
        out = 0
        for e, c in self.terms:
            mono = 1
            for x, k in zip(xs, e):
                if k:
                    mono = mono * (x ** k if k > 1 else x)
            out = out + mono * c
        return out

    def gradient(self) -> list[Polynomial]:
        grads = []
        for v in range(self.nvars):
            ts = []
            for e, c in self.terms:
                if e[v]:
                    e2 = list(e)
                    e2[v] -= 1
                    ts.append((tuple(e2), c * e[v]))
            grads.append(Polynomial(self.nvars, tuple(ts)))
        return grads

    def laplacian(self) -> Polynomial:
        acc: dict = {}
        for v in range(self.nvars):
            for e, c in self.terms:
                if e[v] >= 2:
                    e2 = list(e)
                    e2[v] -= 2
                    acc[tuple(e2)] = acc.get(tuple(e2), 0) + c * e[v] * (e[v] - 1)
        return Polynomial(self.nvars, tuple((e, c) for e, c in sorted(acc.items()) if c != 0))

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for _, c in self.terms)

    def to_json(self) -> list:
        return [{"exponents": list(e), "coef": _num_to_json(c)} for e, c in self.terms]

    @classmethod
    def from_json(cls, nvars: int, data) -> Polynomial:
        terms = []
        for t in data:
            e = tuple(int(k) for k in t["exponents"])
            if len(e) != nvars:
                raise ValueError(f"exponent {e} does not have {nvars} entries")
            terms.append((e, _num_from_json(t["coef"])))
        return cls(nvars, tuple(terms))


def _num_to_json(c):
    if isinstance(c, complex) or np.iscomplexobj(c):
        return [float(np.real(c)), float(np.imag(c))]
    return float(c)


def _num_from_json(c):
    if isinstance(c, list):
        return complex(float(c[0]), float(c[1]))
    return float(c)


def gradient_graph(f: Polynomial, lower=None, upper=None, name: str = "graph") -> ChartImmersion:
    """u -> u + i grad f(u), a Lagrangian chart in C^m."""
    m = f.nvars
    grads = f.gradient()
    lower = -0.5 * np.ones(m) if lower is None else lower
    upper = 0.5 * np.ones(m) if upper is None else upper

    def jet_map(u):
        return Jet.stack([u[k] + 1j * grads[k](u) for k in range(m)])

    return ChartImmersion(name, AmbientSpace.flat(m), lower, upper, jet_map=jet_map,
                          params={"kind": "graph", "potential": f})


def polynomial_chart(components: list[Polynomial], space: AmbientSpace | None = None,
                     lower=None, upper=None, name: str = "polynomial") -> ChartImmersion:
    m = components[0].nvars
    space = AmbientSpace.flat(len(components)) if space is None else space
    lower = -0.5 * np.ones(m) if lower is None else lower
    upper = 0.5 * np.ones(m) if upper is None else upper

    def jet_map(u):
        return Jet.stack([p(u) for p in components])

    return ChartImmersion(name, space, lower, upper, jet_map=jet_map,
                          params={"kind": "polynomial", "components": components})


def random_potential(seed, m: int, degree: int, scale: float = 0.5) -> Polynomial:
    """Random real polynomial with monomials of total degree 2..degree."""
    rng = np.random.default_rng(seed)
    terms = []
    for deg in range(2, degree + 1):
        for combo in itertools.combinations_with_replacement(range(m), deg):
            e = [0] * m
            for v in combo:
                e[v] += 1
            terms.append((tuple(e), float(scale * rng.standard_normal())))
    return Polynomial(m, tuple(terms))


def random_gradient_graph(seed, m: int = 5, degree: int = 3, *, scale: float = 0.5,
                          probe: int = 64, max_shrink: int = 20) -> ChartImmersion:
    """Random Lagrangian gradient graph in C^m, reproducible from ``seed``.

    Coefficients are shrunk (and the shrink count recorded in ``params``)
    if the chart fails the immersion floor on a probe set.
    """
    if m < 2 or degree < 2:
        raise ValueError("need m >= 2 and degree >= 2")
    pot = random_potential(seed, m, degree, scale)
    shrinks = 0
    while True:
        chart = gradient_graph(pot, name=f"random-graph[{seed}]")
        pts = sample_points(chart, probe, seed=0)
        try:
            for u in pts:
                induced_metric(chart, u)
            break
        except DegenerateImmersion:
            if shrinks >= max_shrink:
                raise
            shrinks += 1
            pot = Polynomial(m, tuple((e, 0.5 * c) for e, c in pot.terms))
    chart.params.update(seed=seed, degree=degree, shrinks=shrinks)
    return chart


# -- sampling -------------------------------------------------------------

def grid_points(chart: ChartImmersion, resolution: int, axes=(0, 1), inset: float = 0.1) -> np.ndarray:
    """Cell-centred tensor grid over ``axes``; other coordinates sit at the box centre.

    ``inset`` shrinks the sampled region by that fraction of each side.
    """
    lo = chart.lower + inset * (chart.upper - chart.lower)
    hi = chart.upper - inset * (chart.upper - chart.lower)
    ticks = [(np.arange(resolution) + 0.5) / resolution * (hi[a] - lo[a]) + lo[a] for a in axes]
    pts = []
    for combo in itertools.product(*ticks):
        u = chart.center.copy()
        for a, x in zip(axes, combo):
            u[a] = x
        pts.append(u)
    return np.array(pts)


def sample_points(chart: ChartImmersion, count: int, seed=0, inset: float = 0.1) -> np.ndarray:
    """Scrambled Halton points strictly inside the (inset) box."""
    if count <= 0:
        return np.zeros((0, chart.dim))
    lo = chart.lower + inset * (chart.upper - chart.lower)
    hi = chart.upper - inset * (chart.upper - chart.lower)
    s = qmc.Halton(d=chart.dim, scramble=True, seed=seed).random(count)
    return lo + s * (hi - lo)


# -- JSON chart documents ---------------------------------------------------

def chart_to_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def graph_document(f: Polynomial, lower=None, upper=None) -> dict:
    doc = {"schema_version": CHART_SCHEMA_VERSION, "kind": "graph", "dimension": f.nvars,
           "terms": f.to_json()}
    if lower is not None:
        doc["domain"] = {"lower": [float(x) for x in lower], "upper": [float(x) for x in upper]}
    return doc


def polynomial_document(components: list[Polynomial], c: int = 0, lower=None, upper=None) -> dict:
    doc = {"schema_version": CHART_SCHEMA_VERSION, "kind": "polynomial",
           "dimension": components[0].nvars, "c": c,
           "components": [p.to_json() for p in components]}
    if lower is not None:
        doc["domain"] = {"lower": [float(x) for x in lower], "upper": [float(x) for x in upper]}
    return doc


def chart_from_document(doc: dict) -> ChartImmersion:
    """Build a chart from a parsed JSON document (``graph``, ``polynomial`` or ``family``)."""
    kind = doc.get("kind")
    dom = doc.get("domain")
    lower = upper = None
    if dom is not None:
        lower, upper = np.array(dom["lower"], float), np.array(dom["upper"], float)
    if kind == "graph":
        f = Polynomial.from_json(int(doc["dimension"]), doc["terms"])
        return gradient_graph(f, lower, upper)
    if kind == "polynomial":
        m = int(doc["dimension"])
        comps = [Polynomial.from_json(m, p) for p in doc["components"]]
        c = int(doc.get("c", 0))
        n = len(comps) if c == 0 else len(comps) - 1
        space = AmbientSpace(n, c, 1 if c == -1 else 0)
        return polynomial_chart(comps, space, lower, upper)
    if kind == "family":
        from .families.registry import build_family
        return build_family(doc["family"], **doc.get("params", {}))
    raise ValueError(f"unknown chart kind {kind!r}")


def chart_document(chart: ChartImmersion) -> dict:
    """Inverse of :func:`chart_from_document` for graph, polynomial and registry charts."""
    p = chart.params
    if "registry_name" in p:
        return {"schema_version": CHART_SCHEMA_VERSION, "kind": "family",
                "family": p["registry_name"], "params": dict(p["registry_params"])}
    if p.get("kind") == "graph":
        return graph_document(p["potential"], chart.lower, chart.upper)
    if p.get("kind") == "polynomial":
        return polynomial_document(p["components"], chart.space.c, chart.lower, chart.upper)
    raise ValueError(f"chart {chart.name!r} has no document form")
