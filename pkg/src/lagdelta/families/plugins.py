"""Plugin inputs for the family builders and the checks they must pass.

The builders take lower-dimensional Lagrangian pieces (horizontal lifts of
minimal delta(2)-ideal immersions, minimal surfaces in C^2, ...). Only a
few closed-form inputs ship here; any user chart is accepted if
:func:`verify_plugin` passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .. import jet as J
from ..ambient import AmbientSpace, GeometryError, apply_J, inner
from ..curvature import gauss_curvature_tensor, second_fundamental_form
from ..delta import TupleSpec, classical_rhs, delta_invariant
from ..immersion import (ChartImmersion, Polynomial, evaluate_jet, gradient_graph,
                         lagrangian_residual, sample_points)
from ..jet import Jet

PLUGIN_TOL = 1e-7


# -- closed-form plugins ------------------------------------------------------

def _sphere_coords(u):
    r2 = sum(x * x for x in u)
    return list(u) + [J.sqrt(1.0 - r2)]


def real_sphere_lift(dim: int = 4, radius_box: float = 0.4) -> ChartImmersion:
    """Totally real unit sphere S^dim in R^{dim+1} inside S^{2 dim + 1}(1).

    Horizontal, minimal and totally geodesic: a smoke-test input.
    """
    def jet_map(u):
        return Jet.stack(_sphere_coords(u))

    box = radius_box * np.ones(dim)
    return ChartImmersion("real-sphere", AmbientSpace.projective(dim), -box, box, jet_map=jet_map,
                          is_lift=True, params={"kind": "plugin"})


def real_hyperboloid_lift(dim: int = 4, box: float = 0.5) -> ChartImmersion:
    """Real hyperbolic space (sqrt(1 + |u|^2), u) inside H_1^{2 dim + 1}(-1)."""
    def jet_map(u):
        r2 = sum(x * x for x in u)
        return Jet.stack([J.sqrt(1.0 + r2)] + list(u))

    b = box * np.ones(dim)
    return ChartImmersion("real-hyperboloid", AmbientSpace.hyperbolic(dim), -b, b, jet_map=jet_map,
                          is_lift=True, params={"kind": "plugin"})


def twisted_sphere(eps: float = 0.1, dim: int = 4) -> ChartImmersion:
    """e^{i eps u_1} times the real sphere: on S^9 but not horizontal (residual eps)."""
    def jet_map(u):
        return Jet.stack(_sphere_coords(u)) * J.cis(eps * u[0])

    box = 0.4 * np.ones(dim)
    return ChartImmersion("twisted-sphere", AmbientSpace.projective(dim), -box, box, jet_map=jet_map,
                          is_lift=True, params={"kind": "plugin", "eps": eps})


def harmonic_gradient_surface(f: Polynomial, box: float = 0.5) -> ChartImmersion:
    """Gradient graph u -> u + i grad f(u) in C^2 of a harmonic polynomial f."""
    if f.nvars != 2:
        raise ValueError("need a polynomial in two variables")
    if not f.laplacian().is_zero(1e-14):
        raise ValueError("f is not harmonic")
    chart = gradient_graph(f, -box * np.ones(2), box * np.ones(2), name="harmonic-graph")
    chart.params["hessian_zero"] = all(sum(e) < 2 or abs(c) == 0 for e, c in f.terms)
    return chart


def poly2(terms: dict) -> Polynomial:
    """Two-variable polynomial from {(i, j): coefficient}."""
    return Polynomial(2, tuple(sorted(terms.items())))


HARMONIC_QUADRATICS = (poly2({(2, 0): 1.0, (0, 2): -1.0}), poly2({(1, 1): 1.0}))
# Re z^3 and Im z^3 / 3
HARMONIC_CUBICS = (poly2({(3, 0): 1.0, (1, 2): -3.0}), poly2({(2, 1): 1.0, (0, 3): -1.0 / 3.0}))


def surface_times_plane(f: Polynomial, box: float = 0.5) -> ChartImmersion:
    """psi(u) = (graph of grad f in C^2, u_3, u_4) in C^4: minimal and delta(2)-ideal."""
    surf = harmonic_gradient_surface(f, box)

    def jet_map(u):
        s = surf.jet_map(u[:2])
        return Jet.concat([s, Jet.stack([u[2] + 0j, u[3] + 0j])])

    b = box * np.ones(4)
    return ChartImmersion("surface-x-plane", AmbientSpace.flat(4), -b, b, jet_map=jet_map,
                          params={"kind": "plugin"})


def product_surfaces(f1: Polynomial, f2: Polynomial, box: float = 0.5) -> ChartImmersion:
    s1, s2 = harmonic_gradient_surface(f1, box), harmonic_gradient_surface(f2, box)

    def jet_map(u):
        return Jet.concat([s1.jet_map(u[:2]), s2.jet_map(u[2:4])])

    b = box * np.ones(4)
    return ChartImmersion("surface-x-surface", AmbientSpace.flat(4), -b, b, jet_map=jet_map,
                          params={"kind": "plugin"})


# -- verification ------------------------------------------------------------------

REQUIREMENTS = ("lagrangian", "horizontal", "minimal", "delta2_ideal", "non_totally_geodesic")


@dataclass
class PluginReport:
    name: str
    checks: dict = field(default_factory=dict)   # name -> (passed, worst value)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, (ok, _) in self.checks.items() if not ok]

    def describe(self) -> str:
        return ", ".join(f"{k}: {'ok' if ok else 'FAIL'} ({v:.2e})" for k, (ok, v) in self.checks.items())


def verify_plugin(phi: ChartImmersion, requirements=("horizontal", "minimal", "delta2_ideal"),
                  points: int = 12, tol: float = PLUGIN_TOL, seed: int = 0,
                  restarts: int = 16) -> PluginReport:
    """Numerically check the requested properties at scrambled Halton points."""
    unknown = set(requirements) - set(REQUIREMENTS)
    if unknown:
        raise ValueError(f"unknown requirements {sorted(unknown)}")
    rep = PluginReport(phi.name)
    pts = sample_points(phi, points, seed=seed)
    lag, cons, hor, mean, ideal, norm_h = [], [], [], [], [], []
    geoms = []
    for u in pts:
        jt = evaluate_jet(phi, u, 2)
        lag.append(lagrangian_residual(phi, u, jt))
        if phi.is_lift:
            cons.append(abs(inner(jt.value, jt.value, phi.space) - phi.space.c))
            hor.append(float(np.abs(inner(jt.d1, apply_J(jt.value), phi.space)).max()))
        try:
            geoms.append(second_fundamental_form(phi, u, jt))
        except GeometryError:
            geoms.append(None)
    ok_geom = all(g is not None for g in geoms)
    if phi.is_lift:
        rep.checks["constraint"] = (max(cons) <= tol, max(cons))
    if "lagrangian" in requirements or "horizontal" in requirements:
        rep.checks["lagrangian"] = (max(lag) <= tol, max(lag))
    if "horizontal" in requirements:
        worst = max(hor) if phi.is_lift else 0.0
        rep.checks["horizontal"] = (worst <= tol, worst)
    if not ok_geom:
        rep.checks["second_fundamental_form"] = (False, float("inf"))
        return rep
    for g in geoms:
        mean.append(float(np.sqrt(g.mean_sq)))
        norm_h.append(float(np.linalg.norm(g.h)))
    if "minimal" in requirements:
        rep.checks["minimal"] = (max(mean) <= tol, max(mean))
    if "delta2_ideal" in requirements and phi.dim >= 3:
        spec = TupleSpec(phi.dim, (2,))
        for g in geoms:
            R = gauss_curvature_tensor(g)
            d = delta_invariant(R, spec, restarts=restarts, seed=seed).value
            ideal.append(abs(d - classical_rhs(spec, g.mean_sq, g.c)))
        rep.checks["delta2_ideal"] = (max(ideal) <= 1e-6, max(ideal))
    if "non_totally_geodesic" in requirements:
        rep.checks["non_totally_geodesic"] = (max(norm_h) > 1e-6, max(norm_h))
    return rep


# -- the potential w ----------------------------------------------------------------

def w_form(psi: ChartImmersion, u) -> np.ndarray:
    """Components 2 <psi_{u_j}, i psi> of the 1-form whose potential is w."""
    jt = evaluate_jet(psi, u, 1)
    return 2.0 * inner(jt.d1, apply_J(jt.value), psi.space)


def w_form_jets(Psi: Jet, space: AmbientSpace, variables) -> list[Jet]:
    """Jets (one order lower) of 2 <psi_{u_j}, i psi> for j in ``variables``."""
    low = Psi.truncate(Psi.order - 1)
    signs = space.signs
    out = []
    for v in variables:
        d = Psi.deriv(v)
        prod = (d * signs) * (1j * low).conj()
        out.append(2.0 * prod.sum().real)
    return out


@dataclass
class WField:
    """Potential of 2 <d psi, i psi>, pinned to 0 at ``anchor``."""

    psi: ChartImmersion
    anchor: np.ndarray
    loop_residual: float
    epsabs: float = 1e-12

    def __call__(self, u) -> float:
        u = np.asarray(u, dtype=float)
        d = u - self.anchor
        if not np.any(d):
            return 0.0
        f = lambda s: float(w_form(self.psi, self.anchor + s * d) @ d)
        val, _ = quad(f, 0.0, 1.0, epsabs=self.epsabs, epsrel=1e-13, limit=200)
        return val


def _loop_integral(psi, base, i, j, size, epsabs):
    """Integral of the 1-form around a square in the (u_i, u_j) plane."""
    m = psi.dim
    ei, ej = np.eye(m)[i], np.eye(m)[j]
    corners = [base, base + size * ei, base + size * (ei + ej), base + size * ej, base]
    total = 0.0
    for a, b in zip(corners[:-1], corners[1:]):
        d = b - a
        f = lambda s: float(w_form(psi, a + s * d) @ d)
        total += quad(f, 0.0, 1.0, epsabs=epsabs, epsrel=1e-13, limit=200)[0]
    return total


def integrate_w(psi: ChartImmersion, loops: int = 4, tol: float = 1e-8, seed: int = 0,
                epsabs: float = 1e-12) -> WField:
    """Path-integrated potential of 2 <d psi, i psi> with a closedness check.

    Loop integrals around small squares in every coordinate plane (at a few
    Halton points) must vanish; otherwise the input is not Lagrangian.
    """
    anchor = psi.center.copy()
    pts = sample_points(psi, loops, seed=seed, inset=0.25)
    size = 0.2 * float(np.min(psi.upper - psi.lower))
    worst = 0.0
    m = psi.dim
    for base in pts:
        for i in range(m):
            for j in range(i + 1, m):
                worst = max(worst, abs(_loop_integral(psi, base, i, j, size, epsabs)))
    if worst > tol:
        raise GeometryError(f"input not Lagrangian: loop integral {worst:.2e} exceeds {tol:.0e}")
    return WField(psi, anchor, worst, epsabs)


def curl_residual(psi: ChartImmersion, u) -> float:
    """max |d_k a_j - d_j a_k| for a_j = 2 <psi_j, i psi>, from exact jets."""
    u = np.asarray(u, dtype=float)
    Psi = psi.jet_map(Jet.variables(u, 2))
    forms = w_form_jets(Psi, psi.space, range(psi.dim))
    D = np.array([f.derivatives()[1] for f in forms])
    return float(np.abs(D - D.T).max())
