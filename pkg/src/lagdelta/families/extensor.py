"""Complex extensors in C^n and the ratio-4 families of C^5."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import jet as J
from ..ambient import AmbientSpace, GeometryError
from ..immersion import ChartImmersion
from ..jet import Jet
from .ode import DenseSolution
from .plugins import verify_plugin

GAMMA_FLOOR = 1e-3
RADICAND_MARGIN = 1e-3


@dataclass(frozen=True)
class PlanarCurve:
    """A curve in C = R^2 given by a jet map t -> gamma(t) on [lower, upper]."""

    jet_fn: Callable[[Jet], Jet]
    lower: float
    upper: float
    name: str = "curve"

    def derivatives(self, t: float, order: int = 3) -> list:
        """[gamma, gamma', ...] at t."""
        d = self.jet_fn(Jet.variables([t], order)[0]).derivatives()
        return [d[0]] + [d[k][(0,) * k] for k in range(1, order + 1)]

    def __call__(self, t: float) -> complex:
        return complex(self.jet_fn(Jet.variables([t], 0)[0]).value)

    def theta_rate(self, t: float) -> float:
        """mu = d/dt arg gamma."""
        g, dg = self.derivatives(t, 1)
        return float(np.imag(np.conj(g) * dg) / abs(g) ** 2)

    def curvature(self, t: float) -> float:
        g, dg, ddg = self.derivatives(t, 2)
        return float(np.imag(np.conj(dg) * ddg) / abs(dg) ** 3)

    def speed(self, t: float) -> float:
        return float(abs(self.derivatives(t, 1)[1]))


def circle_curve(radius: float = 1.0, lower: float = -1.0, upper: float = 1.0) -> PlanarCurve:
    return PlanarCurve(lambda t: radius * J.cis(t / radius), lower, upper, "circle")


def ray_curve(start: float = 1.0, direction: complex = 1.0, lower: float = -0.5,
              upper: float = 0.5) -> PlanarCurve:
    direction = direction / abs(direction)
    return PlanarCurve(lambda t: start * direction + direction * t, lower, upper, "ray")


def _ratio4_rhs(t, y):
    g, zeta = y[0], y[1].real
    dg = np.exp(1j * zeta)
    return np.array([dg, 4.0 * np.imag(np.conj(g) * dg) / abs(g) ** 2 + 0j])


def ratio4_generating_curve(mu0: float, span=None, step: float = 1e-4) -> PlanarCurve:
    """Unit-speed curve gamma with curvature 4 d(arg gamma)/dt, starting at 1/mu0 with gamma' = i.

    Along it, mu = (arg gamma)' and nu = (log|gamma|)' solve mu' = 2 mu nu,
    nu' = -3 mu^2 - nu^2 with mu(0) = mu0, nu(0) = 0. The curve reaches the
    origin near |t| = 1.16/mu0, so the default span is [-0.8/mu0, 0.8/mu0].
    """
    if not mu0 > 0:
        raise ValueError("mu0 must be positive")
    lo, hi = (-0.8 / mu0, 0.8 / mu0) if span is None else span
    if not lo < 0 < hi:
        raise ValueError("span must contain 0")
    sol = DenseSolution(_ratio4_rhs, np.array([1.0 / mu0, np.pi / 2], dtype=complex), 0.0, lo, hi,
                        step * min(1.0, 1.0 / mu0))
    if np.min(np.abs(sol.y[:, 0])) < GAMMA_FLOOR:
        raise GeometryError("generating curve approaches the origin inside the span")

    def jet_fn(t: Jet) -> Jet:
        y = sol(float(t.value))
        g, zeta = y[0], y[1].real
        dg = np.exp(1j * zeta)
        r2 = abs(g) ** 2
        mu = np.imag(np.conj(g) * dg) / r2
        nu = np.real(np.conj(g) * dg) / r2
        kappa = 4 * mu
        ddg = 1j * kappa * dg
        dmu = np.imag(np.conj(g) * ddg) / r2 - 2 * mu * nu
        dddg = (1j * 4 * dmu - kappa ** 2) * dg
        return t.compose([g, dg, ddg, dddg][: t.order + 1])

    return PlanarCurve(jet_fn, lo, hi, f"ratio4[mu0={mu0}]")


def complex_extensor(curve: PlanarCurve, n: int = 5, box: float = 0.4,
                     floor: float = GAMMA_FLOOR, margin: float = 1e-6) -> ChartImmersion:
    """(t, u) -> gamma(t) * iota(u) with iota(u) = (u, sqrt(1 - |u|^2)) on S^{n-1}."""
    if n < 2:
        raise ValueError("need n >= 2")
    ts = np.linspace(curve.lower + margin, curve.upper - margin, 257)
    if min(abs(curve(t)) for t in ts) < floor:
        raise GeometryError("|gamma| falls below the floor on the span")

    def jet_map(v):
        t, u = v[0], v[1:]
        g = curve.jet_fn(t)
        r2 = sum(x * x for x in u)
        return Jet.stack(list(u) + [J.sqrt(1.0 - r2)]) * g

    lower = np.r_[curve.lower + margin, -box * np.ones(n - 1)]
    upper = np.r_[curve.upper - margin, box * np.ones(n - 1)]
    return ChartImmersion(f"extensor[{curve.name}]", AmbientSpace.flat(n), lower, upper,
                          jet_map=jet_map, params={"kind": "extensor", "curve": curve.name})


def ratio4_extensor(mu0: float = 0.4, span=None) -> ChartImmersion:
    chart = complex_extensor(ratio4_generating_curve(mu0, span))
    chart.params.update(family="ratio4-extensor", mu0=mu0, c=0)
    return chart


# -- C^5 classification family ------------------------------------------------------

def c5_mu_interval(c_param: float, margin: float = RADICAND_MARGIN):
    top = c_param ** (2.0 / 3.0)
    return margin * top, top * (1 - margin)


def c5_prefactor(mu: Jet, c_param: float) -> Jet:
    c2 = c_param * c_param
    phase = J.cis((4.0 / 3.0) * J.arctan(J.sqrt(mu ** 3 / (c2 - mu ** 3))))
    return phase / (J.sqrt(c2 / mu - mu * mu) + 1j * mu)


def build_family_C5(c_param: float = 1.0, phi: ChartImmersion | None = None,
                    mu_range=None, check: bool = True) -> ChartImmersion:
    """L(mu, u) = F(mu) phi(u) in C^5 with phi a horizontal lift into S^9(1)."""
    from .plugins import real_sphere_lift
    if not c_param > 0:
        raise ValueError("c_param must be positive")
    phi = real_sphere_lift() if phi is None else phi
    if phi.space.c != 1 or phi.space.n != 4 or phi.dim != 4:
        raise GeometryError("phi must be a 4-dimensional chart into S^9(1) in C^5")
    warnings = []
    if check:
        rep = verify_plugin(phi, ("horizontal", "minimal", "delta2_ideal", "non_totally_geodesic"))
        hard = [f for f in rep.failures() if f != "non_totally_geodesic"]
        if hard:
            raise GeometryError(f"plugin {phi.name} failed: {', '.join(hard)} ({rep.describe()})")
        if rep.failures():
            warnings.append("plugin is totally geodesic (smoke-test input)")
    lo, hi = c5_mu_interval(c_param) if mu_range is None else mu_range
    top = c_param ** (2.0 / 3.0)
    if not 0 < lo < hi < top:
        raise GeometryError(f"mu-range must lie inside (0, {top:.6g})")

    def jet_map(v):
        return phi.jet_map(v[1:]) * c5_prefactor(v[0], c_param)

    return ChartImmersion(f"C5[c={c_param}]", AmbientSpace.flat(5), np.r_[lo, phi.lower],
                          np.r_[hi, phi.upper], jet_map=jet_map,
                          params={"family": "c5", "c_param": c_param, "plugin": phi.name,
                                  "warnings": warnings, "c": 0, "mu_coordinate": 0})


def extensor_mu(chart: ChartImmersion, u) -> float:
    """mu = (arg gamma)' at a chart point of a complex extensor.

    The last component is gamma(t) times a positive real factor.
    """
    d = chart.jet_map(Jet.variables(np.asarray(u, float), 1)).derivatives()
    return float(np.imag(d[1][0][-1] / d[0][-1]))
