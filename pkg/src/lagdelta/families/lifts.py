"""Horizontal lifts into S^11(1) and H_1^11(-1) for the CP^5 and CH^5 families."""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .. import jet as J
from ..ambient import AmbientSpace, GeometryError
from ..immersion import ChartImmersion
from ..jet import Jet
from .extensor import RADICAND_MARGIN
from .ode import DenseSolution, OdeState, first_integral, mu_nu_rhs
from .plugins import (HARMONIC_QUADRATICS, integrate_w, product_surfaces, real_hyperboloid_lift,
                      real_sphere_lift, verify_plugin, w_form_jets)

CP5 = AmbientSpace.projective(5)
CH5 = AmbientSpace.hyperbolic(5)


# -- theta(mu) ---------------------------------------------------------------

class ThetaOfMu:
    """theta(mu) with a closed-form rate, pinned to 0 at ``anchor``.

    ``rate`` must accept floats and jets.
    """

    def __init__(self, rate, anchor: float, epsabs: float = 1e-10):
        self.rate = rate
        self.anchor = anchor
        self.epsabs = epsabs

    def value(self, mu: float) -> float:
        return quad(lambda s: float(self.rate(s)), self.anchor, mu, epsabs=self.epsabs,
                    epsrel=1e-12, limit=200)[0]

    def jet(self, mu: Jet) -> Jet:
        m0 = float(mu.value)
        derivs = [self.value(m0)]
        if mu.order >= 1:
            r = self.rate(Jet.variables([m0], max(mu.order - 1, 0))[0])
            d = r.derivatives()
            derivs += [d[0]] + [d[k][(0,) * k] for k in range(1, mu.order)]
        return mu.compose([float(np.real(x)) for x in derivs])


def _theta_rate(radicand, rule: str):
    if rule == "proof":
        return lambda mu: 0.5 / J.sqrt(radicand(mu)) if isinstance(mu, Jet) else 0.5 / math.sqrt(radicand(mu))
    if rule == "statement":
        return lambda mu: 0.5 * J.sqrt(radicand(mu)) if isinstance(mu, Jet) else 0.5 * math.sqrt(radicand(mu))
    raise ValueError("theta_rule must be 'proof' or 'statement'")


def _positive_interval(poly_coeffs, lo_bound, hi_bound, margin):
    """Largest interval in (lo_bound, hi_bound) where the cubic is positive, shrunk by margin."""
    roots = sorted(r.real for r in np.roots(poly_coeffs) if abs(r.imag) < 1e-12
                   and lo_bound < r.real < hi_bound)
    edges = [lo_bound] + roots + [hi_bound]
    best = None
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        if np.polyval(poly_coeffs, mid) > 0 and (best is None or b - a > best[1] - best[0]):
            best = (a, b)
    if best is None:
        raise GeometryError("radicand is nowhere positive")
    a, b = best
    w = b - a
    return a + margin * w, b - margin * w


def _check_plugin(phi, required_space_c):
    if phi.space.c != required_space_c or phi.space.n != 4 or phi.dim != 4:
        raise GeometryError("plugin must be a 4-dimensional chart into the matching 9-dimensional model")
    rep = verify_plugin(phi, ("horizontal", "minimal", "delta2_ideal", "non_totally_geodesic"))
    hard = [f for f in rep.failures() if f != "non_totally_geodesic"]
    if hard:
        raise GeometryError(f"plugin {phi.name} failed: {', '.join(hard)} ({rep.describe()})")
    return ["plugin is totally geodesic (smoke-test input)"] if rep.failures() else []


# -- CP^5 -------------------------------------------------------------------------

def build_family_CP5(c_param: float = 1.5, phi: ChartImmersion | None = None, mu_range=None,
                     check: bool = True) -> ChartImmersion:
    """L = (1/c)(sqrt(mu) e^{i theta} phi, e^{3 i theta}(sqrt(c^2 - mu^3 - mu) - i mu^{3/2}))."""
    if not c_param > 0:
        raise ValueError("c_param must be positive")
    phi = real_sphere_lift() if phi is None else phi
    warnings = _check_plugin(phi, 1) if check else []
    c2 = c_param ** 2
    lo, hi = _positive_interval([-1, 0, -1, c2], 0.0, c2 + 1, RADICAND_MARGIN) if mu_range is None else mu_range
    theta = ThetaOfMu(_theta_rate(lambda m: c2 / m - m * m - 1, "proof"), 0.5 * (lo + hi))

    def jet_map(v):
        mu = v[0]
        th = theta.jet(mu)
        head = phi.jet_map(v[1:]) * (J.sqrt(mu) * J.cis(th) / c_param)
        tail = J.cis(3 * th) * (J.sqrt(c2 - mu ** 3 - mu) - 1j * mu ** 1.5) / c_param
        return Jet.concat([head, Jet.stack([tail])])

    return ChartImmersion(f"CP5[c={c_param}]", CP5, np.r_[lo, phi.lower], np.r_[hi, phi.upper],
                          jet_map=jet_map, is_lift=True,
                          params={"family": "cp5", "c_param": c_param, "plugin": phi.name,
                                  "warnings": warnings, "c": 1, "mu_coordinate": 0})


# -- CH^5, branches (iii) and (iv) -----------------------------------------------------

def build_family_CH5(branch: str, c_param: float | None = None, phi: ChartImmersion | None = None,
                     theta_rule: str = "proof", mu_range=None, check: bool = True,
                     f1=None, f2=None, psi: ChartImmersion | None = None) -> ChartImmersion:
    """The CH^5 families; ``branch`` is one of 'iii', 'iv', 'v', 'vi'."""
    if branch in ("v", "vi"):
        return _build_ch5_flat_branch(branch, f1, f2, psi, check)
    if branch not in ("iii", "iv"):
        raise ValueError(f"unknown branch {branch!r}")
    if branch == "iii":
        c_param = 0.5 if c_param is None else c_param
        c2 = c_param ** 2
        if not 0 < c2 < 2 / (3 * math.sqrt(3)):
            raise GeometryError("branch (iii) needs 0 < c^2 < 2/(3 sqrt 3)")
        phi = real_hyperboloid_lift() if phi is None else phi
        warnings = _check_plugin(phi, -1) if check else []
        lo, hi = _positive_interval([-1, 0, 1, -c2], 0.0, 1.0, RADICAND_MARGIN) if mu_range is None else mu_range
        radicand = lambda m: 1 - m * m - c2 / m
    else:
        c_param = 1.0 if c_param is None else c_param
        c2 = c_param ** 2
        if not c2 > 0:
            raise ValueError("c_param must be positive")
        phi = real_sphere_lift() if phi is None else phi
        warnings = _check_plugin(phi, 1) if check else []
        lo, hi = _positive_interval([-1, 0, 1, c2], 0.0, 2.0 + c2, RADICAND_MARGIN) if mu_range is None else mu_range
        radicand = lambda m: 1 - m * m + c2 / m
    theta = ThetaOfMu(_theta_rate(radicand, theta_rule), 0.5 * (lo + hi))
    sign = -1.0 if branch == "iii" else 1.0

    def jet_map(v):
        mu = v[0]
        th = theta.jet(mu)
        body = phi.jet_map(v[1:]) * (J.sqrt(mu) * J.cis(th) / c_param)
        extra = J.cis(3 * th) * (J.sqrt(mu - mu ** 3 + sign * c2) - 1j * mu ** 1.5) / c_param
        extra = Jet.stack([extra])
        return Jet.concat([body, extra] if branch == "iii" else [extra, body])

    return ChartImmersion(f"CH5-{branch}[c={c_param}]", CH5, np.r_[lo, phi.lower], np.r_[hi, phi.upper],
                          jet_map=jet_map, is_lift=True,
                          params={"family": f"ch5-{branch}", "c_param": c_param, "plugin": phi.name,
                                  "theta_rule": theta_rule, "warnings": warnings, "c": -1,
                                  "mu_coordinate": 0})


# -- CH^5, branches (v) and (vi) ----------------------------------------------------------

def _build_ch5_flat_branch(branch, f1, f2, psi, check, t_range=(-0.6, 0.6)):
    """L = (2t + w + i(cosh 2t + |psi|^2 + 1/4), psi, 2t + w + i(cosh 2t + |psi|^2 - 1/4)) / (cosh t - i sinh t).

    ``w`` is the potential of -2 <d psi, i psi>, pinned at the centre of the box.
    """
    warnings = []
    if branch == "vi":
        if psi is not None:
            raise ValueError("branch (vi) is built from two harmonic polynomials, not a psi chart")
        f1 = HARMONIC_QUADRATICS[0] if f1 is None else f1
        f2 = HARMONIC_QUADRATICS[1] if f2 is None else f2
        for f in (f1, f2):
            if all(sum(e) < 2 or c == 0 for e, c in f.terms):
                raise GeometryError("branch (vi) needs non-totally-geodesic factors (Hess f = 0)")
        psi = product_surfaces(f1, f2)
    else:
        if psi is None:
            from .plugins import surface_times_plane
            psi = surface_times_plane(HARMONIC_QUADRATICS[0])
        if psi.space.c != 0 or psi.space.n != 4 or psi.dim != 4:
            raise GeometryError("psi must be a 4-dimensional chart into C^4")
        if check:
            rep = verify_plugin(psi, ("lagrangian", "minimal", "delta2_ideal", "non_totally_geodesic"))
            hard = [f for f in rep.failures() if f != "non_totally_geodesic"]
            if hard:
                raise GeometryError(f"plugin {psi.name} failed: {', '.join(hard)} ({rep.describe()})")
            if rep.failures():
                warnings.append("plugin is totally geodesic (smoke-test input)")
    wf = integrate_w(psi)

    def jet_map(v):
        t, u = v[0], v[1:]
        Psi = psi.jet_map(u)
        w0 = -wf(np.array([float(x.value) for x in u]))
        if t.order == 0:
            w = t.constant(w0)
        else:
            forms = w_form_jets(Psi, psi.space, range(1, 5))
            zero = forms[0] * 0.0
            w = Jet.potential(w0, [zero] + [-f for f in forms])
        n2 = (Psi * Psi.conj()).sum().real
        base = 2 * t + w
        ch = J.cosh(2 * t)
        first = base + 1j * (ch + n2 + 0.25)
        last = base + 1j * (ch + n2 - 0.25)
        pre = 1.0 / (J.cosh(t) - 1j * J.sinh(t))
        return Jet.concat([Jet.stack([first]), Psi, Jet.stack([last])]) * pre

    return ChartImmersion(f"CH5-{branch}", CH5, np.r_[t_range[0], psi.lower], np.r_[t_range[1], psi.upper],
                          jet_map=jet_map, is_lift=True,
                          params={"family": f"ch5-{branch}", "plugin": psi.name, "warnings": warnings,
                                  "c": -1, "w_loop_residual": wf.loop_residual, "mu_of_t": "sech 2t"})


# -- ratio-4 H-umbilical lifts ----------------------------------------------------------------

def example_ch5_chart(t_range=(-1.0, 1.0), box: float = 1.0) -> ChartImmersion:
    """Closed-form ratio-4 lift into H_1^11(-1) with mu = sech 2t."""
    def jet_map(v):
        t, u = v[0], v[1:]
        s = sum(x * x for x in u)
        ch = J.cosh(2 * t)
        pre = J.cis(J.arctan(J.tanh(t))) / J.sqrt(ch)
        first = 0.5 - 1j * t + 0.5 * s + 0.5 * ch
        second = t - 0.5j + 0.5j * s + 0.5j * ch
        return Jet.concat([Jet.stack([first, second]), Jet.stack([x + 0j for x in u])]) * pre

    b = box * np.ones(4)
    return ChartImmersion("CH5-example", CH5, np.r_[t_range[0], -b], np.r_[t_range[1], b],
                          jet_map=jet_map, is_lift=True,
                          params={"family": "ch5-example", "c": -1, "mu_of_t": "sech 2t"})


def _legendre_initial(mu0, nu0, c):
    """Initial (z, z') for the ratio-4 lifts and which factor carries the sphere.

    Returns (z0, dz0, form) with form 'sphere' for psi = (z1, z2 y), y in S^4,
    or 'hyperbolic' for psi = (z1 y, z2), y in H^4.
    """
    s = mu0 * mu0 + nu0 * nu0
    w = nu0 + 1j * mu0
    if c == 1:
        rho2 = mu0 / first_integral(mu0, nu0, 1)
        rho, sig = math.sqrt(rho2), math.sqrt(1 - rho2)
        return np.array([sig, rho], complex), np.array([-rho2 * w / sig, rho * w]), "sphere"
    if s > 1:
        rho2 = 1 / (s - 1)
        rho, sig = math.sqrt(rho2), math.sqrt(1 + rho2)
        return np.array([sig, rho], complex), np.array([rho2 * w / sig, rho * w]), "sphere"
    if s < 1:
        rho2 = 1 / (1 - s)
        rho, sig = math.sqrt(rho2), math.sqrt(rho2 - 1)
        return np.array([rho, sig], complex), np.array([rho * w, rho2 * w / sig]), "hyperbolic"
    raise GeometryError("mu^2 + nu^2 = 1 is the closed-form case; use the example chart")


def ratio4_lift(model: str = "CP5", mu0: float = 0.5, nu0: float = 0.0, t_range=(-0.5, 0.5),
                box: float = 0.4, step: float = 1e-4) -> ChartImmersion:
    """psi = (z1, z2 y) or (z1 y, z2) over a Legendre curve with z'' = 4 i mu z' -+ z.

    ``model`` is 'CP5' or 'CH5'. (mu, nu) solve the ratio-4 system with
    c = +1 or -1 and start at (mu0, nu0) at t = 0.
    """
    if model not in ("CP5", "CH5"):
        raise ValueError("model must be 'CP5' or 'CH5'")
    c = 1 if model == "CP5" else -1
    if not mu0 > 0:
        raise ValueError("mu0 must be positive")
    z0, dz0, form = _legendre_initial(mu0, nu0, c)
    sgn = -1.0 if c == 1 else 1.0
    base = mu_nu_rhs(c)

    def rhs(t, y):
        z, dz = y[0:2], y[2:4]
        mu, nu = y[4].real, y[5].real
        d = base(t, np.array([mu, nu, 0.0]))
        return np.concatenate([dz, 4j * mu * dz + sgn * z, [d[0], d[1]]])

    y0 = np.concatenate([z0, dz0, [mu0, nu0]]).astype(complex)
    sol = DenseSolution(rhs, y0, 0.0, t_range[0], t_range[1], step)
    if np.min(sol.y[:, 4].real) <= 0:
        raise GeometryError("mu leaves (0, inf) inside the t-range")

    def z_jet(t: Jet) -> Jet:
        y = sol(float(t.value))
        z, dz, mu, nu = y[0:2], y[2:4], y[4].real, y[5].real
        ddz = 4j * mu * dz + sgn * z
        dmu = 2 * mu * nu
        dddz = 4j * dmu * dz + 4j * mu * ddz + sgn * dz
        return t.compose([z, dz, ddz, dddz][: t.order + 1])

    def jet_map(v):
        t, u = v[0], v[1:]
        Z = z_jet(t)
        r2 = sum(x * x for x in u)
        if form == "sphere":
            y = Jet.stack(list(u) + [J.sqrt(1.0 - r2)])
            return Jet.concat([Jet.stack([Z[0]]), y * Z[1]])
        y = Jet.stack([J.sqrt(1.0 + r2)] + list(u))
        return Jet.concat([y * Z[0], Jet.stack([Z[1]])])

    space = CP5 if c == 1 else CH5
    b = box * np.ones(4)
    state = OdeState(0.0, mu0, nu0, 0.0, model)
    chart = ChartImmersion(f"ratio4-{model}[mu0={mu0},nu0={nu0}]", space, np.r_[t_range[0], -b],
                           np.r_[t_range[1], b], jet_map=jet_map, is_lift=True,
                           params={"family": f"ratio4-{model.lower()}-lift", "mu0": mu0, "nu0": nu0,
                                   "c": c, "form": form, "kind": state.kind})
    chart.params["mu_nu"] = lambda t: tuple(sol(t)[4:6].real)
    return chart
