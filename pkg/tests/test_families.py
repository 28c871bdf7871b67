import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagdelta import jet as J
from lagdelta.ambient import AmbientSpace, GeometryError, apply_J, inner
from lagdelta.curvature import second_fundamental_form
from lagdelta.delta import canonical_frame_fit, point_delta
from lagdelta.families import (OdeState, build_family, build_family_C5, build_family_CH5,
                               build_family_CP5, circle_curve, complex_extensor,
                               example_ch5_chart, first_integral_residual,
                               harmonic_gradient_surface, integrate_legendre, integrate_mu_nu,
                               integrate_w, ratio4_generating_curve, ratio4_lift,
                               ratio_ode_residual, ray_curve, real_hyperboloid_lift,
                               real_sphere_lift, twisted_sphere, verify_plugin)
from lagdelta.families.extensor import c5_mu_interval, extensor_mu
from lagdelta.families.ode import first_integral, mu_nu_rhs
from lagdelta.families.plugins import (HARMONIC_CUBICS, HARMONIC_QUADRATICS, curl_residual, poly2,
                                       surface_times_plane)
from lagdelta.families.registry import FAMILIES, family_entry, resolve_params
from lagdelta.immersion import (ChartImmersion, Polynomial, evaluate_jet, lagrangian_residual,
                                sample_points)
from lagdelta.jet import Jet

SPHERE, ADS = AmbientSpace.projective(1), AmbientSpace.hyperbolic(1)


def lift_residuals(chart, u):
    jt = evaluate_jet(chart, u, 1)
    s = chart.space
    return (abs(inner(jt.value, jt.value, s) - s.c),
            float(np.abs(inner(jt.d1, apply_J(jt.value), s)).max()),
            lagrangian_residual(chart, u, jt))


# -- (mu, nu) systems ----------------------------------------------------------------

def test_ch5_closed_form_solution():
    tr = integrate_mu_nu("CH5", OdeState(0.0, 1.0, 0.0, family="CH5"), 2.0)
    np.testing.assert_allclose(tr.mu, 1 / np.cosh(2 * tr.t), atol=1e-7)
    np.testing.assert_allclose(tr.nu, -np.tanh(2 * tr.t), atol=1e-7)
    np.testing.assert_allclose(tr.theta, np.arctan(np.tanh(tr.t)), atol=1e-7)


def test_ch5_k_zero_circle():
    tr = integrate_mu_nu("CH5", OdeState(0.0, 0.6, 0.8, family="CH5"), 1.0)
    assert np.abs(tr.mu ** 2 + tr.nu ** 2 - 1).max() < 1e-8
    assert tr.states()[0].kind == "CH5k=0"


def test_c5_radicand():
    nu0 = math.sqrt(1 / 0.5 - 0.25)
    tr = integrate_mu_nu("C5", OdeState(0.0, 0.5, -nu0, family="C5"), 0.5)
    assert np.abs(tr.nu ** 2 + tr.mu ** 2 - 1 / tr.mu).max() < 1e-8
    assert first_integral_residual(tr) < 1e-8
    assert tr.states()[0].c_param == pytest.approx(1.0)


def test_cp5_turning_point():
    mu = 0.7
    init = OdeState(0.0, mu, 0.0, family="CP5")
    assert init.c_param == pytest.approx(math.sqrt(mu ** 3 + mu))
    dmu, dnu, dtheta = mu_nu_rhs(1)(0.0, np.array([mu, 0.0, 0.0]))
    assert dmu == 0 and dnu < 0 and dtheta == mu
    tr = integrate_mu_nu("CP5", init, 0.2)
    assert tr.mu.max() == mu and first_integral_residual(tr) < 1e-8


@pytest.mark.parametrize("family, mu0, nu0", [("C5", 0.4, 0.2), ("CP5", 0.5, -0.3),
                                              ("CH5", 0.5, 0.3), ("CH5", 1.2, 0.1)])
def test_step_halving(family, mu0, nu0):
    init = OdeState(0.0, mu0, nu0, family=family)
    r = [first_integral_residual(integrate_mu_nu(family, init, 1.0, h)) for h in (0.02, 0.01)]
    assert r[0] / r[1] > 14


@given(st.floats(0.05, 2.0), st.floats(-1.0, 1.0), st.sampled_from(["C5", "CP5", "CH5"]))
def test_first_integral_conserved(mu0, nu0, family):
    init = OdeState(0.0, mu0, nu0, family=family)
    tr = integrate_mu_nu(family, init, 0.3, 1e-3)
    scale = 1 + abs(init.invariant) / tr.mu.min()
    assert first_integral_residual(tr) < 1e-8 * scale ** 3


def test_trajectory_stops_with_reason():
    tr = integrate_mu_nu("C5", OdeState(0.0, 0.5, -math.sqrt(1.75), family="C5"), 5.0)
    assert tr.reason is not None and tr.t[-1] < 5.0


def test_backward_integration():
    tr = integrate_mu_nu("CH5", OdeState(0.0, 1.0, 0.0, family="CH5"), -1.0)
    np.testing.assert_allclose(tr.mu, 1 / np.cosh(2 * tr.t), atol=1e-7)


def test_ode_state_validation():
    with pytest.raises(ValueError):
        OdeState(0, 1, 0, family="CP4")
    with pytest.raises(GeometryError):
        OdeState(0, -1, 0)
    assert OdeState(0, 0.5, 0.1, family="CH5").kind == "CH5k>0"
    assert OdeState(0, 1.5, 0.1, family="CH5").kind == "CH5k<0"
    assert math.isnan(OdeState(0, 0.5, 0.1, family="CH5").c_param)


def test_csv_export():
    tr = integrate_mu_nu("CH5", OdeState(0.0, 1.0, 0.0, family="CH5"), 0.01, 1e-3)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,mu,nu,theta,first_integral_residual"
    assert len(lines) == len(tr) + 1


def test_c5_angle_is_minus_four_theta():
    tr = integrate_mu_nu("C5", OdeState(0.0, 0.5, 0.2, family="C5"), 0.1)
    np.testing.assert_allclose(tr.angle(), -4 * tr.theta)


# -- the ratio ODE -------------------------------------------------------------------

def test_ratio_ode_sech():
    t = np.linspace(-1, 1, 2001)
    assert ratio_ode_residual(t, 1 / np.cosh(2 * t), 4, -1) < 1e-7


def test_ratio_ode_on_cp5_trajectory():
    tr = integrate_mu_nu("CP5", OdeState(0.0, 0.5, 0.2, family="CP5"), 1.0, 1e-3)
    assert ratio_ode_residual(tr.t, tr.mu, 4, 1) < 1e-7
    assert ratio_ode_residual(tr.t, tr.mu, 4, 0) > 1e-2


@given(st.floats(0.01, 3.0))
def test_ratio_ode_constant(mu):
    assert ratio_ode_residual([0.0], [mu], 4, 0) == pytest.approx(6 * mu ** 4)


def test_ratio_ode_errors():
    with pytest.raises(ValueError):
        ratio_ode_residual([0.0], [1.0], 2, 0)
    with pytest.raises(ValueError):
        ratio_ode_residual([0.0, 0.1, 0.3, 0.4, 0.5], np.arange(5.0), 4, 0)


# -- Legendre curves -----------------------------------------------------------------

def test_great_circle():
    c = integrate_legendre(lambda t, a: 0.0, SPHERE, [1, 0], [0, 1], (0, 1), step=1e-3)
    np.testing.assert_allclose(c.z[:, 0], np.cos(c.t), atol=1e-12)
    np.testing.assert_allclose(c.z[:, 1], np.sin(c.t), atol=1e-12)


@pytest.mark.parametrize("space", [SPHERE, ADS], ids=["sphere", "anti-de-sitter"])
@given(st.floats(-3, 3), st.floats(-2, 2))
def test_legendre_invariants(space, a, b):
    c = integrate_legendre(lambda t, aux: a + b * t, space, [1, 0], [0, 1], (0, 1), step=1e-3)
    inv = c.invariants()
    assert inv["constraint"] < 1e-9 and inv["speed"] < 1e-8 and inv["horizontality"] < 1e-9


def test_legendre_with_ratio4_curvature():
    mu0, nu0 = 0.5, 0.0
    rho2 = mu0 / first_integral(mu0, nu0, 1)
    rho, sig = math.sqrt(rho2), math.sqrt(1 - rho2)
    w = nu0 + 1j * mu0
    aux_rhs = lambda t, a: [2 * a[0] * a[1], -3 * a[0] ** 2 - a[1] ** 2 - 1]
    c = integrate_legendre(lambda t, a: 4 * a[0], SPHERE, [sig, rho], [-rho2 * w / sig, rho * w],
                           (0, 0.5), aux0=[mu0, nu0], aux_rhs=aux_rhs)
    assert max(c.invariants().values()) < 1e-9
    np.testing.assert_allclose(c.lam, 4 * c.aux[:, 0])


def test_legendre_errors():
    with pytest.raises(GeometryError):
        integrate_legendre(lambda t, a: 0.0, SPHERE, [1, 0], [1, 0], (0, 1))
    with pytest.raises(GeometryError):
        integrate_legendre(lambda t, a: 0.0, AmbientSpace.projective(2), [1, 0, 0], [0, 1, 0], (0, 1))
    with pytest.raises(GeometryError):
        integrate_legendre(lambda t, a: 40.0, SPHERE, [1, 0], [0, 1], (0, 4), step=0.2)


# -- complex extensors ---------------------------------------------------------------

@pytest.mark.parametrize("mu0", [0.2, 0.4, 1.0])
def test_generating_curve(mu0):
    g = ratio4_generating_curve(mu0)
    for t in np.linspace(g.lower, g.upper, 9):
        assert g.speed(t) == pytest.approx(1.0, abs=1e-8)
        assert g.curvature(t) / g.theta_rate(t) == pytest.approx(4.0, abs=1e-6)
    assert g.theta_rate(0.0) == pytest.approx(mu0, abs=1e-12)


def test_generating_curve_errors():
    with pytest.raises(ValueError):
        ratio4_generating_curve(0.0)
    with pytest.raises(ValueError):
        ratio4_generating_curve(0.5, span=(0.1, 0.5))
    with pytest.raises(GeometryError):
        ratio4_generating_curve(1.0, span=(-1.3, 1.3))


def h_umbilical_defect(h, phi, mu):
    """Distance of h from the H-umbilical form in a frame with e_5 along H."""
    H = np.einsum("ijj->i", h)
    Q, _ = np.linalg.qr(np.vstack([H, np.eye(5)[:4]]).T)
    Q = Q.T[[1, 2, 3, 4, 0]]
    Q[4] *= np.sign(Q[4] @ H)
    hq = np.einsum("ia,jb,kc,abc->ijk", Q, Q, Q, h)
    want = np.zeros((5, 5, 5))
    for i in range(4):
        want[4, i, i] = want[i, 4, i] = want[i, i, 4] = mu
    want[4, 4, 4] = phi
    return float(np.abs(hq - want).max())


@pytest.mark.parametrize("radius", [1.0, 2.0])
def test_circle_extensor_is_h_umbilical(radius):
    chart = complex_extensor(circle_curve(radius))
    for u in sample_points(chart, 3):
        assert lagrangian_residual(chart, u) < 1e-9
        pg = second_fundamental_form(chart, u)
        assert h_umbilical_defect(pg.h, 1 / radius, 1 / radius) < 1e-10


def test_ray_extensor_is_totally_geodesic():
    chart = complex_extensor(ray_curve())
    pg = second_fundamental_form(chart, chart.center + 0.05)
    assert np.abs(pg.h).max() < 1e-12


def test_extensor_rejects_curve_through_origin():
    with pytest.raises(GeometryError):
        complex_extensor(ray_curve(start=0.0))


# -- classification families ----------------------------------------------------------------

@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_c5_modulus(c):
    chart = build_family_C5(c)
    lo, hi = c5_mu_interval(c)
    assert chart.lower[0] == lo and chart.upper[0] == hi
    for u in sample_points(chart, 5, seed=1):
        assert abs(np.vdot(chart(u), chart(u)).real - u[0] / c ** 2) < 1e-12
        assert lagrangian_residual(chart, u) < 1e-9


def test_c5_warns_about_smoke_plugin():
    assert build_family_C5().params["warnings"]


def test_builders_reject_non_horizontal_plugins():
    with pytest.raises(GeometryError, match="horizontal"):
        build_family_C5(1.0, twisted_sphere())
    with pytest.raises(GeometryError, match="horizontal"):
        build_family_CP5(1.5, twisted_sphere())
    with pytest.raises(GeometryError):
        build_family_CH5("iii", phi=real_sphere_lift())


def test_builders_reject_bad_ranges():
    with pytest.raises(GeometryError):
        build_family_C5(1.0, mu_range=(0.5, 1.5))
    with pytest.raises(GeometryError):
        build_family_CH5("iii", 1.0)
    with pytest.raises(ValueError):
        build_family_CH5("vii")


@pytest.mark.parametrize("builder", [lambda: build_family_CP5(1.5), lambda: build_family_CP5(3.0),
                                     lambda: build_family_CH5("iii", 0.5),
                                     lambda: build_family_CH5("iv", 1.0),
                                     lambda: build_family_CH5("v"), lambda: build_family_CH5("vi"),
                                     example_ch5_chart],
                         ids=["cp5", "cp5-c3", "ch5-iii", "ch5-iv", "ch5-v", "ch5-vi", "example"])
def test_lift_constraints(builder):
    chart = builder()
    for u in sample_points(chart, 6, seed=2):
        cons, hor, lag = lift_residuals(chart, u)
        assert cons < 1e-8 and hor < 1e-8 and lag < 1e-9


def test_theta_statement_rule_is_not_horizontal():
    chart = build_family_CH5("iii", 0.5, theta_rule="statement")
    _, hor, _ = lift_residuals(chart, chart.center)
    assert hor > 1e-3


def test_flat_branch_prefactor_at_zero():
    chart = build_family_CH5("vi")
    u = np.array([0.0, 0.1, -0.2, 0.15, 0.05])
    psi = chart.params["plugin"]
    L = chart(u)
    assert abs(L[0] - L[-1] - 0.5j) < 1e-14
    assert psi == "surface-x-surface"


def test_flat_branch_rejects_totally_geodesic_factors():
    with pytest.raises(GeometryError):
        build_family_CH5("vi", f1=poly2({(1, 0): 1.0}), f2=HARMONIC_QUADRATICS[1])


@pytest.mark.parametrize("name", ["c5", "cp5"])
def test_nonnegative_curvature_families_have_b_zero(name):
    chart = build_family(name)
    for u in sample_points(chart, 4, seed=3):
        fit = canonical_frame_fit(second_fundamental_form(chart, u))
        assert abs(fit.b) < 1e-8
        assert fit.mu == pytest.approx(u[0], rel=1e-8)


def test_cubic_harmonics_give_generic_normal_form():
    chart = build_family("ch5-vi-cubic")
    u = sample_points(chart, 1, seed=2)[0]
    fit = canonical_frame_fit(second_fundamental_form(chart, u))
    assert fit.a > 0.1 and fit.b > 0.1 and fit.residual < 1e-8
    assert fit.mu == pytest.approx(1 / np.cosh(2 * u[0]), rel=1e-9)


@pytest.mark.parametrize("model, nu0", [("CP5", 0.0), ("CP5", 0.3), ("CH5", 0.3), ("CH5", 1.2)])
def test_ratio4_lifts_track_the_ode(model, nu0):
    chart = ratio4_lift(model, 0.5, nu0)
    for u in sample_points(chart, 4, seed=6):
        cons, hor, lag = lift_residuals(chart, u)
        assert max(cons, hor, lag) < 1e-9
        fit = canonical_frame_fit(second_fundamental_form(chart, u))
        assert max(abs(fit.a), abs(fit.b)) < 1e-8
        assert fit.mu == pytest.approx(chart.params["mu_nu"](u[0])[0], abs=1e-6)


def test_ratio4_lift_rejects_boundary_case():
    with pytest.raises(GeometryError):
        ratio4_lift("CH5", 0.6, 0.8)


def test_extensor_mu_matches_ode():
    chart = build_family("ratio4-extensor", mu0=0.4)
    assert extensor_mu(chart, np.r_[0.0, np.zeros(4)]) == pytest.approx(0.4, abs=1e-10)


# -- plugins ------------------------------------------------------------------------

def test_real_sphere_report():
    rep = verify_plugin(real_sphere_lift(), ("horizontal", "minimal", "delta2_ideal",
                                             "non_totally_geodesic"))
    assert rep.failures() == ["non_totally_geodesic"]


def test_real_hyperboloid_report():
    rep = verify_plugin(real_hyperboloid_lift(), ("horizontal", "minimal", "delta2_ideal"))
    assert rep.passed


def test_twisted_sphere_report():
    rep = verify_plugin(twisted_sphere(0.1), ("horizontal",))
    ok, worst = rep.checks["horizontal"]
    assert not ok and worst == pytest.approx(0.1, rel=0.3)
    assert "FAIL" in rep.describe()


def test_unknown_requirement():
    with pytest.raises(ValueError):
        verify_plugin(real_sphere_lift(), ("flat",))


@pytest.mark.parametrize("f", HARMONIC_QUADRATICS + HARMONIC_CUBICS, ids=str)
def test_harmonic_surfaces_are_minimal(f):
    chart = harmonic_gradient_surface(f)
    for u in sample_points(chart, 100):
        pg = second_fundamental_form(chart, u)
        assert math.sqrt(pg.mean_sq) < 1e-7
        assert lagrangian_residual(chart, u) < 1e-10
    rep = verify_plugin(chart, ("lagrangian", "minimal", "non_totally_geodesic"))
    # a quadratic potential gives an affine plane
    quadratic = max(sum(e) for e, _ in f.terms) == 2
    assert rep.failures() == (["non_totally_geodesic"] if quadratic else [])


def test_harmonic_surface_rejects_non_harmonic():
    with pytest.raises(ValueError):
        harmonic_gradient_surface(poly2({(2, 0): 1.0}))
    assert harmonic_gradient_surface(Polynomial(2, ())).params["hessian_zero"]


def test_surface_times_plane_is_ideal():
    rep = verify_plugin(surface_times_plane(HARMONIC_CUBICS[0]),
                        ("lagrangian", "minimal", "delta2_ideal", "non_totally_geodesic"))
    assert rep.passed


# -- the potential w ------------------------------------------------------------------

def circle_pair():
    s = 1 / math.sqrt(2)
    return ChartImmersion("circles", AmbientSpace.flat(2), [-1.0, -1.0], [1.0, 1.0],
                          jet_map=lambda u: Jet.stack([s * J.cis(u[0]), s * J.cis(u[1])]))


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_w_for_circle_pair(a, b):
    w = integrate_w(circle_pair())
    assert w.loop_residual < 1e-10
    assert w([a, b]) == pytest.approx(a + b, abs=1e-10)


def test_w_vanishes_for_real_plane():
    chart = ChartImmersion("real", AmbientSpace.flat(2), [-1.0, -1.0], [1.0, 1.0],
                           jet_map=lambda u: Jet.stack([u[0] + 0j, u[1] + 0j]))
    w = integrate_w(chart)
    assert w([0.3, -0.4]) == 0.0


def test_w_rejects_non_lagrangian():
    chart = ChartImmersion("tilted", AmbientSpace.flat(2), [-1.0, -1.0], [1.0, 1.0],
                           jet_map=lambda u: Jet.stack([u[0] + 1j * u[1], u[1] + 0j]))
    with pytest.raises(GeometryError, match="not Lagrangian"):
        integrate_w(chart)


@pytest.mark.parametrize("f", HARMONIC_CUBICS, ids=str)
def test_w_form_is_closed(f):
    psi = surface_times_plane(f)
    for u in sample_points(psi, 5):
        assert curl_residual(psi, u) < 1e-12


# -- registry ------------------------------------------------------------------------

def test_registry_parameters():
    assert resolve_params("cp5") == {"c": 1.5}
    assert resolve_params("ch5-iii", {"theta_rule": "statement"})["theta_rule"] == "statement"
    with pytest.raises(ValueError):
        resolve_params("cp5", {"mu0": 1})
    with pytest.raises(ValueError):
        resolve_params("cp5", {"c": -1})
    with pytest.raises(ValueError):
        resolve_params("ch5-iii", {"theta_rule": "other"})
    with pytest.raises(KeyError):
        family_entry("cp6")


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_built_in_family(name):
    entry = FAMILIES[name]
    chart = build_family(name)
    assert chart.params["registry_name"] == name
    for u in sample_points(chart, 50, seed=8):
        jt = evaluate_jet(chart, u, 2)
        assert lagrangian_residual(chart, u, jt) < 1e-9
        if chart.is_lift:
            assert abs(inner(jt.value, jt.value, chart.space) - chart.space.c) < 1e-8
        pg = second_fundamental_form(chart, u, jt)
        assert pg.symmetry_residual < 1e-8
        residual, d = point_delta(pg, restarts=32)
        assert residual <= 1e-7
        if entry.ideal:
            assert abs(residual) < 1e-5
