import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lagdelta.ambient import (AmbientSpace, GeometryError, apply_J, horizontality_residual,
                              hopf_project_curve_point, inner, projected_curvature,
                              sphere_constraint_residual, symplectic_form, target_metric,
                              target_quadric_residual)
from lagdelta.families.ode import integrate_legendre

SPACES = [AmbientSpace.flat(3), AmbientSpace.projective(3), AmbientSpace.hyperbolic(3)]
SPHERE, ADS = AmbientSpace.projective(1), AmbientSpace.hyperbolic(1)

finite = st.floats(-10, 10)


def vectors(size):
    re = arrays(float, size, elements=finite)
    return st.builds(lambda a, b: a + 1j * b, re, re)


def test_constructors():
    assert AmbientSpace.flat(5).model_dim == 5
    assert AmbientSpace.projective(5).model_dim == 6
    h = AmbientSpace.hyperbolic(5)
    assert h.model_dim == 6 and h.signs[0] == -1 and h.label == "CH5"


@pytest.mark.parametrize("n, c, idx", [(0, 0, 0), (2, 2, 0), (2, -1, 0), (2, 1, 1)])
def test_invalid_spaces(n, c, idx):
    with pytest.raises(ValueError):
        AmbientSpace(n, c, idx)


def test_dimension_mismatch():
    with pytest.raises(GeometryError):
        inner(np.ones(3), np.ones(4), AmbientSpace.projective(3))


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.label)
@given(data=st.data())
def test_inner_symmetric_bilinear(space, data):
    d = space.model_dim
    u, v, w = (data.draw(vectors(d)) for _ in range(3))
    a = data.draw(finite)
    assert inner(u, v, space) == pytest.approx(inner(v, u, space), abs=1e-12)
    lhs = inner(a * u + w, v, space)
    assert lhs == pytest.approx(a * inner(u, v, space) + inner(w, v, space), abs=1e-9)


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.label)
@given(data=st.data())
def test_J_is_isometric_complex_structure(space, data):
    u, v = data.draw(vectors(space.model_dim)), data.draw(vectors(space.model_dim))
    assert inner(apply_J(u), apply_J(v), space) == pytest.approx(inner(u, v, space), abs=1e-9)
    np.testing.assert_allclose(apply_J(apply_J(u)), -u)
    assert symplectic_form(u, v, space) == pytest.approx(-symplectic_form(v, u, space), abs=1e-9)
    assert abs(symplectic_form(u, u, space)) < 1e-9


def test_symplectic_sign_convention():
    space = AmbientSpace.flat(1)
    assert symplectic_form(np.array([1.0]), np.array([1j]), space) == pytest.approx(1.0)


def test_constraint_and_horizontality():
    z = np.array([np.cosh(0.3), np.sinh(0.3) * 1j])
    assert sphere_constraint_residual(z, ADS) < 1e-15
    assert horizontality_residual(z, apply_J(z), ADS) == pytest.approx(1.0)
    with pytest.raises(GeometryError):
        sphere_constraint_residual(np.ones(2), AmbientSpace.flat(2))


@pytest.mark.parametrize("space, want", [(SPHERE, [0, 0, 0.5]), (ADS, [0.5, 0, 0])],
                         ids=["sphere", "anti-de-sitter"])
def test_hopf_base_point(space, want):
    np.testing.assert_allclose(hopf_project_curve_point(np.array([1, 0j]), space), want)


def test_hopf_rejects_points_off_the_model():
    with pytest.raises(GeometryError):
        hopf_project_curve_point(np.array([1.0, 1.0 + 0j]), SPHERE)


angles = st.floats(0, 2 * np.pi)


@given(angles, angles, angles, st.floats(0, 3))
def test_hopf_lands_on_target_quadric(a, b, c, r):
    s = hopf_project_curve_point(np.array([np.cos(a) * np.exp(1j * b), np.sin(a) * np.exp(1j * c)]),
                                 SPHERE)
    assert target_quadric_residual(s, SPHERE) < 1e-12
    h = hopf_project_curve_point(np.array([np.cosh(r) * np.exp(1j * b), np.sinh(r) * np.exp(1j * c)]),
                                 ADS)
    assert target_quadric_residual(h, ADS) < 1e-12 * np.cosh(r) ** 4
    assert h[0] >= 0.5


def _projected(curve, space, i, h):
    X = np.array([hopf_project_curve_point(z, space) for z in curve.z[i - 1:i + 2]])
    dx = (X[2] - X[0]) / (2 * h)
    ddx = (X[2] - 2 * X[1] + X[0]) / h ** 2
    G = target_metric(space)
    return np.sqrt(dx @ G @ dx), projected_curvature(X[1], dx, ddx, space)


LAMBDAS = [lambda t, a: 0.0, lambda t, a: 1.3, lambda t, a: 0.5 + np.sin(t),
           lambda t, a: -2.0 * np.cos(3 * t)]


@pytest.mark.parametrize("space", [SPHERE, ADS], ids=["sphere", "anti-de-sitter"])
@pytest.mark.parametrize("lam", range(len(LAMBDAS)))
def test_projection_of_legendre_curve(space, lam):
    h = 1e-3
    curve = integrate_legendre(LAMBDAS[lam], space, [1, 0], [0, 1], (0, 1), step=h)
    for i in (100, 450, 900):
        speed, kappa = _projected(curve, space, i, h)
        assert speed == pytest.approx(1.0, abs=1e-5)
        assert kappa == pytest.approx(curve.lam[i], abs=1e-4)
