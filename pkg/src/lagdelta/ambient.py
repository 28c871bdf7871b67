"""Complex space forms and their flat models.

Vectors are plain complex numpy arrays. All geometry uses the real part of
the (signed) Hermitian product, so tangent/normal splittings are real-linear.
``C^n`` carries c = 0; ``CP^n(4)`` is modelled through its Hopf lift in
``S^{2n+1}(1) ⊂ C^{n+1}``; ``CH^n(-4)`` through ``H_1^{2n+1}(-1) ⊂ C_1^{n+1}``
whose first complex coordinate carries the minus sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


class GeometryError(ValueError):
    """Raised when an input violates a geometric precondition."""


@dataclass(frozen=True)
class AmbientSpace:
    n: int
    c: int = 0
    signature_index: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("complex dimension must be positive")
        if self.c not in (-1, 0, 1):
            raise ValueError("c must be -1, 0 or +1")
        if (self.signature_index == 1) != (self.c == -1) or self.signature_index not in (0, 1):
            raise ValueError("signature_index must be 1 exactly for the c = -1 model")

    @classmethod
    def flat(cls, n: int) -> AmbientSpace:
        return cls(n, 0, 0)

    @classmethod
    def projective(cls, n: int) -> AmbientSpace:
        return cls(n, 1, 0)

    @classmethod
    def hyperbolic(cls, n: int) -> AmbientSpace:
        return cls(n, -1, 1)

    @property
    def model_dim(self) -> int:
        return self.n if self.c == 0 else self.n + 1

    @property
    def is_lift_model(self) -> bool:
        return self.c != 0

    @property
    def signs(self) -> np.ndarray:
        s = np.ones(self.model_dim)
        if self.signature_index:
            s[0] = -1.0
        return s

    @property
    def label(self) -> str:
        return {0: "C", 1: "CP", -1: "CH"}[self.c] + str(self.n)

    def check(self, u) -> np.ndarray:
        u = np.asarray(u)
        if u.shape[-1] != self.model_dim:
            raise GeometryError(
                f"vector has {u.shape[-1]} components, {self.label} model needs {self.model_dim}")
        return u


def inner(u, v, space: AmbientSpace) -> float:
    """Re of the signed Hermitian product; broadcasts over leading axes."""
    u = space.check(u)
    v = space.check(v)
    return np.real(np.sum(space.signs * u * np.conj(v), axis=-1))


def apply_J(u):
    return 1j * np.asarray(u)


def symplectic_form(u, v, space: AmbientSpace) -> float:
    """omega(u, v) = <J u, v>."""
    return inner(apply_J(u), v, space)


def sphere_constraint_residual(z, space: AmbientSpace) -> float:
    """Distance of <z, z> from +1 (sphere model) or -1 (anti-de Sitter model)."""
    if space.c == 0:
        raise GeometryError("C^n has no constraint hypersurface")
    return float(abs(inner(z, z, space) - space.c))


def horizontality_residual(z, dz, space: AmbientSpace) -> float:
    return float(abs(inner(dz, apply_J(z), space)))


def hopf_project_curve_point(z, space: AmbientSpace, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hopf projection of a point of S^3(1) (into S^2(1/2)) or H^3_1(-1) (into H^2(-1/2)).

    The sphere image is ``(Re z1 z2*, Im z1 z2*, (|z1|^2 - |z2|^2)/2)``.
    The hyperbolic image puts the time-like coordinate first:
    ``((|z1|^2 + |z2|^2)/2, Re z1 z2*, Im z1 z2*)`` on ``x1^2 - x2^2 - x3^2 = 1/4``.
    """
    if space.n != 1 or space.c == 0:
        raise GeometryError("Hopf curve projection needs the S^3 or H^3_1 model (n = 1, c != 0)")
    z = space.check(z)
    res = sphere_constraint_residual(z, space)
    if res > tol:
        raise GeometryError(f"point is off the model surface (residual {res:.3e})")
    w = z[0] * np.conj(z[1])
    a, b = abs(z[0]) ** 2, abs(z[1]) ** 2
    if space.c == 1:
        return np.array([w.real, w.imag, 0.5 * (a - b)])
    return np.array([0.5 * (a + b), w.real, w.imag])


def target_quadric_residual(x, space: AmbientSpace) -> float:
    """How far a projected point is from S^2(1/2) or H^2(-1/2)."""
    x = np.asarray(x, dtype=float)
    if space.c == 1:
        return float(abs(x @ x - 0.25))
    return float(abs(x[0] ** 2 - x[1] ** 2 - x[2] ** 2 - 0.25))


def target_metric(space: AmbientSpace) -> np.ndarray:
    """Riemannian metric on the tangent planes of the projected quadric, in R^3 coordinates."""
    if space.c == 1:
        return np.eye(3)
    return np.diag([-1.0, 1.0, 1.0])


def projected_curvature(x, dx, ddx, space: AmbientSpace) -> float:
    """Signed geodesic curvature of a curve on S^2(1/2) or H^2(-1/2).

    Inputs are the point and its first two derivatives in R^3. The sign is
    the orientation of ``(x', normal, x'')``, with the normal ``2x``; with
    this choice the projection of a Legendre curve has curvature lambda.
    """
    G = target_metric(space)
    x, dx, ddx = (np.asarray(a, dtype=float) for a in (x, dx, ddx))
    normal = 2 * x
    nn = normal @ G @ normal
    tang = ddx - (ddx @ G @ normal) / nn * normal
    speed2 = dx @ G @ dx
    tang = tang - (tang @ G @ dx) / speed2 * dx
    mag = np.sqrt(max(tang @ G @ tang, 0.0)) / speed2
    sign = np.sign(np.linalg.det(np.array([dx, normal, ddx])))
    return float(sign * mag)
