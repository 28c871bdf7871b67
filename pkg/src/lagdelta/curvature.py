"""Extrinsic and intrinsic curvature at a chart point.

The cubic form ``h[i, j, k] = <h(e_j, e_k), J e_i>`` is computed in an
orthonormal frame obtained by pivoted Gram-Schmidt on the chart partials.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .ambient import GeometryError, apply_J, inner
from .immersion import ChartImmersion, Jet3, evaluate_jet, induced_metric

NORMAL_TOL = 1e-7


class NotLagrangianError(GeometryError):
    pass


@dataclass(frozen=True)
class PointGeometry:
    """Frame data and cubic form at one point.

    ``frame`` holds the ambient vectors e_i as rows; ``to_frame`` is the
    matrix T with e_i = sum_a T[i, a] d_a f.
    """

    u: np.ndarray
    frame: np.ndarray
    to_frame: np.ndarray
    h: np.ndarray
    mean: np.ndarray
    c: int
    metric: np.ndarray

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def mean_sq(self) -> float:
        return float(self.mean @ self.mean)

    @property
    def symmetry_residual(self) -> float:
        return cubic_symmetry_residual(self.h)

    def rotated(self, Q) -> PointGeometry:
        """Same point, frame replaced by e'_i = sum_j Q[i, j] e_j."""
        Q = np.asarray(Q, dtype=float)
        h = np.einsum("ia,jb,kc,abc->ijk", Q, Q, Q, self.h)
        return PointGeometry(self.u, Q @ self.frame, Q @ self.to_frame, h, Q @ self.mean,
                             self.c, self.metric)


def cubic_symmetry_residual(h) -> float:
    return float(max(np.abs(h - h.transpose(p)).max()
                     for p in itertools.permutations(range(3))))


def mean_vector(h) -> np.ndarray:
    return np.einsum("ijj->i", h) / h.shape[0]


def _pivoted_frame(d1, space):
    """Gram-Schmidt with column pivoting; returns (frame rows, T)."""
    m = d1.shape[0]
    vecs = [v.copy() for v in d1]
    coeffs = [np.eye(m)[a] for a in range(m)]
    frame, T = [], []
    remaining = list(range(m))
    while remaining:
        norms = [inner(vecs[a], vecs[a], space) for a in remaining]
        k = remaining[int(np.argmax(norms))]
        nrm = np.sqrt(max(inner(vecs[k], vecs[k], space), 0.0))
        if nrm == 0:
            raise GeometryError("tangent vectors are dependent")
        e, t = vecs[k] / nrm, coeffs[k] / nrm
        frame.append(e)
        T.append(t)
        remaining.remove(k)
        for a in remaining:
            p = inner(vecs[a], e, space)
            vecs[a] = vecs[a] - p * e
            coeffs[a] = coeffs[a] - p * t
    return np.array(frame), np.array(T)


def second_fundamental_form(f: ChartImmersion, u, jet3: Jet3 | None = None,
                            tol: float = NORMAL_TOL, backend: str = "auto") -> PointGeometry:
    u = np.asarray(u, dtype=float)
    jt = jet3 if jet3 is not None else evaluate_jet(f, u, 2, backend=backend)
    space = f.space
    g = induced_metric(f, u, jt)
    E, T = _pivoted_frame(jt.d1, space)
    m = f.dim
    scale = 1.0 + float(np.abs(jt.d2).max())
    JE = apply_J(E)
    omega = inner(JE[:, None, :], E[None, :, :], space)
    if np.abs(omega).max() > tol:
        raise NotLagrangianError(f"tangent plane is not Lagrangian (|omega| = {np.abs(omega).max():.3e})")
    L = jt.value
    if f.is_lift:
        if abs(inner(L, L, space) - space.c) > tol:
            raise NotLagrangianError("point is off the model hypersurface")
        hor = np.abs(inner(jt.d1, apply_J(L), space)).max()
        if hor > tol:
            raise NotLagrangianError(f"chart is not horizontal (residual {hor:.3e})")
    coef = np.zeros((m, m, m))
    for a in range(m):
        for b in range(a, m):
            v = jt.d2[a, b]
            v = v - np.tensordot(inner(v, E, space), E, axes=1)
            if f.is_lift:
                # umbilical part along L and vertical part along JL
                ll = inner(L, L, space)
                along = inner(v, L, space) / ll
                vert = inner(v, apply_J(L), space) / ll
                if abs(along * ll + g[a, b]) > tol * scale or abs(vert) > tol * scale:
                    raise NotLagrangianError("normal components along L / JL do not match a horizontal lift")
                v = v - along * L - vert * apply_J(L)
            hc = inner(v, JE, space)
            rest = v - np.tensordot(hc, JE, axes=1)
            if np.abs(rest).max() > tol * scale:
                raise NotLagrangianError(f"normal residual {np.abs(rest).max():.3e} outside span(J e_i)")
            coef[:, a, b] = coef[:, b, a] = hc
    h = np.einsum("ja,kb,iab->ijk", T, T, coef)
    return PointGeometry(u, E, T, h, mean_vector(h), space.c, g)


# -- curvature tensors -----------------------------------------------------

@dataclass(frozen=True)
class CurvatureTensor:
    """R[i, j, k, l] = <R(e_i, e_j) e_k, e_l>; K(e_i, e_j) = R[i, j, j, i]."""

    R: np.ndarray

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    @property
    def tau(self) -> float:
        return scalar_curvature(self)

    def sectional(self, i: int, j: int) -> float:
        return float(self.R[i, j, j, i])

    def rotated(self, Q) -> CurvatureTensor:
        Q = np.asarray(Q, dtype=float)
        return CurvatureTensor(np.einsum("ia,jb,kc,ld,abcd->ijkl", Q, Q, Q, Q, self.R))

    def symmetry_defect(self) -> float:
        R = self.R
        bianchi = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
        return float(max(np.abs(R + R.transpose(1, 0, 2, 3)).max(),
                         np.abs(R + R.transpose(0, 1, 3, 2)).max(),
                         np.abs(R - R.transpose(2, 3, 0, 1)).max(),
                         np.abs(bianchi).max()))


def constant_curvature_tensor(m: int, c: float) -> CurvatureTensor:
    d = np.eye(m)
    return CurvatureTensor(c * (np.einsum("il,jk->ijkl", d, d) - np.einsum("ik,jl->ijkl", d, d)))


def gauss_tensor_from_h(h, c: float) -> CurvatureTensor:
    h = np.asarray(h, dtype=float)
    R = np.einsum("mjk,mil->ijkl", h, h) - np.einsum("mik,mjl->ijkl", h, h)
    return CurvatureTensor(R + constant_curvature_tensor(h.shape[0], c).R)


def gauss_curvature_tensor(pg: PointGeometry) -> CurvatureTensor:
    return gauss_tensor_from_h(pg.h, pg.c)


def scalar_curvature(R: CurvatureTensor) -> float:
    m = R.dim
    return float(sum(R.R[i, j, j, i] for i in range(m) for j in range(i + 1, m)))


# -- intrinsic cross-check ---------------------------------------------------

def intrinsic_curvature(f: ChartImmersion, u, jet3: Jet3, T) -> CurvatureTensor:
    """Riemann tensor of the induced metric alone, expressed in the frame ``T``."""
    space = f.space
    d1, d2, d3 = jet3.d1, jet3.d2, jet3.d3
    ip = lambda a, b: inner(a, b, space)
    g = ip(d1[:, None], d1[None, :])
    # dg[c, a, b] = d_c g_ab
    x = ip(d2[:, :, None], d1[None, None, :])          # x[c, a, b] = <L_ac, L_b>
    dg = np.transpose(x, (1, 0, 2)) + np.transpose(x, (1, 2, 0))
    # ddg[d, c, a, b]
    y = ip(d3[:, :, :, None], d1[None, None, None, :])  # y[a, c, d, b] = <L_acd, L_b>
    z = ip(d2[:, :, None, None], d2[None, None, :, :])  # z[a, c, b, d] = <L_ac, L_bd>
    ddg = (np.einsum("acdb->dcab", y) + np.einsum("bcda->dcab", y)
           + np.einsum("acbd->dcab", z) + np.einsum("adbc->dcab", z))
    gi = np.linalg.inv(g)
    # Gamma_{f,ab} = 1/2 (d_a g_fb + d_b g_fa - d_f g_ab)
    low = 0.5 * (np.einsum("afb->fab", dg) + np.einsum("bfa->fab", dg) - dg)
    gam = np.einsum("ef,fab->eab", gi, low)
    dlow = 0.5 * (np.einsum("dafb->dfab", ddg) + np.einsum("dbfa->dfab", ddg) - ddg)
    dgi = -np.einsum("ep,dpq,qf->def", gi, dg, gi)
    dgam = np.einsum("def,fab->deab", dgi, low) + np.einsum("ef,dfab->deab", gi, dlow)
    # R^e_{abc}: R(d_a, d_b) d_c = R^e_{abc} d_e
    Rup = (np.einsum("aebc->abce", dgam) - np.einsum("beac->abce", dgam)
           + np.einsum("fbc,eaf->abce", gam, gam) - np.einsum("fac,ebf->abce", gam, gam))
    Rdown = np.einsum("abce,ed->abcd", Rup, g)
    T = np.asarray(T)
    return CurvatureTensor(np.einsum("ia,jb,kc,ld,abcd->ijkl", T, T, T, T, Rdown))


def intrinsic_curvature_crosscheck(f: ChartImmersion, u, backend: str = "auto") -> float:
    """Max deviation between Gauss-equation and metric-derived curvature tensors."""
    u = np.asarray(u, dtype=float)
    jt = evaluate_jet(f, u, 3, backend=backend)
    pg = second_fundamental_form(f, u, jet3=jt)
    R_ext = gauss_curvature_tensor(pg)
    R_int = intrinsic_curvature(f, u, jt, pg.to_frame)
    return float(np.abs(R_ext.R - R_int.R).max())
