"""Fixed-step RK4 for the (mu, nu, theta) systems and for Legendre curves.

All first-order systems here are instances of

    nu' = -3 mu^2 - nu^2 - c,    mu' = 2 mu nu,

with c = 0 (C5), 1 (CP5) or -1 (CH5). ``I = mu (mu^2 + nu^2 + c)`` is
conserved; it equals c_param^2 for C5/CP5 and -k for CH5.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ..ambient import AmbientSpace, GeometryError, apply_J, inner

FAMILY_CURVATURE = {"C5": 0, "CP5": 1, "CH5": -1}
DEFAULT_STEP = 1e-3


def rk4(rhs, y0, t0: float, t1: float, step: float, stop=None):
    """Classical RK4 from t0 to t1 (either direction) with about ``step`` spacing.

    ``stop(t, y)`` may return a reason string to end early. Returns
    ``(ts, ys, reason)``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, int(math.ceil(abs(t1 - t0) / step - 1e-9)))
    h = (t1 - t0) / n
    y = np.array(y0, dtype=np.result_type(np.asarray(y0), float))
    ts, ys = [t0], [y.copy()]
    t = t0
    for i in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
        if stop is not None:
            why = stop(t, y)
            if why:
                return np.array(ts), np.array(ys), why
        ts.append(t)
        ys.append(y.copy())
    return np.array(ts), np.array(ys), None


def rk4_partial(rhs, t: float, y, h: float):
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# -- (mu, nu, theta) ---------------------------------------------------------

@dataclass(frozen=True)
class OdeState:
    t: float
    mu: float
    nu: float
    theta: float = 0.0
    family: str = "C5"

    def __post_init__(self):
        if self.family not in FAMILY_CURVATURE:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.mu > 0:
            raise GeometryError("mu must be positive")

    @property
    def c(self) -> int:
        return FAMILY_CURVATURE[self.family]

    @property
    def invariant(self) -> float:
        return first_integral(self.mu, self.nu, self.c)

    @property
    def c_param(self) -> float:
        """Positive constant of the first integral (C5, CP5); ``nan`` for CH5."""
        if self.c == -1:
            return float("nan")
        return math.sqrt(self.invariant)

    @property
    def k(self) -> float:
        """Constant of the CH5 first integral ``nu^2 = 1 - mu^2 - k/mu``."""
        return -self.invariant if self.c == -1 else float("nan")

    @property
    def kind(self) -> str:
        if self.c != -1:
            return self.family
        k = self.k
        if abs(k) < 1e-12:
            return "CH5k=0"
        return "CH5k>0" if k > 0 else "CH5k<0"


def first_integral(mu, nu, c):
    return mu * (mu * mu + nu * nu + c)


def mu_nu_rhs(c: float):
    """Right-hand side on the state (mu, nu, theta) with theta' = mu."""
    def rhs(t, y):
        mu, nu = y[0], y[1]
        return np.array([2 * mu * nu, -3 * mu * mu - nu * nu - c, mu])
    return rhs


@dataclass
class Trajectory:
    t: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    theta: np.ndarray
    family: str
    invariant: float
    reason: str | None = None

    @property
    def c(self) -> int:
        return FAMILY_CURVATURE[self.family]

    def __len__(self) -> int:
        return len(self.t)

    def states(self) -> list[OdeState]:
        return [OdeState(float(a), float(b), float(c), float(d), self.family)
                for a, b, c, d in zip(self.t, self.mu, self.nu, self.theta)]

    def radicand(self, mu=None):
        mu = self.mu if mu is None else mu
        return self.invariant / mu - mu * mu - self.c

    def angle(self):
        """theta for CP5/CH5; the C5 angle phi = -4 theta."""
        return -4 * self.theta if self.c == 0 else self.theta

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mu", "nu", "theta", "first_integral_residual"])
        res = np.abs(self.nu ** 2 - self.radicand())
        for row in zip(self.t, self.mu, self.nu, self.angle(), res):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def integrate_mu_nu(family: str, init: OdeState, span: float, step: float = DEFAULT_STEP,
                    mu_floor: float = 1e-8, nu_cap: float = 1e8) -> Trajectory:
    """Integrate from ``init.t`` to ``init.t + span`` (span may be negative)."""
    if init.family != family:
        init = OdeState(init.t, init.mu, init.nu, init.theta, family)
    c = init.c
    I0 = init.invariant

    def stop(t, y):
        if not np.all(np.isfinite(y)):
            return "non-finite state"
        if y[0] <= mu_floor:
            return "mu left the admissible interval (mu -> 0)"
        if abs(y[1]) > nu_cap:
            return "nu blew up"
        return None

    ts, ys, why = rk4(mu_nu_rhs(c), [init.mu, init.nu, init.theta], init.t, init.t + span, step, stop)
    return Trajectory(ts, ys[:, 0], ys[:, 1], ys[:, 2], family, I0, why)


def first_integral_residual(traj: Trajectory) -> float:
    """max |nu^2 - (I/mu - mu^2 - c)| with I taken from the initial state."""
    return float(np.max(np.abs(traj.nu ** 2 - traj.radicand())))


def ratio_ode_residual(t, mu, r: float, c: float, interior: int = 2) -> float:
    """Max residual of mu mu'' - (r-3)/(r-2) mu'^2 + (r-2) mu^2 ((r-1) mu^2 + c).

    Derivatives come from fourth-order central differences on a uniform
    grid, so the first and last ``interior`` samples are skipped. A constant
    ``mu`` array is also accepted (length one is fine).
    """
    if r == 2:
        raise ValueError("the ratio ODE is undefined for r = 2")
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    q = (r - 3) / (r - 2)
    if len(mu) < 5:
        if np.ptp(mu) != 0:
            raise ValueError("need at least five samples for a non-constant mu")
        d1 = d2 = np.zeros_like(mu)
        core = mu
    else:
        h = t[1] - t[0]
        if np.max(np.abs(np.diff(t) - h)) > 1e-9 * abs(h):
            raise ValueError("samples must be uniformly spaced")
        core = mu[2:-2]
        d1 = (mu[:-4] - 8 * mu[1:-3] + 8 * mu[3:-1] - mu[4:]) / (12 * h)
        d2 = (-mu[:-4] + 16 * mu[1:-3] - 30 * mu[2:-2] + 16 * mu[3:-1] - mu[4:]) / (12 * h * h)
        lo = max(interior - 2, 0)
        core, d1, d2 = core[lo:len(core) - lo or None], d1[lo:len(d1) - lo or None], d2[lo:len(d2) - lo or None]
    res = core * d2 - q * d1 ** 2 + (r - 2) * core ** 2 * ((r - 1) * core ** 2 + c)
    return float(np.max(np.abs(res)))


# -- Legendre curves -----------------------------------------------------------

@dataclass
class LegendreCurve:
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    lam: np.ndarray
    space: AmbientSpace
    aux: np.ndarray | None = None

    def invariants(self) -> dict:
        s = self.space
        return {
            "constraint": float(np.max(np.abs(inner(self.z, self.z, s) - s.c))),
            "speed": float(np.max(np.abs(inner(self.dz, self.dz, s) - 1.0))),
            "horizontality": float(np.max(np.abs(inner(self.dz, apply_J(self.z), s)))),
        }


def legendre_rhs(lam, space: AmbientSpace, aux_rhs=None):
    """State: (z1, z2, z1', z2', aux...). ``lam(t, aux)`` gives the curvature."""
    sgn = -1.0 if space.c == 1 else 1.0

    def rhs(t, y):
        z, dz, aux = y[0:2], y[2:4], y[4:]
        a = aux.real if aux.size else aux
        ddz = 1j * lam(t, a) * dz + sgn * z
        out = [dz, ddz]
        if aux_rhs is not None:
            out.append(np.asarray(aux_rhs(t, a), dtype=complex))
        return np.concatenate(out)
    return rhs


def integrate_legendre(lam, space: AmbientSpace, z0, dz0, span, step: float = DEFAULT_STEP,
                       aux0=None, aux_rhs=None, tol: float = 1e-7) -> LegendreCurve:
    """Solve z'' = i lam z' - z (sphere) or z'' = i lam z' + z (H^3_1) over ``span = (t0, t1)``.

    ``lam`` is called as ``lam(t, aux)``; ``aux`` is an optional real state
    integrated alongside (e.g. (mu, nu) when lam = 4 mu).
    """
    if space.n != 1 or space.c == 0:
        raise GeometryError("Legendre curves live in S^3(1) or H^3_1(-1)")
    z0, dz0 = np.asarray(z0, complex), np.asarray(dz0, complex)
    probe = LegendreCurve(np.zeros(1), z0[None], dz0[None], np.zeros(1), space)
    bad = {k: v for k, v in probe.invariants().items() if v > 1e-9}
    if bad:
        raise GeometryError(f"initial data violate {sorted(bad)}")
    aux0 = np.zeros(0) if aux0 is None else np.asarray(aux0, float)
    y0 = np.concatenate([z0, dz0, aux0.astype(complex)])
    t0, t1 = span
    ts, ys, why = rk4(legendre_rhs(lam, space, aux_rhs), y0, t0, t1, step)
    aux = ys[:, 4:].real
    lam_vals = np.array([lam(t, a) for t, a in zip(ts, aux)])
    curve = LegendreCurve(ts, ys[:, 0:2], ys[:, 2:4], lam_vals, space, aux if aux.size else None)
    drift = curve.invariants()
    worst = max(drift.values())
    if worst > tol:
        raise GeometryError(f"Legendre invariants drifted by {worst:.2e}; reduce the step")
    return curve


class DenseSolution:
    """Two-sided RK4 grid around an anchor with one partial step for off-grid queries."""

    def __init__(self, rhs, y0, anchor: float, lower: float, upper: float, step: float = DEFAULT_STEP):
        self.rhs = rhs
        tf, yf, wf = rk4(rhs, y0, anchor, upper, step)
        tb, yb, wb = rk4(rhs, y0, anchor, lower, step)
        if wf or wb:
            raise GeometryError(f"integration stopped early: {wf or wb}")
        self.t = np.concatenate([tb[::-1], tf[1:]])
        self.y = np.concatenate([yb[::-1], yf[1:]])
        self.lower, self.upper = lower, upper

    def __call__(self, t: float):
        if not self.lower - 1e-12 <= t <= self.upper + 1e-12:
            raise GeometryError(f"t = {t} outside the integrated interval")
        i = int(np.argmin(np.abs(self.t - t)))
        h = t - self.t[i]
        if h == 0:
            return self.y[i].copy()
        return rk4_partial(self.rhs, self.t[i], self.y[i], h)
