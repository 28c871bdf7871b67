"""Delta-invariants, the classical and improved bounds, and the equality-frame fit.

``delta(n_1..n_k) = tau - min sum_j tau(L_j)`` over mutually orthogonal
subspaces L_j of dimensions n_j. The minimum is searched over orthogonal
frames whose consecutive row blocks span the L_j. Rotating two rows from
different blocks (or one block row against the unused complement) changes
the objective by ``a0 + a1 cos 2t + b1 sin 2t`` exactly, so every Givens
step is solved in closed form from three evaluations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares, minimize

from .curvature import CurvatureTensor, PointGeometry, gauss_curvature_tensor

DEFAULT_RESTARTS = 64
TIE_TOL = 1e-9
EQUALITY_TOL = 1e-5
SLACK_TOL = 1e-7


# -- tuples ----------------------------------------------------------------

@dataclass(frozen=True)
class TupleSpec:
    n: int
    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise ValueError("tuple must have at least one entry")
        if any(p < 2 or p >= self.n for p in parts):
            raise ValueError(f"{parts}: every entry must satisfy 2 <= n_j < n = {self.n}")
        if sum(parts) > self.n:
            raise ValueError(f"{parts}: entries must sum to at most n = {self.n}")

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def total(self) -> int:
        return sum(self.parts)

    @property
    def strict(self) -> bool:
        return self.total < self.n

    def blocks(self) -> list[range]:
        out, start = [], 0
        for p in self.parts:
            out.append(range(start, start + p))
            start += p
        return out

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"


def enumerate_tuples(n: int) -> list[TupleSpec]:
    """All non-increasing tuples in S(n)."""
    out = []

    def rec(prefix, remaining, cap):
        if prefix:
            out.append(TupleSpec(n, tuple(prefix)))
        for p in range(min(cap, remaining, n - 1), 1, -1):
            rec(prefix + [p], remaining - p, p)

    rec([], n, n - 1)
    return out


# -- scalar curvature of subspaces -------------------------------------------

def tau_subspace(R: CurvatureTensor, basis, tol: float = 1e-10) -> float:
    """Scalar curvature of the subspace spanned by the orthonormal rows of ``basis``."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if np.abs(B @ B.T - np.eye(len(B))).max() > tol:
        raise ValueError("basis is not orthonormal")
    K = np.einsum("ijkl,ai,bj,bk,al->ab", R.R, B, B, B, B, optimize=True)
    return float(0.5 * (K.sum() - np.trace(K)))


def _block_objective(Rmat, frames, blocks):
    """sum_j tau(L_j) for a batch of frames (B, m, m); rows are frame vectors."""
    total = 0.0
    m2 = Rmat.shape[0] * Rmat.shape[1]
    M = Rmat.reshape(m2, m2)
    for blk in blocks:
        rows = frames[:, blk.start:blk.stop, :]
        P = np.matmul(np.swapaxes(rows, 1, 2), rows).reshape(-1, m2)  # block projector
        # tau(L) = 1/2 sum R_ijkl P_il P_jk
        total = total + 0.5 * np.einsum("bi,bi->b", P @ M, P)
    return total


def _as_pair_tensor(R):
    # Rmat[i, l, j, k] = R[i, j, k, l]
    return np.ascontiguousarray(np.transpose(R.R, (0, 3, 1, 2)))


def sum_tau(R: CurvatureTensor, frames, spec: TupleSpec):
    frames = np.asarray(frames, dtype=float)
    single = frames.ndim == 2
    val = _block_objective(_as_pair_tensor(R), frames[None] if single else frames, spec.blocks())
    return float(val[0]) if single else val


# -- optimizer ---------------------------------------------------------------

@dataclass
class DeltaResult:
    value: float
    tau: float
    inf_sum: float
    minimizer: list
    spec: TupleSpec
    restarts_used: int
    converged: bool
    hits: int
    seed: int
    oracle_value: float | None = None
    oracle_gap: float | None = None
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tuple": list(self.spec.parts),
            "n": self.spec.n,
            "value": self.value,
            "tau": self.tau,
            "inf_sum": self.inf_sum,
            "minimizer": [np.asarray(b).tolist() for b in self.minimizer],
            "restarts": self.restarts_used,
            "hits": self.hits,
            "converged": self.converged,
            "seed": self.seed,
            "oracle_value": self.oracle_value,
            "oracle_gap": self.oracle_gap,
            "flags": list(self.flags),
        }


def _haar(rng, count, m):
    A = rng.standard_normal((count, m, m))
    Q, Rr = np.linalg.qr(A)
    d = np.sign(np.einsum("bii->bi", Rr))
    d[d == 0] = 1.0
    return Q * d[:, None, :]


def _rotation_pairs(spec: TupleSpec, m: int):
    label = np.full(m, -1)
    for j, blk in enumerate(spec.blocks()):
        label[list(blk)] = j
    return [(p, q) for p, q in itertools.combinations(range(m), 2)
            if label[p] != label[q] and label[p] >= 0]


def _rotate(frames, p, q, t):
    c, s = np.cos(t), np.sin(t)
    out = frames.copy()
    out[:, p] = c[:, None] * frames[:, p] + s[:, None] * frames[:, q]
    out[:, q] = -s[:, None] * frames[:, p] + c[:, None] * frames[:, q]
    return out


def _descend(Rmat, frames, spec, max_sweeps=500, tol=1e-14):
    blocks = spec.blocks()
    pairs = _rotation_pairs(spec, frames.shape[1])
    f = _block_objective(Rmat, frames, blocks)
    B = len(frames)
    quarter = np.full(B, np.pi / 4)
    for _ in range(max_sweeps):
        start = f.copy()
        for p, q in pairs:
            f45 = _block_objective(Rmat, _rotate(frames, p, q, quarter), blocks)
            f90 = _block_objective(Rmat, _rotate(frames, p, q, 2 * quarter), blocks)
            a0 = 0.5 * (f + f90)
            a1 = 0.5 * (f - f90)
            b1 = f45 - a0
            t = 0.5 * np.arctan2(-b1, -a1)
            new = a0 - np.hypot(a1, b1)
            better = new < f - 1e-16
            t = np.where(better, t, 0.0)
            frames = _rotate(frames, p, q, t)
            f = np.where(better, new, f)
        if np.max(start - f) <= tol * (1.0 + np.abs(f).max()):
            break
    return frames, _block_objective(Rmat, frames, blocks)


def _canonical_key(frame, spec):
    """Block projectors, rounded; invariant under rotations inside blocks."""
    parts = []
    for blk in spec.blocks():
        rows = frame[list(blk)]
        parts.append(np.round(rows.T @ rows, 8).ravel())
    return tuple(np.concatenate(parts))


def delta_invariant(R: CurvatureTensor, spec: TupleSpec, restarts: int = DEFAULT_RESTARTS,
                    seed: int = 0, oracle: int = 0) -> DeltaResult:
    """Multi-start Givens coordinate descent for delta(n_1, ..., n_k).

    The result is flagged ``converged=False`` unless at least two restarts
    reach the best value (within ``TIE_TOL``).
    """
    m = R.dim
    if spec.n != m:
        raise ValueError(f"tuple is for n = {spec.n}, tensor has dimension {m}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    tau = R.tau
    rng = np.random.default_rng(seed)
    frames = _haar(rng, restarts, m)
    frames[0] = np.eye(m)
    Rmat = _as_pair_tensor(R)
    frames, f = _descend(Rmat, frames, spec)
    best = float(f.min())
    close = np.flatnonzero(f <= best + TIE_TOL * max(1.0, abs(best)))
    pick = min(close, key=lambda i: _canonical_key(frames[i], spec))
    frame = frames[pick]
    inf_sum = float(_block_objective(Rmat, frame[None], spec.blocks())[0])
    res = DeltaResult(value=tau - inf_sum, tau=tau, inf_sum=inf_sum,
                      minimizer=[frame[list(b)] for b in spec.blocks()], spec=spec,
                      restarts_used=restarts, converged=len(close) >= 2, hits=int(len(close)),
                      seed=seed)
    if not res.converged:
        res.flags.append("best value reached by a single restart")
    if oracle:
        ov = delta_bruteforce_oracle(R, spec, oracle, seed=seed)
        res.oracle_value = ov
        res.oracle_gap = abs(res.value - ov)
    return res


# -- brute-force oracle ---------------------------------------------------------

def oracle_min_sum(R: CurvatureTensor, spec: TupleSpec, samples: int, seed: int = 0,
                   refine: bool = True, chunk: int = 4096):
    """Smallest sum of tau(L_j) over ``samples`` Haar frames, then a BFGS refinement.

    Frames are generated in fixed-size chunks from one stream, so a larger
    ``samples`` extends the same sequence.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    m = R.dim
    Rmat = _as_pair_tensor(R)
    blocks = spec.blocks()
    rng = np.random.default_rng([seed, 7919])
    best, best_frame, done = np.inf, None, 0
    while done < samples:
        frames = _haar(rng, chunk, m)[: samples - done]
        vals = _block_objective(Rmat, frames, blocks)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, best_frame = float(vals[i]), frames[i]
        done += len(frames)
    if not refine:
        return best, best_frame
    iu = np.triu_indices(m, 1)

    def frame_of(x):
        S = np.zeros((m, m))
        S[iu] = x
        return expm(S - S.T) @ best_frame

    obj = lambda x: float(_block_objective(Rmat, frame_of(x)[None], blocks)[0])
    sol = minimize(obj, np.zeros(len(iu[0])), method="BFGS", options={"gtol": 1e-10})
    if sol.fun < best:
        return float(sol.fun), frame_of(sol.x)
    return best, best_frame


def delta_bruteforce_oracle(R: CurvatureTensor, spec: TupleSpec, samples: int = 100_000,
                            seed: int = 0, refine: bool = True) -> float:
    """Oracle value of delta; an upper bound on the true infimum sum gives a lower bound on delta."""
    s, _ = oracle_min_sum(R, spec, samples, seed, refine)
    return R.tau - s


# -- inequalities ------------------------------------------------------------------

def classical_coefficients(spec: TupleSpec) -> tuple[Fraction, Fraction]:
    n, k, S = spec.n, spec.k, spec.total
    a = Fraction(n * n * (n + k - 1 - S), 2 * (n + k - S))
    b = Fraction(n * (n - 1) - sum(p * (p - 1) for p in spec.parts), 2)
    return a, b


def improved_coefficients(spec: TupleSpec) -> tuple[Fraction, Fraction]:
    if not spec.strict:
        raise ValueError(f"improved bound needs sum n_j < n, got {spec} for n = {spec.n}")
    n, k, S = spec.n, spec.k, spec.total
    corr = 6 * sum(Fraction(1, 2 + p) for p in spec.parts)
    a = Fraction(n * n) * ((n - S + 3 * k - 1) - corr) / (2 * ((n - S + 3 * k + 2) - corr))
    _, b = classical_coefficients(spec)
    return a, b


def classical_rhs(spec: TupleSpec, Hsq: float, c: float) -> float:
    a, b = classical_coefficients(spec)
    return float(a) * Hsq + float(b) * c


def improved_rhs(spec: TupleSpec, Hsq: float, c: float) -> float:
    a, b = improved_coefficients(spec)
    return float(a) * Hsq + float(b) * c


def improved_equality_residual(R: CurvatureTensor, pg: PointGeometry,
                               spec: TupleSpec | None = None, **opts):
    """delta - (improved bound); returns (residual, DeltaResult)."""
    spec = TupleSpec(5, (2, 2)) if spec is None else spec
    if R.dim != spec.n:
        raise ValueError("dimension mismatch between tensor and tuple")
    res = delta_invariant(R, spec, **opts)
    return res.value - improved_rhs(spec, pg.mean_sq, pg.c), res


def point_delta(pg: PointGeometry, spec: TupleSpec | None = None, **opts):
    """Convenience: residual and DeltaResult straight from point geometry."""
    return improved_equality_residual(gauss_curvature_tensor(pg), pg, spec, **opts)


# -- random algebraic curvature tensors ---------------------------------------------

def kulkarni_nomizu(A, B) -> np.ndarray:
    """Curvature-like product; KN(I, I)/2 is the unit constant-curvature tensor."""
    return (np.einsum("il,jk->ijkl", A, B) + np.einsum("il,jk->ijkl", B, A)
            - np.einsum("ik,jl->ijkl", A, B) - np.einsum("ik,jl->ijkl", B, A))


def random_curvature_tensor(seed, m: int = 5, terms: int = 4) -> CurvatureTensor:
    """Random algebraic curvature tensor as a signed sum of Kulkarni-Nomizu squares."""
    rng = np.random.default_rng(seed)
    R = np.zeros((m,) * 4)
    for _ in range(terms):
        A = rng.standard_normal((m, m))
        A = 0.5 * (A + A.T)
        R += rng.choice([-1.0, 1.0]) * 0.5 * kulkarni_nomizu(A, A)
    return CurvatureTensor(R)


# -- canonical (improved-equality) frame ------------------------------------------------

def pattern_41(a: float, b: float, mu: float) -> np.ndarray:
    """Cubic form h[i, j, k] of the improved-equality normal form (indices 0..4)."""
    h = np.zeros((5, 5, 5))

    def put(i, j, k, v):
        for p in set(itertools.permutations((i, j, k))):
            h[p] = v

    put(0, 0, 0, a)
    put(0, 1, 1, -a)
    put(2, 2, 2, b)
    put(2, 3, 3, -b)
    for i in range(4):
        put(4, i, i, mu)
    put(4, 4, 4, 4 * mu)
    return h


_BASIS41 = np.stack([pattern_41(1, 0, 0).ravel(), pattern_41(0, 1, 0).ravel(),
                     pattern_41(0, 0, 1).ravel()], axis=1)


@dataclass
class FrameFit:
    a: float
    b: float
    mu: float
    frame: np.ndarray
    residual: float
    status: str

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "mu": self.mu, "residual": self.residual,
                "status": self.status}


def _rotate_h(Q, h):
    return np.einsum("ia,jb,kc,abc->ijk", Q, Q, Q, h)


def _skew(x, m=5):
    S = np.zeros((m, m))
    S[np.triu_indices(m, 1)] = x
    return S - S.T


def _complete_basis(v, rng):
    M = np.vstack([v, rng.standard_normal((4, 5))])
    Q, _ = np.linalg.qr(M.T)
    Q = Q.T
    if Q[0] @ v < 0:
        Q[0] = -Q[0]
    return np.vstack([Q[1:], Q[:1]])  # e5 last


def canonical_frame_fit(pg: PointGeometry, starts: int = 8, seed: int = 0) -> FrameFit:
    """Best orthonormal frame bringing h to the normal form with parameters (a, b, mu).

    The frame is returned as rows in the basis of ``pg.frame``. The result is
    normalised to mu >= 0, a >= b >= 0.
    """
    h = np.asarray(pg.h, dtype=float)
    if h.shape != (5, 5, 5):
        raise ValueError("the normal-form fit is defined for dimension 5")
    scale = float(np.linalg.norm(h))
    if scale < 1e-14:
        return FrameFit(0.0, 0.0, 0.0, np.eye(5), 0.0, "totally geodesic")
    H = np.einsum("ijj->i", h) / 5
    minimal = np.linalg.norm(H) < 1e-10 * max(scale, 1.0)
    rng = np.random.default_rng(seed)
    seeds = []
    for _ in range(starts):
        if not minimal:
            seeds.append(_complete_basis(H / np.linalg.norm(H), rng))
        seeds.append(_haar(rng, 1, 5)[0])

    def residual(x, Q0):
        hr = _rotate_h(expm(_skew(x)) @ Q0, h).ravel()
        coef, *_ = np.linalg.lstsq(_BASIS41, hr, rcond=None)
        return hr - _BASIS41 @ coef

    best = None
    for Q0 in seeds:
        sol = least_squares(residual, np.zeros(10), args=(Q0,), method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        r = float(np.linalg.norm(sol.fun))
        if best is None or r < best[0] - 1e-13:
            best = (r, expm(_skew(sol.x)) @ Q0)
        if r < 1e-12 * max(scale, 1.0):
            break
    Q = best[1]
    hr = _rotate_h(Q, h)
    a, b, mu = np.linalg.lstsq(_BASIS41, hr.ravel(), rcond=None)[0]
    # normalise the symmetries of the form
    if mu < 0:
        Q[4], mu = -Q[4], -mu
    if a < 0:
        Q[0], a = -Q[0], -a
    if b < 0:
        Q[2], b = -Q[2], -b
    if b > a:
        Q = Q[[2, 3, 0, 1, 4]]
        a, b = b, a
    resid = float(np.linalg.norm(_rotate_h(Q, h) - pattern_41(a, b, mu)))
    status = "minimal" if minimal else "ok"
    return FrameFit(float(a), float(b), float(mu), Q, resid, status)
