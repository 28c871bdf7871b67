"""Truncated multivariate Taylor arithmetic (jets) up to order 3.

A :class:`Jet` stores the Taylor coefficients of a function of ``nvars``
variables around a base point, truncated after total degree ``order``.
Coefficients may be scalar or carry trailing value axes (e.g. a vector in
C^N), so a chart map can be evaluated once and return every partial
derivative of its value exactly, up to round-off.

    >>> t, = Jet.variables([0.3], order=2)
    >>> f = exp(1j * t)
    >>> d = f.derivatives()
    >>> bool(abs(d[2][0, 0] + np.exp(0.3j)) < 1e-15)
    True
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_ORDER = 3


@dataclass(frozen=True)
class _Basis:
    nvars: int
    order: int
    exps: np.ndarray            # (N, nvars) monomial exponents
    degree: np.ndarray          # (N,)
    index: dict                 # exponent tuple -> position
    left: np.ndarray            # product table, sorted by target
    right: np.ndarray
    starts: np.ndarray
    factorial: np.ndarray       # alpha! per monomial

    @property
    def size(self) -> int:
        return len(self.exps)


@functools.lru_cache(maxsize=None)
def _basis(nvars: int, order: int) -> _Basis:
    exps = [(0,) * nvars]
    for deg in range(1, order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            exps.append(tuple(e))
    index = {e: i for i, e in enumerate(exps)}
    arr = np.array(exps, dtype=int).reshape(len(exps), nvars)
    degree = arr.sum(axis=1)
    triples = []
    for i, ei in enumerate(exps):
        for j, ej in enumerate(exps):
            if degree[i] + degree[j] <= order:
                k = index[tuple(a + b for a, b in zip(ei, ej))]
                triples.append((k, i, j))
    triples.sort()
    tk = np.array([t[0] for t in triples])
    left = np.array([t[1] for t in triples])
    right = np.array([t[2] for t in triples])
    starts = np.searchsorted(tk, np.arange(len(exps)))
    fact = np.array([math.prod(math.factorial(a) for a in e) for e in exps], dtype=float)
    return _Basis(nvars, order, arr, degree, index, left, right, starts, fact)


def _expand(a: np.ndarray, ndim: int) -> np.ndarray:
    return a.reshape(a.shape + (1,) * (ndim - a.ndim))


class Jet:
    """Truncated Taylor polynomial with (possibly vector-valued) coefficients."""

    __slots__ = ("coef", "basis")
    __array_priority__ = 100

    def __init__(self, coef, basis: _Basis):
        self.coef = np.asarray(coef)
        self.basis = basis

    # -- construction -------------------------------------------------
    @classmethod
    def variables(cls, point, order: int) -> list[Jet]:
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        point = np.asarray(point, dtype=float)
        b = _basis(len(point), order)
        out = []
        for v, x in enumerate(point):
            c = np.zeros(b.size)
            c[0] = x
            if order >= 1:
                e = [0] * len(point)
                e[v] = 1
                c[b.index[tuple(e)]] = 1.0
            out.append(cls(c, b))
        return out

    def constant(self, value) -> Jet:
        value = np.asarray(value)
        c = np.zeros((self.basis.size,) + value.shape, dtype=np.result_type(value, float))
        c[0] = value
        return Jet(c, self.basis)

    @staticmethod
    def stack(items) -> Jet:
        """Stack scalar jets (and plain numbers) into a vector-valued jet."""
        basis = next(x.basis for x in items if isinstance(x, Jet))
        cols = []
        for x in items:
            if isinstance(x, Jet):
                cols.append(x.coef)
            else:
                c = np.zeros(basis.size, dtype=complex)
                c[0] = x
                cols.append(c)
        return Jet(np.stack(cols, axis=-1), basis)

    @staticmethod
    def concat(items) -> Jet:
        """Concatenate vector jets along the value axis."""
        basis = items[0].basis
        return Jet(np.concatenate([x.coef if x.coef.ndim > 1 else x.coef[:, None]
                                   for x in items], axis=-1), basis)

    # -- access -------------------------------------------------------
    @property
    def value(self):
        return self.coef[0]

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def nvars(self) -> int:
        return self.basis.nvars

    def __getitem__(self, k) -> Jet:
        return Jet(self.coef[:, k], self.basis)

    def __len__(self) -> int:
        return self.coef.shape[1]

    @property
    def real(self) -> Jet:
        return Jet(self.coef.real, self.basis)

    @property
    def imag(self) -> Jet:
        return Jet(self.coef.imag, self.basis)

    def conj(self) -> Jet:
        return Jet(np.conj(self.coef), self.basis)

    def sum(self) -> Jet:
        """Sum over the trailing value axis."""
        return Jet(self.coef.sum(axis=-1), self.basis)

    def derivatives(self):
        """Partial derivatives as full symmetric arrays ``[f, Df, D2f, D3f]``."""
        b = self.basis
        m = b.nvars
        tail = self.coef.shape[1:]
        out = [self.coef[0]]
        for deg in range(1, b.order + 1):
            arr = np.zeros((m,) * deg + tail, dtype=self.coef.dtype)
            for idx in itertools.product(range(m), repeat=deg):
                e = [0] * m
                for v in idx:
                    e[v] += 1
                k = b.index[tuple(e)]
                arr[idx] = b.factorial[k] * self.coef[k]
            out.append(arr)
        return out

    def deriv(self, var: int) -> Jet:
        """Jet of the partial derivative in ``var``, one order lower."""
        b = self.basis
        if b.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        nb = _basis(b.nvars, b.order - 1)
        c = np.zeros((nb.size,) + self.coef.shape[1:], dtype=self.coef.dtype)
        for k, e in enumerate(nb.exps):
            up = list(e)
            up[var] += 1
            c[k] = up[var] * self.coef[b.index[tuple(up)]]
        return Jet(c, nb)

    @classmethod
    def potential(cls, value, gradient: list[Jet]) -> Jet:
        """Jet of a function with the given value and gradient jets.

        The gradient components must be jets of one order below the result
        and must form a closed 1-form; closedness is not checked here.
        """
        gb = gradient[0].basis
        b = _basis(gb.nvars, gb.order + 1)
        tail = gradient[0].coef.shape[1:]
        dtype = np.result_type(value, *[g.coef for g in gradient])
        c = np.zeros((b.size,) + tail, dtype=dtype)
        c[0] = value
        for k in range(1, b.size):
            e = b.exps[k]
            acc = 0
            for v in range(b.nvars):
                if e[v]:
                    low = list(e)
                    low[v] -= 1
                    acc = acc + gradient[v].coef[gb.index[tuple(low)]]
            c[k] = acc / b.degree[k]
        return cls(c, b)

    def truncate(self, order: int) -> Jet:
        """Drop all terms of total degree above ``order``."""
        b = self.basis
        if order > b.order:
            raise ValueError("cannot raise the order of a jet")
        nb = _basis(b.nvars, order)
        idx = [b.index[tuple(e)] for e in nb.exps]
        return Jet(self.coef[idx], nb)

    # -- arithmetic ---------------------------------------------------
    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            if other.basis is not self.basis:
                raise ValueError("jets live on different bases")
            return other
        return self.constant(other)

    def __add__(self, other):
        o = self._lift(other)
        nd = max(self.coef.ndim, o.coef.ndim)
        return Jet(_expand(self.coef, nd) + _expand(o.coef, nd), self.basis)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.basis)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            if other.ndim == 0 or self.coef.ndim > 1:
                return Jet(self.coef * other, self.basis)
            return Jet(_expand(self.coef, 1 + other.ndim) * other, self.basis)
        b = self.basis
        if other.basis is not b:
            raise ValueError("jets live on different bases")
        nd = max(self.coef.ndim, other.coef.ndim)
        prod = _expand(self.coef[b.left], nd) * _expand(other.coef[b.right], nd)
        return Jet(np.add.reduceat(prod, b.starts, axis=0), b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return Jet(self.coef / np.asarray(other), self.basis)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = self.constant(1.0)
            for _ in range(p):
                out = out * self
            return out
        return power(self, p)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value!r})"

    # -- composition --------------------------------------------------
    def compose(self, derivs) -> Jet:
        """Apply a univariate function given its derivatives at the base value.

        ``derivs[k]`` is the k-th derivative at ``self.value``; at least
        ``order + 1`` entries are required.
        """
        if self.coef.ndim != 1:
            raise ValueError("compose needs a scalar jet")
        K = self.basis.order
        if len(derivs) < K + 1:
            raise ValueError(f"need {K + 1} derivatives, got {len(derivs)}")
        d = Jet(self.coef.copy(), self.basis)
        d.coef[0] = 0
        out = self.constant(derivs[0])
        term = self.constant(1.0)
        for k in range(1, K + 1):
            term = term * d
            out = out + term * (derivs[k] / math.factorial(k))
        return out


def _derivs(f, x0, order):
    return [f(k, x0) for k in range(order + 1)]


def reciprocal(x: Jet) -> Jet:
    x0 = x.value
    return x.compose([(-1) ** k * math.factorial(k) / x0 ** (k + 1) for k in range(x.order + 1)])


def power(x: Jet, p: float) -> Jet:
    x0 = x.value
    ds = []
    coeff = 1.0
    for k in range(x.order + 1):
        ds.append(coeff * x0 ** (p - k))
        coeff *= (p - k)
    return x.compose(ds)


def sqrt(x: Jet) -> Jet:
    return power(x, 0.5)


def exp(x: Jet) -> Jet:
    e = np.exp(x.value)
    return x.compose([e] * (x.order + 1))


def log(x: Jet) -> Jet:
    x0 = x.value
    return x.compose([np.log(x0)] + [(-1) ** (k - 1) * math.factorial(k - 1) / x0 ** k
                                     for k in range(1, x.order + 1)])


def sin(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    return x.compose([s, c, -s, -c][: x.order + 1])


def cos(x: Jet) -> Jet:
    s, c = np.sin(x.value), np.cos(x.value)
    return x.compose([c, -s, -c, s][: x.order + 1])


def sinh(x: Jet) -> Jet:
    s, c = np.sinh(x.value), np.cosh(x.value)
    return x.compose([s, c, s, c][: x.order + 1])


def cosh(x: Jet) -> Jet:
    s, c = np.sinh(x.value), np.cosh(x.value)
    return x.compose([c, s, c, s][: x.order + 1])


def tanh(x: Jet) -> Jet:
    t = np.tanh(x.value)
    s = 1 - t * t
    return x.compose([t, s, -2 * t * s, -2 * s * (1 - 3 * t * t)][: x.order + 1])


def arctan(x: Jet) -> Jet:
    x0 = x.value
    q = 1 + x0 * x0
    return x.compose([np.arctan(x0), 1 / q, -2 * x0 / q ** 2, (6 * x0 ** 2 - 2) / q ** 3][: x.order + 1])


def cis(x: Jet) -> Jet:
    """exp(i x) for a real jet."""
    return exp(1j * x)
