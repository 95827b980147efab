"""Truncated multivariate Taylor series ("jets") with tensor values.

A :class:`Jet` stores the Taylor coefficients of a tensor valued function of
``dim`` variables around a base point, truncated at total degree ``order``.
The coefficient of a multi-index ``alpha`` is ``d^alpha f / alpha!``.
Coefficients are kept in graded lexicographic order, so the jet of a lower
order is a prefix of the coefficient array.

Arithmetic is exact up to rounding: products are Leibniz (Cauchy)
convolutions and elementary functions are composed through their univariate
Taylor series.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, JetOrderError

__all__ = [
    "Jet",
    "JetSpace",
    "jet_space",
    "variables",
    "stack",
    "einsum",
    "inv",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "exp",
    "log",
    "sqrt",
    "power",
    "as_array",
]


def _compositions(total, parts):
    """Multi-indices of length ``parts`` summing to ``total``, lex descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class JetSpace:
    """Index bookkeeping for jets of a given dimension and order."""

    dim: int
    order: int
    indices: tuple
    position: dict
    factorials: np.ndarray
    degrees: np.ndarray
    pair_left: np.ndarray
    pair_right: np.ndarray
    pair_starts: np.ndarray
    diff_maps: tuple

    @property
    def size(self):
        return len(self.indices)


@functools.lru_cache(maxsize=None)
def jet_space(dim, order):
    if dim < 1:
        raise ConfigurationError(f"jet dimension must be positive, got {dim}")
    if order < 0:
        raise JetOrderError(f"jet order must be non-negative, got {order}")
    indices = tuple(
        alpha for deg in range(order + 1) for alpha in _compositions(deg, dim)
    )
    position = {alpha: k for k, alpha in enumerate(indices)}
    factorials = np.array(
        [math.prod(math.factorial(a) for a in alpha) for alpha in indices], float
    )
    degrees = np.array([sum(alpha) for alpha in indices])

    # Pairs (i, j) contributing to coefficient k, grouped by k so that
    # np.add.reduceat can sum each group; k = 0 always has the pair (0, 0).
    left, right = [], []
    for k, gamma in enumerate(indices):
        for i, alpha in enumerate(indices):
            if degrees[i] > degrees[k]:
                break
            beta = tuple(g - a for g, a in zip(gamma, alpha))
            if min(beta) < 0:
                continue
            left.append(i)
            right.append(position[beta])
    left = np.array(left)
    right = np.array(right)
    sums = np.array(
        [position[tuple(a + b for a, b in zip(indices[i], indices[j]))]
         for i, j in zip(left, right)]
    )
    starts = np.flatnonzero(np.r_[True, np.diff(sums) != 0])

    diff_maps = []
    if order > 0:
        lower = {alpha: k for k, alpha in enumerate(
            a for deg in range(order) for a in _compositions(deg, dim))}
        for var in range(dim):
            src, dst, fac = [], [], []
            for k, alpha in enumerate(indices):
                if alpha[var] == 0:
                    continue
                beta = alpha[:var] + (alpha[var] - 1,) + alpha[var + 1:]
                src.append(k)
                dst.append(lower[beta])
                fac.append(alpha[var])
            diff_maps.append((np.array(src), np.array(dst), np.array(fac, float)))
    return JetSpace(dim, order, indices, position, factorials, degrees,
                    left, right, starts, tuple(diff_maps))


class Jet:
    """Tensor valued truncated Taylor series.

    ``coeffs`` has shape ``(space.size, *shape)``.
    """

    __slots__ = ("space", "coeffs")
    __array_ufunc__ = None  # make ndarray <op> Jet dispatch to Jet

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != space.size:
            raise ConfigurationError(
                f"expected {space.size} coefficients, got {coeffs.shape[0]}")
        self.space = space
        self.coeffs = coeffs

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, space):
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros((space.size,) + value.shape)
        coeffs[0] = value
        return cls(space, coeffs)

    # -- basic properties ---------------------------------------------------
    @property
    def dim(self):
        return self.space.dim

    @property
    def order(self):
        return self.space.order

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @property
    def value(self):
        return self.coeffs[0]

    def coefficient(self, alpha):
        alpha = tuple(alpha)
        if alpha not in self.space.position:
            raise JetOrderError(f"multi-index {alpha} is not stored in a jet of order "
                                f"{self.order} in {self.dim} variables")
        return self.coeffs[self.space.position[alpha]]

    def derivative(self, alpha):
        """Partial derivative ``d^alpha f`` at the base point."""
        alpha = tuple(alpha)
        return self.coefficient(alpha) * self.space.factorials[self.space.position[alpha]]

    def __repr__(self):
        return f"Jet(dim={self.dim}, order={self.order}, shape={self.shape})"

    # -- structural ---------------------------------------------------------
    def truncate(self, order):
        if order > self.order:
            raise JetOrderError(
                f"cannot raise jet order from {self.order} to {order}")
        space = jet_space(self.dim, order)
        return Jet(space, self.coeffs[: space.size])

    def diff(self, var):
        """Partial derivative with respect to variable ``var`` as a jet."""
        if self.order == 0:
            raise JetOrderError("cannot differentiate an order-0 jet")
        space = jet_space(self.dim, self.order - 1)
        src, dst, fac = self.space.diff_maps[var]
        coeffs = np.zeros((space.size,) + self.shape)
        fac = fac.reshape((-1,) + (1,) * len(self.shape))
        coeffs[dst] = self.coeffs[src] * fac
        return Jet(space, coeffs)

    def grad(self):
        """Jet of the gradient; the derivative axis is appended last."""
        parts = [self.diff(a).coeffs for a in range(self.dim)]
        return Jet(jet_space(self.dim, self.order - 1), np.stack(parts, axis=-1))

    def __getitem__(self, index):
        if not isinstance(index, tuple):
            index = (index,)
        return Jet(self.space, self.coeffs[(slice(None),) + index])

    def transpose(self, *axes):
        axes = (0,) + tuple(a + 1 for a in axes)
        return Jet(self.space, self.coeffs.transpose(axes))

    def sum(self, axis=None):
        if axis is None:
            axis = tuple(range(len(self.shape)))
        if isinstance(axis, int):
            axis = (axis,)
        return Jet(self.space, self.coeffs.sum(axis=tuple(a + 1 for a in axis)))

    def reshape(self, *shape):
        return Jet(self.space, self.coeffs.reshape((self.space.size,) + shape))

    # -- arithmetic ---------------------------------------------------------
    def _align(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ConfigurationError("jets over different variable counts")
            order = min(self.order, other.order)
            a = self if self.order == order else self.truncate(order)
            b = other if other.order == order else other.truncate(order)
            return a, b
        return self, None

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.space, _bcast_add(a.coeffs, b.coeffs))
        other = np.asarray(other, dtype=float)
        const = np.zeros((self.space.size,) + other.shape)
        const[0] = other
        return Jet(self.space, _bcast_add(self.coeffs, const))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            sp = a.space
            ca, cb = _match_rank(a.coeffs, b.coeffs)
            prod = ca[sp.pair_left] * cb[sp.pair_right]
            return Jet(sp, np.add.reduceat(prod, sp.pair_starts, axis=0))
        other = np.asarray(other, dtype=float)
        ca, cb = _match_rank(self.coeffs, other[None])
        return Jet(self.space, ca * cb)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * power(other, -1.0)
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return power(self, -1.0) * other

    def __pow__(self, exponent):
        if isinstance(exponent, int) and exponent >= 0:
            result = Jet.constant(np.ones(self.shape), self.space)
            for _ in range(exponent):
                result = result * self
            return result
        return power(self, float(exponent))

    def __matmul__(self, other):
        return einsum("ij,jk->ik" if _rank(other) == 2 else "ij,j->i", self, other)

    def __rmatmul__(self, other):
        return einsum("ij,jk->ik" if _rank(self) == 2 else "ij,j->i", other, self)


def _rank(x):
    return len(x.shape) if isinstance(x, Jet) else np.ndim(x)


def _match_rank(ca, cb):
    """Insert unit axes after the coefficient axis so tensor parts broadcast."""
    ra, rb = ca.ndim, cb.ndim
    if ra < rb:
        ca = ca.reshape(ca.shape[:1] + (1,) * (rb - ra) + ca.shape[1:])
    elif rb < ra:
        cb = cb.reshape(cb.shape[:1] + (1,) * (ra - rb) + cb.shape[1:])
    return ca, cb


def _bcast_add(ca, cb):
    ca, cb = _match_rank(ca, cb)
    return ca + cb


def as_array(x):
    """Base point value of a jet, or the array itself."""
    return x.value if isinstance(x, Jet) else np.asarray(x, dtype=float)


def variables(point, order):
    """Jets of the coordinate functions ``u_i`` expanded at ``point``."""
    point = np.asarray(point, dtype=float)
    space = jet_space(len(point), order)
    out = []
    for i, value in enumerate(point):
        coeffs = np.zeros(space.size)
        coeffs[0] = value
        if order > 0:
            unit = tuple(1 if j == i else 0 for j in range(len(point)))
            coeffs[space.position[unit]] = 1.0
        out.append(Jet(space, coeffs))
    return out


def stack(items, axis=0):
    """Stack jets and plain numbers along a new tensor axis.

    With no jet among ``items`` the result is a plain ndarray.
    """
    jets = [x for x in items if isinstance(x, Jet)]
    if not jets:
        return np.stack([np.asarray(x, dtype=float) for x in items], axis=axis)
    order = min(j.order for j in jets)
    space = jet_space(jets[0].dim, order)
    shape = jets[0].shape
    parts = []
    for x in items:
        if isinstance(x, Jet):
            parts.append(x.truncate(order).coeffs if x.order != order else x.coeffs)
        else:
            parts.append(Jet.constant(np.broadcast_to(x, shape), space).coeffs)
    if axis < 0:
        axis += len(shape) + 1
    return Jet(space, np.stack(parts, axis=axis + 1))


def einsum(subscripts, a, b):
    """Two-operand ``np.einsum`` where either operand may be a jet.

    Subscripts must be explicit (no ellipsis) and must not use ``Z``.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._align(b)
        sp = a.space
        prod = np.einsum(f"Z{sa},Z{sb}->Z{out}",
                         a.coeffs[sp.pair_left], b.coeffs[sp.pair_right])
        return Jet(sp, np.add.reduceat(prod, sp.pair_starts, axis=0))
    if isinstance(a, Jet):
        return Jet(a.space, np.einsum(f"Z{sa},{sb}->Z{out}", a.coeffs, np.asarray(b, float)))
    if isinstance(b, Jet):
        return Jet(b.space, np.einsum(f"{sa},Z{sb}->Z{out}", np.asarray(a, float), b.coeffs))
    return np.einsum(subscripts, a, b)


# -- elementary functions --------------------------------------------------

def _compose(x, taylor):
    """Evaluate ``f(x)`` given ``taylor(a0, n) = [f^(k)(a0)/k!, k = 0..n]``."""
    a0 = x.value
    series = taylor(a0, x.order)
    delta = x - a0
    result = Jet.constant(series[0], x.space)
    term = None
    for k in range(1, x.order + 1):
        term = delta if term is None else term * delta
        result = result + term * series[k]
    return result


def _sin_series(a0, n):
    s, c = np.sin(a0), np.cos(a0)
    cycle = [s, c, -s, -c]
    return [cycle[k % 4] / math.factorial(k) for k in range(n + 1)]


def _cos_series(a0, n):
    s, c = np.sin(a0), np.cos(a0)
    cycle = [c, -s, -c, s]
    return [cycle[k % 4] / math.factorial(k) for k in range(n + 1)]


def _sinh_series(a0, n):
    s, c = np.sinh(a0), np.cosh(a0)
    return [(s if k % 2 == 0 else c) / math.factorial(k) for k in range(n + 1)]


def _cosh_series(a0, n):
    s, c = np.sinh(a0), np.cosh(a0)
    return [(c if k % 2 == 0 else s) / math.factorial(k) for k in range(n + 1)]


def _exp_series(a0, n):
    e = np.exp(a0)
    return [e / math.factorial(k) for k in range(n + 1)]


def _log_series(a0, n):
    if np.any(a0 <= 0):
        raise ConfigurationError("log of a jet with non-positive value")
    out = [np.log(a0)]
    for k in range(1, n + 1):
        out.append((-1.0) ** (k + 1) / (k * a0 ** k))
    return out


def _power_series(p):
    def series(a0, n):
        out = [a0 ** p]
        coef = 1.0
        for k in range(1, n + 1):
            coef *= (p - k + 1) / k
            out.append(coef * a0 ** (p - k))
        return out
    return series


def _dispatch(np_func, series):
    def func(x):
        if isinstance(x, Jet):
            return _compose(x, series)
        return np_func(x)
    func.__name__ = np_func.__name__
    return func


sin = _dispatch(np.sin, _sin_series)
cos = _dispatch(np.cos, _cos_series)
sinh = _dispatch(np.sinh, _sinh_series)
cosh = _dispatch(np.cosh, _cosh_series)
exp = _dispatch(np.exp, _exp_series)
log = _dispatch(np.log, _log_series)


def power(x, p):
    if isinstance(x, Jet):
        if np.any(x.value <= 0) and not float(p).is_integer():
            raise ConfigurationError("fractional power of a non-positive jet")
        return _compose(x, _power_series(float(p)))
    return np.power(x, p)


def sqrt(x):
    if isinstance(x, Jet):
        if np.any(x.value <= 0):
            raise ConfigurationError("square root of a non-positive jet")
        return _compose(x, _power_series(0.5))
    return np.sqrt(x)


def inv(matrix):
    """Inverse of a square-matrix valued jet via a truncated Neumann series."""
    if not isinstance(matrix, Jet):
        return np.linalg.inv(matrix)
    base = np.linalg.inv(matrix.value)
    step = einsum("ij,jk->ik", -base, matrix - matrix.value)
    result = Jet.constant(base, matrix.space)
    term = Jet.constant(base, matrix.space)
    for _ in range(matrix.order):
        term = einsum("ij,jk->ik", step, term)
        result = result + term
    return result


def multi_indices(dim, order):
    """All multi-indices of total degree <= order in graded lex order."""
    return jet_space(dim, order).indices


def count_coefficients(dim, order):
    return math.comb(dim + order, order)

