"""Lorentzian inner product, the light cone and the group O+(n+1, 1).

Every signed inner product in the package goes through :func:`signs` and
:func:`lower`; no other module hard-codes the Lorentzian sign.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConeViolationError, ConfigurationError
from .jets import Jet, einsum

SCREEN_SAMPLES = 32


def signs(size, lorentzian):
    """Diagonal of the ambient metric: ``(-1, 1, ..., 1)`` or all ones."""
    s = np.ones(size)
    if lorentzian:
        s[0] = -1.0
    return s


def eta(size):
    return np.diag(signs(size, True))


def lower(u, sig):
    """Apply the diagonal metric ``sig`` along the first (ambient) axis of ``u``."""
    rank = len(u.shape)
    weights = np.reshape(sig, (len(sig),) + (1,) * (rank - 1))
    return u * weights


def inner(u, v, lorentzian=True):
    """``<u, v>`` for ambient vectors (arrays or jets) of equal length."""
    sig = signs(u.shape[0], lorentzian)
    if isinstance(u, Jet) or isinstance(v, Jet):
        return einsum("i,i->", lower(u, sig), v)
    return float(np.dot(np.asarray(u) * sig, np.asarray(v)))


def random_light_cone(size, rng, count):
    """``count`` future pointing null vectors in ``R^size_1``."""
    spatial = rng.standard_normal((count, size - 1))
    spatial /= np.linalg.norm(spatial, axis=1, keepdims=True)
    scale = rng.uniform(0.5, 2.0, size=(count, 1))
    return np.hstack([np.ones((count, 1)), spatial]) * scale


@dataclass(frozen=True)
class LorentzTransform:
    """An element of O+(n+1, 1) acting on ``R^{n+2}_1``."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 3:
            raise ConfigurationError("Lorentz transform must be a square matrix, size >= 3")
        object.__setattr__(self, "matrix", mat)
        defect = np.max(np.abs(mat.T @ eta(len(mat)) @ mat - eta(len(mat))))
        if defect > 1e-10:
            raise ConfigurationError(
                f"matrix does not preserve the Lorentzian product (defect {defect:.3g})")
        rng = np.random.default_rng(len(mat))
        images = random_light_cone(len(mat), rng, SCREEN_SAMPLES) @ mat.T
        if np.any(images[:, 0] <= 0):
            raise ConeViolationError("transform reverses the time orientation of the light cone")

    @property
    def size(self):
        return self.matrix.shape[0]

    def __call__(self, y):
        return self.matrix @ np.asarray(y, dtype=float)

    def __matmul__(self, other):
        return LorentzTransform(self.matrix @ other.matrix)

    @classmethod
    def identity(cls, size):
        return cls(np.eye(size))

    @classmethod
    def rotation(cls, rot):
        rot = np.asarray(rot, dtype=float)
        mat = np.eye(len(rot) + 1)
        mat[1:, 1:] = rot
        return cls(mat)

    @classmethod
    def boost(cls, direction, rapidity):
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        ch, sh = np.cosh(rapidity), np.sinh(rapidity)
        mat = np.eye(len(n) + 1)
        mat[0, 0] = ch
        mat[0, 1:] = sh * n
        mat[1:, 0] = sh * n
        mat[1:, 1:] += (ch - 1.0) * np.outer(n, n)
        return cls(mat)


def random_rotation(dim, rng):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_transform(size, rng, max_rapidity=1.0):
    """A random rotation composed with a boost of rapidity at most ``max_rapidity``."""
    rot = LorentzTransform.rotation(random_rotation(size - 1, rng))
    direction = rng.standard_normal(size - 1)
    rapidity = rng.uniform(0.0, max_rapidity)
    return rot @ LorentzTransform.boost(direction, rapidity)
