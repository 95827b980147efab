"""Analytic immersion families and their jets.

Each family is an :class:`ImmersionSpec`: a chart map written once against
the dispatching functions of :mod:`blaschke.jets`, so the same code gives
plain values (float input) and Taylor jets (jet input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import jets as J
from .conformal import sigma_map, tau_map
from .errors import ConfigurationError, DomainError, NumericError
from .jets import Jet

AMBIENTS = ("sphere", "euclidean", "hyperbolic")
DEFAULT_ORDER = 5


@dataclass(frozen=True)
class ChartPoint:
    coords: tuple

    def __post_init__(self):
        coords = tuple(float(c) for c in np.atleast_1d(self.coords))
        if not all(math.isfinite(c) for c in coords):
            raise DomainError(f"chart point {coords} is not finite")
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)


@dataclass(frozen=True)
class ImmersionSpec:
    """A chart map ``M^m -> model space`` with its domain box.

    ``ambient`` is ``sphere`` (``S^n(radius)`` in ``R^{n+1}``), ``euclidean``
    (``R^n``) or ``hyperbolic`` (``H^n(-1/radius^2)`` in ``R^{n+1}_1``).
    """

    family: str
    params: Mapping
    ambient: str
    dim_intrinsic: int
    dim_ambient: int
    domain: tuple
    chart: Callable = field(compare=False, repr=False)
    radius: float = 1.0
    extras: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.ambient not in AMBIENTS:
            raise ConfigurationError(f"unknown ambient {self.ambient!r}")
        if self.radius <= 0:
            raise ConfigurationError("ambient radius must be positive")
        if len(self.domain) != self.dim_intrinsic:
            raise ConfigurationError("domain box does not match the intrinsic dimension")
        if any(not lo < hi for lo, hi in self.domain):
            raise ConfigurationError(f"empty domain box {self.domain}")
        if self.dim_intrinsic < 1 or self.dim_ambient < self.dim_intrinsic:
            raise ConfigurationError("dimensions must satisfy 1 <= m <= n")
        if self.ambient == "hyperbolic":
            for u in _probe_points(self.domain):
                if self.evaluate(u)[0] <= 0:
                    raise ConfigurationError(
                        f"hyperbolic family {self.family} has y0 <= 0 at {u.tolist()}")

    @property
    def output_dim(self):
        return self.dim_ambient if self.ambient == "euclidean" else self.dim_ambient + 1

    @property
    def codim(self):
        return self.dim_ambient - self.dim_intrinsic

    @property
    def lorentzian(self):
        return self.ambient == "hyperbolic"

    def contains(self, point):
        u = np.asarray(point, dtype=float)
        return len(u) == self.dim_intrinsic and all(
            lo < c < hi for c, (lo, hi) in zip(u, self.domain))

    def check_point(self, point):
        u = np.asarray(ChartPoint(point), dtype=float)
        if len(u) != self.dim_intrinsic:
            raise DomainError(
                f"{self.family} expects {self.dim_intrinsic} coordinates, got {len(u)}")
        if not self.contains(u):
            raise DomainError(f"point {u.tolist()} outside the {self.family} chart domain")
        return u

    def evaluate(self, point):
        return np.array([float(c) for c in self.chart(list(np.asarray(point, float)))])

    def describe(self):
        return {"family": self.family, "params": dict(self.params),
                "ambient": self.ambient, "radius": self.radius,
                "m": self.dim_intrinsic, "n": self.dim_ambient}


def _probe_points(domain):
    lo = np.array([d[0] for d in domain])
    hi = np.array([d[1] for d in domain])
    grid = np.linspace(0.01, 0.99, 5)
    mesh = np.stack(np.meshgrid(*([grid] * len(domain)), indexing="ij"), -1)
    return lo + mesh.reshape(-1, len(domain)) * (hi - lo) if len(domain) <= 3 else \
        lo + np.random.default_rng(0).uniform(0.01, 0.99, (64, len(domain))) * (hi - lo)


def jet_eval(spec, point, order=DEFAULT_ORDER):
    """Order-``order`` Taylor jet of the chart map of ``spec`` at ``point``."""
    if order < 0:
        raise ConfigurationError("jet order must be non-negative")
    u = spec.check_point(point)
    comps = spec.chart(J.variables(u, order))
    out = J.stack(list(comps))
    if not isinstance(out, Jet):
        out = Jet.constant(out, J.jet_space(len(u), order))
    return out


def fd_crosscheck(spec, point, order, step):
    """Central finite-difference estimate of the jet, up to order 2."""
    if order > 2 or order < 0:
        raise ConfigurationError("finite differences are only trusted up to order 2")
    if step <= 0:
        raise ConfigurationError("step must be positive")
    u = np.asarray(ChartPoint(point), dtype=float)
    if np.any(u + step == u) or np.any(u - step == u) or step * step == 0.0:
        raise NumericError(f"step {step} underflows the stencil at {u.tolist()}")
    f = spec.evaluate
    m = len(u)
    space = J.jet_space(m, order)
    f0 = f(u)
    coeffs = np.zeros((space.size, len(f0)))
    coeffs[0] = f0
    eye = np.eye(m) * step
    for k, alpha in enumerate(space.indices):
        deg = sum(alpha)
        if deg == 1:
            a = alpha.index(1)
            coeffs[k] = (f(u + eye[a]) - f(u - eye[a])) / (2 * step)
        elif deg == 2:
            if 2 in alpha:
                a = alpha.index(2)
                coeffs[k] = (f(u + eye[a]) - 2 * f0 + f(u - eye[a])) / step ** 2 / 2
            else:
                a, b = [i for i, v in enumerate(alpha) if v == 1]
                coeffs[k] = (f(u + eye[a] + eye[b]) - f(u + eye[a] - eye[b])
                             - f(u - eye[a] + eye[b]) + f(u - eye[a] - eye[b])) / (4 * step ** 2)
    return Jet(space, coeffs)


# -- chart building blocks -------------------------------------------------

def unit_sphere_chart(v):
    """Chart of the unit sphere ``S^k`` in ``R^{k+1}``: angle for k = 1, else sigma."""
    v = list(v)
    if len(v) == 1:
        return [J.cos(v[0]), J.sin(v[0])]
    return list(sigma_map(v))


def hyperboloid_chart(v):
    """Chart ``(sqrt(1+|v|^2), v)`` of the unit hyperboloid ``H^k``."""
    v = list(v)
    return [J.sqrt(1.0 + sum(c * c for c in v))] + v


def normalize(comps):
    comps = list(comps)
    scale = 1.0 / J.sqrt(sum(c * c for c in comps))
    return [c * scale for c in comps]


def _sphere_box(k):
    return ((-math.pi, math.pi),) if k == 1 else ((-2.0, 2.0),) * k


# -- built-in families -----------------------------------------------------

def circle():
    return ImmersionSpec("circle", {}, "euclidean", 1, 2, ((-math.pi, math.pi),),
                         lambda u: [J.cos(u[0]), J.sin(u[0])])


def identity(m=2):
    return ImmersionSpec("identity", {"m": m}, "euclidean", m, m,
                         ((-10.0, 10.0),) * m, lambda u: list(u))


def great_circle():
    return ImmersionSpec("great_circle", {}, "sphere", 1, 2, ((-math.pi, math.pi),),
                         lambda u: [J.cos(u[0]), J.sin(u[0]), 0.0])


def round_sphere(r=1.0, m=2):
    return ImmersionSpec("round_sphere", {"r": r, "m": m}, "euclidean", m, m + 1,
                         _sphere_box(m),
                         lambda u: [r * c for c in unit_sphere_chart(u)])


def small_sphere(r=0.5, m=2):
    if not 0 < r < 1:
        raise ConfigurationError("small sphere radius must lie in (0, 1)")
    height = math.sqrt(1 - r * r)
    return ImmersionSpec("small_sphere", {"r": r, "m": m}, "sphere", m, m + 1,
                         _sphere_box(m),
                         lambda u: [height] + [r * c for c in unit_sphere_chart(u)])


def hyperbolic_space(r=1.0, m=2):
    return ImmersionSpec("hyperbolic_space", {"r": r, "m": m}, "hyperbolic", m, m,
                         ((-2.0, 2.0),) * m,
                         lambda u: [r * c for c in hyperboloid_chart(u)], radius=r)


def clifford_torus():
    s = 1.0 / math.sqrt(2.0)
    return ImmersionSpec(
        "clifford", {}, "sphere", 2, 3, ((-math.pi, math.pi),) * 2,
        lambda u: [s * J.cos(u[0]), s * J.sin(u[0]), s * J.cos(u[1]), s * J.sin(u[1])])


def product_torus(k=1, l=1, a=0.6):
    """``S^k(a) x S^l(sqrt(1-a^2))`` in ``S^{k+l+1}``; minimal iff a^2 = k/(k+l)."""
    if not 0 < a < 1:
        raise ConfigurationError("product torus radius must lie in (0, 1)")
    b = math.sqrt(1 - a * a)

    def chart(u):
        return ([a * c for c in unit_sphere_chart(u[:k])]
                + [b * c for c in unit_sphere_chart(u[k:])])
    return ImmersionSpec("product_torus", {"k": k, "l": l, "a": a}, "sphere",
                         k + l, k + l + 1, _sphere_box(k) + _sphere_box(l), chart)


def ellipse_torus(a=1.3, b=0.8):
    """Radial projection of an elliptic torus; the Clifford torus when a = b = 1."""
    if a <= 0 or b <= 0:
        raise ConfigurationError("ellipse semi-axes must be positive")
    return ImmersionSpec(
        "ellipse_torus", {"a": a, "b": b}, "sphere", 2, 3, ((-math.pi, math.pi),) * 2,
        lambda u: normalize([a * J.cos(u[0]), b * J.sin(u[0]), J.cos(u[1]), J.sin(u[1])]))


def veronese():
    """Minimal Veronese surface in ``S^4`` in polar coordinates."""
    r3 = math.sqrt(3.0)

    def chart(u):
        st, ct = J.sin(u[0]), J.cos(u[0])
        x, y, z = st * J.cos(u[1]), st * J.sin(u[1]), ct
        return [r3 * y * z, r3 * x * z, r3 * x * y,
                0.5 * r3 * (x * x - y * y), 0.5 * (x * x + y * y - 2.0 * z * z)]
    return ImmersionSpec("veronese", {}, "sphere", 2, 4,
                         ((0.3, math.pi - 0.3), (-math.pi, math.pi)), chart)


def twisted_torus(a=0.9, b=0.4):
    """A generic codimension-2 torus in ``S^4`` with curved normal bundle."""
    return ImmersionSpec(
        "twisted_torus", {"a": a, "b": b}, "sphere", 2, 4, ((-math.pi, math.pi),) * 2,
        lambda u: normalize([J.cos(u[0]), J.sin(u[0]), a * J.cos(u[1]), a * J.sin(u[1]),
                             b * J.sin(u[0] + 2.0 * u[1])]))


def deformed_product(a=1.2, b=0.9, c=1.0):
    """Radial projection of an ellipse times a round 2-sphere, a 3-fold in ``S^4``."""
    def chart(u):
        sph = unit_sphere_chart(u[1:])
        return normalize([a * J.cos(u[0]), b * J.sin(u[0])] + [c * s for s in sph])
    return ImmersionSpec("deformed_product", {"a": a, "b": b, "c": c}, "sphere", 3, 4,
                         ((-math.pi, math.pi), (-2.0, 2.0), (-2.0, 2.0)), chart)


def sigma_cylinder(radius=0.7):
    """sigma applied to the round cylinder of the given radius in ``R^3``."""
    def chart(u):
        return list(sigma_map([radius * J.cos(u[0]), radius * J.sin(u[0]), u[1]]))
    return ImmersionSpec("sigma_cylinder", {"radius": radius}, "sphere", 2, 3,
                         ((-math.pi, math.pi), (-1.5, 1.5)), chart)


def tau_cylinder(radius=0.8):
    """tau applied to the equidistant tube ``H^1 x S^1`` of radius ``radius`` in ``H^3``."""
    big = math.sqrt(1.0 + radius * radius)

    def chart(u):
        y = [big * J.cosh(u[0]), big * J.sinh(u[0]),
             radius * J.cos(u[1]), radius * J.sin(u[1])]
        return list(tau_map(y, check=not isinstance(y[0], Jet)))
    return ImmersionSpec("tau_cylinder", {"radius": radius}, "sphere", 2, 3,
                         ((-1.0, 1.0), (-math.pi, math.pi)), chart)


FAMILIES = {
    "circle": circle,
    "identity": identity,
    "great_circle": great_circle,
    "round_sphere": round_sphere,
    "small_sphere": small_sphere,
    "hyperbolic_space": hyperbolic_space,
    "clifford": clifford_torus,
    "product_torus": product_torus,
    "ellipse_torus": ellipse_torus,
    "veronese": veronese,
    "twisted_torus": twisted_torus,
    "deformed_product": deformed_product,
    "sigma_cylinder": sigma_cylinder,
    "tau_cylinder": tau_cylinder,
}


def make_family(name, **params):
    try:
        factory = FAMILIES[name]
    except KeyError:
        raise ConfigurationError(f"unsupported family {name!r}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for family {name!r}: {exc}") from None
