"""Parameter algebra and assembly of the three-eigenvalue family LS(m, p, r, mu).

Rational inputs (ints, Fractions) are solved exactly.  ``B0`` is then stored
as ``q_a * sqrt(d)`` with rational ``q_a`` and a common rational radicand
``d``, so every algebraic identity can be checked without rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.optimize import brentq

from .errors import (ConfigurationError, DomainError, IncompatibleBlocksError,
                     IndeterminateMuError, InfeasibleBlocksError,
                     InfeasibleParametersError, InternalConsistencyError, ParameterError)
from .families import ImmersionSpec, _sphere_box, hyperboloid_chart, unit_sphere_chart

SIGN_CONVENTION = "first nonzero B0 entry positive"
R_TOL = 1e-12
B0_SQ_TOL = 1e-12
B0_SIGN_TOL = 1e-10
MU_SUM_TOL = 1e-8
MU_BAND = 1e-10
Q_TOL = 1e-12
ROOT_XTOL = 1e-14


def _is_exact(values):
    return all(isinstance(v, Rational) and not isinstance(v, bool) for v in values)


def _coerce(values, exact):
    return tuple(Fraction(v) if exact else float(v) for v in values)


def _check_m(m):
    if len(m) != 3 or any(int(a) != a or a < 1 for a in m):
        raise ParameterError(f"m must be three integers >= 1, got {list(m)}")
    return tuple(int(a) for a in m)


def _check_r_sq(r_sq, exact):
    if len(r_sq) != 3 or any(r <= 0 for r in r_sq):
        raise ParameterError(f"r_sq must be three positive numbers, got {list(map(float, r_sq))}")
    gap = r_sq[0] - r_sq[1] - r_sq[2]
    if (gap != 0) if exact else abs(gap) > R_TOL * max(1.0, float(r_sq[0])):
        raise ParameterError(f"r1^2 must equal r2^2 + r3^2 (defect {float(gap):.3g})")


def lambda_matrix(m):
    mt = sum(m)
    return [[(mt if a == b else 0) + m[b] for b in range(3)] for a in range(3)]


def lambda_rhs(m, r_sq):
    return (-m[0] / r_sq[0], m[1] / r_sq[1], m[2] / r_sq[2])


def _solve3(mat, rhs):
    """Gaussian elimination with partial pivoting; exact on Fractions."""
    a = [list(row) + [b] for row, b in zip(mat, rhs)]
    for col in range(3):
        piv = max(range(col, 3), key=lambda r: abs(a[r][col]))
        a[col], a[piv] = a[piv], a[col]
        for r in range(col + 1, 3):
            f = a[r][col] / a[col][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    out = [0, 0, 0]
    for r in (2, 1, 0):
        out[r] = (a[r][3] - sum(a[r][c] * out[c] for c in range(r + 1, 3))) / a[r][r]
    return tuple(out)


def solve_lambda(m, r_sq):
    """The unique ``lambda`` of the defining 3x3 system (determinant ``2 m^3``)."""
    m = _check_m(m)
    exact = _is_exact(r_sq)
    r_sq = _coerce(r_sq, exact)
    _check_r_sq(r_sq, exact)
    mat = lambda_matrix(m)
    if exact:
        mat = [[Fraction(v) for v in row] for row in mat]
    return _solve3(mat, lambda_rhs(m, r_sq))


@dataclass(frozen=True)
class B0Triple:
    """``B0_a = coeffs[a] * sqrt(radicand)``."""

    coeffs: tuple
    radicand: object

    @property
    def exact(self):
        return _is_exact(self.coeffs + (self.radicand,))

    @property
    def values(self):
        root = math.sqrt(float(self.radicand))
        return tuple(float(q) * root + 0.0 for q in self.coeffs)

    def square(self, a):
        return self.coeffs[a] ** 2 * self.radicand

    def product(self, a, b):
        return self.coeffs[a] * self.coeffs[b] * self.radicand

    def combination(self, weights):
        """``sum w_a B0_a`` as (rational coefficient, float value)."""
        coeff = sum(w * q for w, q in zip(weights, self.coeffs))
        return coeff, float(coeff) * math.sqrt(float(self.radicand))


def b0_squares(m, lam):
    """``(B0_a)^2`` from the even-permutation formula."""
    out = []
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        out.append(((m[b] + m[c]) * lam[a] + m[b] * lam[b] + m[c] * lam[c]) / m[a])
    return tuple(out)


def solve_B0(m, lam):
    """``B0`` with zero ``m``-weighted sum and ``B0_a B0_b = -(lam_a + lam_b)``.

    The common sign makes the first nonzero entry positive.
    """
    m = _check_m(m)
    exact = _is_exact(lam)
    lam = _coerce(lam, exact)
    sq = b0_squares(m, lam)
    if any(s < -B0_SQ_TOL for s in sq) or (exact and any(s < 0 for s in sq)):
        raise InfeasibleParametersError(
            f"negative (B0)^2 in {[float(s) for s in sq]}; no real B0 exists")
    zero = Fraction(0) if exact else 0.0
    thresh = 0 if exact else B0_SQ_TOL
    nonzero = [k for k in range(3) if sq[k] > thresh]
    if not nonzero:
        out = B0Triple((zero, zero, zero), zero)
    else:
        # exact pivots keep small radicands; floats pivot on the largest square
        lead = nonzero[0] if exact else max(nonzero, key=lambda k: sq[k])
        d = sq[lead]
        coeffs = [zero] * 3
        coeffs[lead] = Fraction(1) if exact else 1.0
        for a in range(3):
            if a != lead:
                coeffs[a] = -(lam[a] + lam[lead]) / d
        if coeffs[nonzero[0]] < 0:
            coeffs = [-q for q in coeffs]
        out = B0Triple(tuple(coeffs), d)
    _check_b0(m, lam, out)
    return out


def _check_b0(m, lam, b0):
    exact = b0.exact and _is_exact(lam)
    coeff, value = b0.combination(m)
    devs = [coeff * (0 if b0.radicand == 0 else 1) if exact else value]
    devs += [b0.square(a) - s for a, s in enumerate(b0_squares(m, lam))]
    devs += [b0.product(a, b) + lam[a] + lam[b] for a, b in ((0, 1), (0, 2), (1, 2))]
    bad = any(v != 0 for v in devs) if exact else max(abs(float(v)) for v in devs) > B0_SIGN_TOL
    if bad:
        raise InternalConsistencyError(
            f"B0 sign assignment violates the pair relations (deviations {[float(v) for v in devs]})")


@dataclass(frozen=True)
class LSParams:
    """Multiplicities, codimensions, squared radii, weights and derived data."""

    m: tuple
    p: tuple
    r_sq: tuple
    lam: tuple
    b0: B0Triple
    mu: tuple = None
    convention: str = SIGN_CONVENTION

    @classmethod
    def build(cls, m, p, r_sq, mu=None):
        m = _check_m(m)
        if len(p) != 3 or any(int(a) != a or a < 0 for a in p):
            raise ParameterError(f"p must be three integers >= 0, got {list(p)}")
        exact = _is_exact(r_sq)
        r_sq = _coerce(r_sq, exact)
        lam = solve_lambda(m, r_sq)
        b0 = solve_B0(m, lam)
        if mu is not None:
            mu = _coerce(mu, exact and _is_exact(mu))
            _check_mu(mu, MU_SUM_TOL)
        return cls(m, tuple(int(a) for a in p), r_sq, lam, b0, mu)

    @property
    def exact(self):
        return _is_exact(self.r_sq + self.lam) and self.b0.exact

    @property
    def dim(self):
        return sum(self.m)

    @property
    def codim(self):
        return sum(self.p) + 1

    @property
    def b0_values(self):
        return self.b0.values

    def Q(self):
        """``sum m_a (B0_a)^2 - (m-1)/m``, the common bracket of the scalar prescriptions."""
        mt = self.dim
        return sum(ma * self.b0.square(a) for a, ma in enumerate(self.m)) - Fraction(mt - 1, mt)

    def base_scalars(self):
        """Scalar curvatures of the model spaces of the three slots."""
        m, r = self.m, self.r_sq
        return (-m[0] * (m[0] - 1) / r[0], m[1] * (m[1] - 1) / r[1], m[2] * (m[2] - 1) / r[2])

    def required_scalars(self, mu=None):
        mu = self.mu if mu is None else mu
        if mu is None:
            raise ParameterError("weights mu are not set")
        q = self.Q()
        return tuple(b + w * q for b, w in zip(self.base_scalars(), mu))

    def distinct_count(self):
        """Number of distinct Blaschke eigenvalues (3 iff ``m3 r2^2 != m2 r3^2``)."""
        if self.exact:
            return len(set(self.lam))
        vals = sorted(float(v) for v in self.lam)
        scale = max(1.0, max(abs(v) for v in vals))
        return 1 + sum(1 for a, b in zip(vals, vals[1:]) if b - a > 1e-10 * scale)

    def with_mu(self, mu):
        return LSParams.build(self.m, self.p, self.r_sq, mu)

    def to_json(self):
        return {
            "m": list(self.m), "p": list(self.p),
            "r_sq": [float(v) for v in self.r_sq],
            "mu": None if self.mu is None else [float(v) for v in self.mu],
            "lambda": [float(v) for v in self.lam],
            "b0": list(self.b0.values),
            "convention": self.convention,
        }

    @classmethod
    def from_json(cls, doc):
        keys = {"m", "p", "r_sq", "mu", "lambda", "b0", "convention"}
        extra = set(doc) - keys
        if extra:
            raise ConfigurationError(f"unknown LSParams keys: {sorted(extra)}")
        out = cls.build(doc["m"], doc["p"], doc["r_sq"], doc.get("mu"))
        for key, ours in (("lambda", out.lam), ("b0", out.b0.values)):
            if key in doc and not np.allclose(doc[key], [float(v) for v in ours],
                                              rtol=0, atol=1e-10):
                raise InternalConsistencyError(f"stored {key} disagrees with the recomputed one")
        if doc.get("convention", SIGN_CONVENTION) != SIGN_CONVENTION:
            raise ConfigurationError(f"unsupported B0 convention {doc['convention']!r}")
        return out


def _check_mu(mu, sum_tol):
    if len(mu) != 3:
        raise ParameterError("mu must have three entries")
    if abs(sum(mu) - 1) > sum_tol:
        raise IncompatibleBlocksError(f"mu sums to {float(sum(mu))!r}, not 1")
    if any(w < -MU_BAND or w > 1 + MU_BAND for w in mu):
        raise InfeasibleBlocksError(f"mu {[float(w) for w in mu]} outside [0, 1]")


def lemma31_residuals(params):
    """``|LHS - RHS|`` of the fourteen parameter identities.

    Exact parameters give Fraction residuals (exactly zero when the algebra
    is right); the one identity linear in ``B0`` is exact through its
    rational coefficient.
    """
    m, r, lam, b0 = params.m, params.r_sq, params.lam, params.b0
    mt = params.dim
    sq = [b0.square(a) for a in range(3)]
    wsum = sum(ma * la for ma, la in zip(m, lam))
    exact = params.exact

    def res(x):
        return abs(x) if exact else abs(float(x))

    out = {
        "radius_1": res(2 * lam[0] + sq[0] + 1 / r[0]),
        "radius_2": res(2 * lam[1] + sq[1] - 1 / r[1]),
        "radius_3": res(2 * lam[2] + sq[2] - 1 / r[2]),
    }
    signs = (-1, 1, 1)
    for a in range(3):
        lhs = signs[a] * (m[a] - 1) / r[a] + sq[a]
        mid = sum((mt - 2 if b == a else 0) * lam[b] + m[b] * lam[b] for b in range(3))
        out[f"block_{a + 1}_expanded"] = res(lhs - mid)
        out[f"block_{a + 1}_compact"] = res(lhs - ((mt - 2) * lam[a] + wsum))
    scal = sum(signs[a] * m[a] * (m[a] - 1) / r[a] for a in range(3))
    out["scalar_sum"] = res(scal - sum((2 * m[a] * (mt - 1) - (mt + m[a])) * lam[a]
                                       for a in range(3)))
    out["b0_weighted_norm"] = res(sum(m[a] * sq[a] for a in range(3))
                                  - sum((mt + m[a]) * lam[a] for a in range(3)))
    coeff, value = b0.combination((-r[0], r[1], r[2]))
    out["b0_radius_linear"] = (Fraction(0) if exact and (coeff == 0 or b0.radicand == 0)
                               else abs(value))
    quad = sum(signs[a] * r[a] * sq[a] for a in range(3))
    lin = sum(signs[a] * r[a] * lam[a] for a in range(3))
    out["b0_radius_quadratic"] = res(quad - lin)
    out["lambda_radius"] = res(lin - 1)
    return out


def b0_relation_residuals(params):
    """Residuals of the defining B0 relations and the recovered radii."""
    m, lam, b0 = params.m, params.lam, params.b0
    out = {"b0_weighted_sum": abs(b0.combination(m)[1])}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        out[f"b0_pair_{a + 1}{b + 1}"] = abs(float(b0.product(a, b) + lam[a] + lam[b]))
    for a, s in enumerate(b0_squares(m, lam)):
        out[f"b0_square_{a + 1}"] = abs(float(b0.square(a) - s))
    signs = (-1, 1, 1)
    for a in range(3):
        denom = float(2 * lam[a] + b0.square(a))
        rec = signs[a] / denom if denom != 0 else math.inf
        out[f"radius_recovered_{a + 1}"] = abs(rec - float(params.r_sq[a]))
    return out


def derive_mu(params, block_scalars):
    """Weights ``mu`` realizing the given constant block scalar curvatures."""
    q = params.Q()
    if abs(float(q)) <= Q_TOL:
        raise IndeterminateMuError("bracket Q vanishes; mu is undetermined")
    exact = params.exact and _is_exact(block_scalars)
    if not exact:
        q = float(q)
    base = params.base_scalars()
    mu = tuple((s - b) / q for s, b in zip(block_scalars, base))
    if not exact:
        mu = tuple(float(w) + 0.0 for w in mu)
    _check_mu(mu, MU_SUM_TOL)
    return mu


# -- block catalog -----------------------------------------------------------

BLOCK_KINDS = ("totally-geodesic-hyperbolic", "totally-geodesic-sphere", "clifford-torus")


@dataclass(frozen=True)
class BlockSpec:
    """A minimal building block in the model space of its slot.

    Slot 1 lives in the hyperboloid of radius ``r_1``; slots 2 and 3 in the
    round spheres of radii ``r_2`` and ``r_3``.  ``k`` splits a Clifford
    torus as ``S^k x S^(m_a - k)``.
    """

    kind: str
    slot: int
    r_sq: float
    m: int
    k: int = 0
    _chart: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in BLOCK_KINDS:
            raise ConfigurationError(f"unknown block kind {self.kind!r}")
        if self.slot not in (1, 2, 3):
            raise ConfigurationError("block slot must be 1, 2 or 3")
        if (self.slot == 1) != (self.kind == "totally-geodesic-hyperbolic"):
            raise DomainError(f"{self.kind} cannot occupy slot {self.slot}")
        if self.r_sq <= 0 or self.m < 1:
            raise ConfigurationError("block radius and dimension must be positive")
        if self.kind == "clifford-torus" and not 1 <= self.k < self.m:
            raise ConfigurationError(f"Clifford split k={self.k} invalid for dimension {self.m}")

    @property
    def radius(self):
        return math.sqrt(float(self.r_sq))

    @property
    def dims(self):
        return (self.m, 1 if self.kind == "clifford-torus" else 0)

    @property
    def output_dim(self):
        return sum(self.dims) + 1

    @property
    def scalar_curvature(self):
        m, r = self.m, self.r_sq
        if self.kind == "totally-geodesic-hyperbolic":
            return -m * (m - 1) / r
        if self.kind == "totally-geodesic-sphere":
            return m * (m - 1) / r
        return m * (m - 2) / r

    @property
    def domain(self):
        if self.kind == "totally-geodesic-hyperbolic":
            return ((-2.0, 2.0),) * self.m
        if self.kind == "totally-geodesic-sphere":
            return _sphere_box(self.m)
        return _sphere_box(self.k) + _sphere_box(self.m - self.k)

    def chart(self, u):
        r = self.radius
        u = list(u)
        if self.kind == "totally-geodesic-hyperbolic":
            return [r * c for c in hyperboloid_chart(u)]
        if self.kind == "totally-geodesic-sphere":
            return [r * c for c in unit_sphere_chart(u)]
        a = math.sqrt(self.k * float(self.r_sq) / self.m)
        b = math.sqrt((self.m - self.k) * float(self.r_sq) / self.m)
        return ([a * c for c in unit_sphere_chart(u[:self.k])]
                + [b * c for c in unit_sphere_chart(u[self.k:])])

    def immersion(self):
        ambient = "hyperbolic" if self.slot == 1 else "sphere"
        return ImmersionSpec(f"block:{self.kind}", {"k": self.k}, ambient, self.m,
                             sum(self.dims), self.domain, self.chart, radius=self.radius)


def make_block(kind, slot, r_sq, m, k=None):
    if kind == "clifford-torus" and k is None:
        k = 1
    return BlockSpec(kind, slot, r_sq, m, k or 0)


def block_scalars(blocks):
    return tuple(b.scalar_curvature for b in blocks)


# -- assembly ----------------------------------------------------------------

def _check_blocks(blocks, params):
    if len(blocks) != 3 or [b.slot for b in blocks] != [1, 2, 3]:
        raise ConfigurationError("blocks must fill slots 1, 2, 3 in order")
    for b, ma, pa, r in zip(blocks, params.m, params.p, params.r_sq):
        if b.dims != (ma, pa):
            raise ConfigurationError(
                f"slot {b.slot} block has dims {b.dims}, parameters need {(ma, pa)}")
        if abs(float(b.r_sq) - float(r)) > R_TOL * max(1.0, float(r)):
            raise ConfigurationError(f"slot {b.slot} block radius^2 {b.r_sq} != {float(r)}")


def assemble_ls(blocks, params):
    """The immersion ``x = (y1, y2, y3) / y0`` of the product of the blocks.

    ``extras`` carries ``y0`` (the expected Moebius factor), the distinguished
    normal ``e_alpha0`` and the block ranges of the chart coordinates.
    """
    _check_blocks(blocks, params)
    mu = params.mu if params.mu is not None else derive_mu(params, block_scalars(blocks))
    required = params.required_scalars(mu)
    for b, s in zip(blocks, required):
        if abs(float(b.scalar_curvature) - float(s)) > MU_SUM_TOL * max(1.0, abs(float(s))):
            raise IncompatibleBlocksError(
                f"slot {b.slot} block has scalar curvature {float(b.scalar_curvature):.12g}, "
                f"weights need {float(s):.12g}")
    if params.mu is None:
        params = params.with_mu(mu)
    cuts = np.cumsum([0] + [b.m for b in blocks])
    bvals = params.b0.values

    def lifted(u):
        u = list(u)
        return [b.chart(u[cuts[i]:cuts[i + 1]]) for i, b in enumerate(blocks)]

    def chart(u):
        y1, y2, y3 = lifted(u)
        inv0 = 1.0 / y1[0]
        return [c * inv0 for c in y1[1:] + y2 + y3]

    def y0(u):
        return float(lifted(list(map(float, u)))[0][0])

    def e_alpha0(u):
        y1, y2, y3 = (np.array([float(c) for c in part]) for part in lifted(list(map(float, u))))
        x = np.concatenate([y1[1:], y2, y3]) / y1[0]
        return -np.concatenate([bvals[0] * y1[1:], bvals[1] * y2, bvals[2] * y3]) \
            + bvals[0] * y1[0] * x

    extras = {"y0": y0, "e_alpha0": e_alpha0, "params": params, "blocks": tuple(blocks),
              "block_ranges": tuple((int(cuts[i]), int(cuts[i + 1])) for i in range(3))}
    domain = sum((b.domain for b in blocks), ())
    return ImmersionSpec("ls", {"m": list(params.m), "p": list(params.p),
                                "r_sq": [float(r) for r in params.r_sq],
                                "mu": [float(w) for w in mu],
                                "kinds": [b.kind for b in blocks]},
                         "sphere", params.dim, params.dim + params.codim, domain, chart,
                         extras=extras)


def predicted_invariants(params):
    """Blaschke eigen-structure, B pattern along the distinguished normal, tr A."""
    groups = {}
    for la, ma in zip(params.lam, params.m):
        groups[la] = groups.get(la, 0) + ma
    if not params.exact:
        merged = []
        for la, ma in sorted(zip(map(float, params.lam), params.m)):
            if merged and abs(la - merged[-1][0]) <= 1e-10 * max(1.0, abs(la)):
                merged[-1] = (merged[-1][0], merged[-1][1] + ma)
            else:
                merged.append((la, ma))
        eig = merged
    else:
        eig = sorted(groups.items())
    return {
        "eigenvalues": [(float(v), k) for v, k in eig],
        "block_eigenvalues": [float(v) for v in params.lam],
        "multiplicities": list(params.m),
        "b_alpha0": list(params.b0.values),
        "alpha0_norm_sq": float(sum(ma * params.b0.square(a) for a, ma in enumerate(params.m))),
        "trace_A": float(sum(ma * la for ma, la in zip(params.m, params.lam))),
        "C": 0.0,
        "mixed_B": 0.0,
        "distinct": params.distinct_count(),
    }


# -- feasibility scan ----------------------------------------------------------

def _catalog_scalar(kind, m, r_sq):
    return BlockSpec(kind, 1 if kind == "totally-geodesic-hyperbolic" else 2, r_sq, m,
                     1 if kind == "clifford-torus" else 0).scalar_curvature


def compatibility_defect(m, kinds, r2_sq, r3_sq):
    """Catalog total scalar curvature minus the total the weights require.

    Zero exactly when some ``mu`` with unit sum reproduces the catalog
    scalars; ``nan`` where no real ``B0`` exists.
    """
    r_sq = (r2_sq + r3_sq, r2_sq, r3_sq)
    lam = solve_lambda(m, r_sq)
    if any(s < -B0_SQ_TOL for s in b0_squares(m, lam)):
        return math.nan
    mt = sum(m)
    q = sum((mt + ma) * la for ma, la in zip(m, lam)) - (mt - 1) / mt
    base = (-m[0] * (m[0] - 1) / r_sq[0], m[1] * (m[1] - 1) / r_sq[1],
            m[2] * (m[2] - 1) / r_sq[2])
    cat = sum(_catalog_scalar(k, ma, r) for k, ma, r in zip(kinds, m, r_sq))
    return cat - sum(base) - q


def _scan_one(m, p, kinds, r2_sq, grid, distinct):
    found = []
    vals = [compatibility_defect(m, kinds, r2_sq, x) for x in grid]
    for (x0, f0), (x1, f1) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if not (math.isfinite(f0) and math.isfinite(f1)):
            continue
        if f0 == 0:
            root = x0
        elif f0 * f1 < 0:
            root = brentq(lambda x: compatibility_defect(m, kinds, r2_sq, x), x0, x1,
                          xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
        else:
            continue
        if distinct and abs(m[2] * r2_sq - m[1] * root) <= 1e-9 * max(1.0, m[1] * root):
            continue
        try:
            params = LSParams.build(m, p, (r2_sq + root, r2_sq, root))
            blocks = tuple(make_block(k, a + 1, r, ma)
                           for a, (k, r, ma) in enumerate(zip(kinds, params.r_sq, m)))
            _check_blocks(blocks, params)
            mu = derive_mu(params, block_scalars(blocks))
        except (ParameterError, ConfigurationError, DomainError):
            continue
        found.append(params.with_mu(mu))
    return found


def feasibility_scan(m, p, kinds, r3sq_range, steps=200, r2sq_values=(2.0,), distinct=False,
                     workers=None):
    """Feasible parameter sets over a grid of ``r3^2`` (and pinned ``r2^2`` values).

    Sign changes of :func:`compatibility_defect` are refined by a bracketing
    root finder; results come back in scan order.
    """
    m = _check_m(m)
    lo, hi = map(float, r3sq_range)
    if not (lo < hi) or steps < 2 or lo <= 0:
        return []
    if len(kinds) != 3:
        raise ConfigurationError("need one block kind per slot")
    grid = list(np.linspace(lo, hi, int(steps)))
    jobs = [float(v) for v in r2sq_values]
    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda r2: _scan_one(m, p, kinds, r2, grid, distinct), jobs))
    else:
        parts = [_scan_one(m, p, kinds, r2, grid, distinct) for r2 in jobs]
    return [item for part in parts for item in part]


def blocks_for(params, kinds, ks=None):
    ks = ks or (None, None, None)
    return tuple(make_block(kind, a + 1, params.r_sq[a], params.m[a], ks[a])
                 for a, kind in enumerate(kinds))
