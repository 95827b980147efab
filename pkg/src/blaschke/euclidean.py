"""Classical submanifold invariants computed from chart jets.

Tensors carry coordinate indices; an ambient vector index, when present,
comes first.  Curvature uses ``R(X,Y) = [D_X, D_Y] - D_[X,Y]`` and
``R_ijkl = <R(d_i, d_j) d_k, d_l>``, so a unit sphere has ``R_ijji = +1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jets as J
from .conformal import sigma_map, tau_map
from .errors import ConfigurationError, ImmersionDegeneracyError, JetOrderError
from .jets import einsum
from .lorentz import lower, signs

PIVOT_TOL = 1e-8


def gram_schmidt(vectors, gram=None, sig=None, tol=PIVOT_TOL, skip=False):
    """Orthonormalize ``vectors`` in order.

    Inner products use the Gram matrix ``gram`` (vectors are coefficient
    arrays) or the diagonal metric ``sig`` (vectors are ambient arrays).
    Dependent candidates raise unless ``skip`` is set, in which case they are
    dropped.  Each vector is orthogonalized twice for stability.
    """
    def dot(u, v):
        if gram is not None:
            return float(u @ gram @ v)
        return float(np.dot(u * sig, v))

    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        scale = np.sqrt(abs(dot(w, w))) or 1.0
        for _ in range(2):
            for b in basis:
                w = w - dot(b, w) * b
        norm2 = dot(w, w)
        if norm2 <= (tol * scale) ** 2:
            if skip:
                continue
            raise ImmersionDegeneracyError("Jacobian is rank deficient at this point")
        basis.append(w / np.sqrt(norm2))
    return basis


def complete_normals(proj, sig, count, tol=PIVOT_TOL):
    """Orthonormal normals from the projected ambient standard basis.

    Each step takes the candidate with the largest remaining component (first
    index on ties); candidates below ``tol`` are never used.
    """
    cands = [proj @ e for e in np.eye(len(sig))]
    basis = []
    while len(basis) < count:
        resid = []
        for c in cands:
            w = c.copy()
            for _ in range(2):
                for b in basis:
                    w = w - np.dot(b * sig, w) * b
            resid.append(w)
        norms = [np.sqrt(max(np.dot(w * sig, w), 0.0)) for w in resid]
        best = int(np.argmax(norms))
        if norms[best] <= tol:
            break
        basis.append(resid[best] / norms[best])
    return basis


def orthonormal_coframe(metric):
    """Columns are the coordinate components of a Gram-Schmidt frame of ``metric``."""
    m = len(metric)
    return np.stack(gram_schmidt(np.eye(m), gram=metric), axis=1)


def levi_civita(g):
    """Christoffel symbols ``Gam[c, a, b]`` of a metric jet ``g[a, b]``."""
    ginv = J.inv(g)
    dg = g.grad()
    lowered = (dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)) * 0.5
    return einsum("cd,dab->cab", ginv, lowered)


def curvature(g):
    """Christoffel symbols, Riemann ``R_ijkl``, Ricci and scalar curvature jets."""
    if g.order < 2:
        raise JetOrderError("curvature needs the metric to second order")
    ginv = J.inv(g)
    gam = levi_civita(g)
    dgam = gam.grad()
    rup = (dgam.transpose(0, 3, 1, 2) - dgam.transpose(0, 1, 3, 2)
           + einsum("qip,pjk->qijk", gam, gam) - einsum("qjp,pik->qijk", gam, gam))
    riem = einsum("lq,qijk->ijkl", g, rup)
    ric = einsum("jk,ijkl->il", ginv, riem)
    scal = einsum("il,il->", ginv, ric)
    return gam, riem, ric, scal


@dataclass(frozen=True)
class EuclideanData:
    """Frames, fundamental forms and intrinsic curvature at one chart point.

    ``h[alpha, i, j]`` and ``H[alpha]`` are taken in the orthonormal frames;
    the connection and curvature arrays carry chart indices.
    """

    position: np.ndarray
    metric: np.ndarray
    frame_coeffs: np.ndarray
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    h: np.ndarray
    H: np.ndarray
    christoffel: np.ndarray
    riemann: Optional[np.ndarray]
    ricci: Optional[np.ndarray]
    scalar: Optional[float]
    lorentzian: bool = False

    @property
    def m(self):
        return self.tangent_frame.shape[0]

    @property
    def p(self):
        return self.normal_frame.shape[0]

    def shape_operator_eigenvalues(self):
        """Principal curvatures per normal direction, ascending."""
        return [np.linalg.eigvalsh(self.h[a]) for a in range(self.p)]


class SubmanifoldJets:
    """Jets of the first and second fundamental forms of a chart map.

    ``x`` is the chart jet; ``spec`` fixes the model space.  The model-space
    normal bundle excludes the position vector for spheres and hyperboloids.
    """

    def __init__(self, x, spec):
        if x.order < 2:
            raise JetOrderError("second fundamental form needs a jet of order >= 2")
        if x.shape != (spec.output_dim,):
            raise ConfigurationError(
                f"jet has {x.shape} components, {spec.family} needs {spec.output_dim}")
        self.spec = spec
        self.m = spec.dim_intrinsic
        self.x = x
        self.sig = signs(spec.output_dim, spec.lorentzian)
        self.curved = spec.ambient != "euclidean"
        self.pos_norm = (-1.0 if spec.lorentzian else 1.0) * spec.radius ** 2

        self.dx = x.grad()
        self.ddx = self.dx.grad()
        self.g = einsum("ia,ib->ab", lower(self.dx, self.sig), self.dx)
        if np.linalg.matrix_rank(self.g.value, tol=PIVOT_TOL * np.abs(self.g.value).max()) < self.m:
            raise ImmersionDegeneracyError("Jacobian is rank deficient at this point")
        self.ginv = J.inv(self.g)
        tang = einsum("id,iab->dab", lower(self.dx, self.sig), self.ddx)
        self.gamma = einsum("cd,dab->cab", self.ginv, tang)
        ii = self.ddx - einsum("ic,cab->iab", self.dx, self.gamma)
        if self.curved:
            radial = einsum("i,iab->ab", lower(x, self.sig), self.ddx) * (1.0 / self.pos_norm)
            ii = ii - einsum("i,ab->iab", x, radial)
        self.II = ii
        self.Hvec = einsum("ab,iab->i", self.ginv, ii) * (1.0 / self.m)
        ii_up = einsum("ca,iab->icb", self.ginv, ii)
        ii_up = einsum("icb,bd->icd", ii_up, self.ginv)
        self.h_sq = einsum("iab,iab->", lower(ii, self.sig), ii_up)
        self.H_sq = einsum("i,i->", lower(self.Hvec, self.sig), self.Hvec)

    def normal_projector(self):
        """Jet of the matrix projecting ambient vectors onto the normal bundle."""
        n = len(self.sig)
        tang = einsum("ic,cd->id", self.dx, self.ginv)
        proj = J.Jet.constant(np.eye(n), self.x.space) - einsum(
            "id,jd->ij", tang, lower(self.dx, self.sig))
        if self.curved:
            proj = proj - einsum("i,j->ij", self.x, lower(self.x, self.sig)) * (1.0 / self.pos_norm)
        return proj

    def project_normal(self, v):
        """Normal part of an ambient vector field jet ``v[i, ...]``."""
        rank = len(v.shape)
        letters = "pqrstuvw"[: rank - 1]
        comps = einsum(f"id,i{letters}->d{letters}", lower(self.dx, self.sig), v)
        out = v - einsum(f"ic,c{letters}->i{letters}", self.dx,
                         einsum(f"cd,d{letters}->c{letters}", self.ginv, comps))
        if self.curved:
            radial = einsum(f"i,i{letters}->{letters}", lower(self.x, self.sig), v)
            out = out - einsum(f"i,{letters}->i{letters}", self.x, radial) * (1.0 / self.pos_norm)
        return out

    def frames(self):
        """Tangent frame coefficients and ambient tangent/normal frames at the point."""
        coeffs = orthonormal_coframe(self.g.value)
        tangent = (self.dx.value @ coeffs).T
        normals = complete_normals(self.normal_projector().value, self.sig, self.spec.codim)
        p = self.spec.codim
        if len(normals) != p:
            raise ConfigurationError(
                f"normal completion found {len(normals)} directions, expected {p}")
        return coeffs, tangent, np.array(normals).reshape(p, len(self.sig))


def euclidean_data(jet, spec):
    """Frames, second fundamental form and induced curvature at the jet's base point."""
    geo = SubmanifoldJets(jet, spec)
    coeffs, tangent, normal = geo.frames()
    ii = np.einsum("iab,ak,bl->ikl", geo.II.value, coeffs, coeffs)
    h = np.einsum("ai,ikl->akl", normal * geo.sig, ii)
    H = np.einsum("ai,i->a", normal * geo.sig, geo.Hvec.value)
    if jet.order >= 3:
        gam, riem, ric, scal = curvature(geo.g)
        riem, ric, scal = riem.value, ric.value, float(scal.value)
    else:
        gam = levi_civita(geo.g)
        riem = ric = scal = None
    return EuclideanData(
        position=jet.value.copy(), metric=geo.g.value.copy(), frame_coeffs=coeffs,
        tangent_frame=tangent, normal_frame=normal, h=h, H=H,
        christoffel=gam.value, riemann=riem, ricci=ric, scalar=scal,
        lorentzian=spec.lorentzian)


def induced_curvature(jet, lorentzian=False):
    """Connection and curvature of the metric induced by a chart jet."""
    if jet.order < 3:
        raise JetOrderError("induced curvature needs a jet of order >= 3")
    sig = signs(jet.shape[0], lorentzian)
    dx = jet.grad()
    g = einsum("ia,ib->ab", lower(dx, sig), dx)
    gam, riem, ric, scal = curvature(g)
    return gam.value, riem.value, ric.value, float(scal.value)


def gauss_residual(data, curvature_const):
    """Max deviation from the Gauss equation of a space form, in the frame."""
    m = data.m
    coeffs = data.frame_coeffs
    riem = np.einsum("abcd,ai,bj,ck,dl->ijkl", data.riemann, coeffs, coeffs, coeffs, coeffs)
    d = np.eye(m)
    expected = (np.einsum("ail,ajk->ijkl", data.h, data.h)
                - np.einsum("aik,ajl->ijkl", data.h, data.h)
                + curvature_const * (np.einsum("il,jk->ijkl", d, d)
                                     - np.einsum("ik,jl->ijkl", d, d)))
    return float(np.max(np.abs(riem - expected)))


__all__ = [
    "EuclideanData", "SubmanifoldJets", "euclidean_data", "induced_curvature",
    "gauss_residual", "gram_schmidt", "complete_normals", "sigma_map", "tau_map",
]
