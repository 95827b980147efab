"""Moebius invariants of umbilic-free submanifolds of the unit sphere.

The Blaschke tensor ``A``, Moebius second fundamental form ``B`` and Moebius
form ``C`` come from their local expressions in terms of the Euclidean
second fundamental form and jets of ``log rho``.  Frame components are read
in the Moebius-orthonormal frame ``E_i = rho^-1 e_i`` obtained by
Gram-Schmidt of the chart basis, and in the Euclidean normal frame, which the
bundle isometry between the two normal bundles identifies with the Moebius
normal frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .eigen import cluster, jacobi_eigh
from .errors import ConeViolationError, ConfigurationError, JetOrderError, UmbilicPointError
from .euclidean import SubmanifoldJets, curvature, orthonormal_coframe
from .families import DEFAULT_ORDER, ImmersionSpec, jet_eval
from .jets import einsum
from .lorentz import LorentzTransform, lower, signs

UMBILIC_TOL = 1e-10
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class MoebiusData:
    """Moebius invariants at one point, in the frames described above."""

    rho: float
    Y: np.ndarray
    N: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    kappa: float

    @property
    def m(self):
        return self.A.shape[0]

    def trace_B(self):
        return np.einsum("aii->a", self.B)

    def norm_B_sq(self):
        return float(np.sum(self.B ** 2))


def moebius_factor(data, m, eps=UMBILIC_TOL, point=None):
    """``rho = sqrt(m/(m-1) (|h|^2 - m |H|^2))`` from Euclidean data."""
    gap = float(np.sum(data.h ** 2) - m * np.sum(data.H ** 2))
    if gap <= eps:
        raise UmbilicPointError(f"umbilic point (|h|^2 - m|H|^2 = {gap:.3g})", point)
    return float(np.sqrt(m / (m - 1) * gap))


def canonical_lift(rho, x):
    if rho <= 0:
        raise ConfigurationError("Moebius factor must be positive")
    return rho * np.concatenate([[1.0], np.asarray(x, dtype=float)])


def blaschke_eigen(A, cluster_tol=CLUSTER_TOL):
    """Clustered eigenvalues of ``A`` (ascending) as (value, multiplicity) pairs."""
    values, _ = jacobi_eigh(A)
    return cluster(values, cluster_tol)


class MoebiusJets:
    """All jets needed for the Moebius invariants of ``spec`` at ``point``.

    The jet order must be at least 4; the covariant derivative of ``A``
    needs order 5.
    """

    def __init__(self, spec, point, order=DEFAULT_ORDER, eps=UMBILIC_TOL):
        if spec.ambient != "sphere" or spec.radius != 1.0:
            raise ConfigurationError("Moebius invariants need an immersion into the unit sphere")
        if spec.dim_intrinsic < 2:
            raise ConfigurationError("Moebius invariants need intrinsic dimension >= 2")
        if order < 4:
            raise JetOrderError(f"Moebius invariants need jet order >= 4, got {order}")
        self.spec = spec
        self.point = spec.check_point(point)
        self.order = order
        x = jet_eval(spec, self.point, order)
        geo = SubmanifoldJets(x, spec)
        self.geo = geo
        m = self.m = geo.m
        self.p = spec.codim

        gap = geo.h_sq - geo.H_sq * m
        if gap.value <= eps:
            raise UmbilicPointError(
                f"umbilic point (|h|^2 - m|H|^2 = {float(gap.value):.3g})", self.point)
        rho2 = gap * (m / (m - 1))
        self.rho = J.sqrt(rho2)
        self.logrho = J.log(rho2) * 0.5
        dl = self.logrho.grad()
        g, ginv, II, H = geo.g, geo.ginv, geo.II, geo.Hvec

        hess = dl.grad() - einsum("cab,c->ab", geo.gamma, dl)
        dl_sq = einsum("ab,a->b", ginv, dl)
        dl_sq = einsum("b,b->", dl_sq, dl)
        h_dot_H = einsum("iab,i->ab", II, H)
        bracket = dl_sq + geo.H_sq - 1.0
        self.A = (einsum("a,b->ab", dl, dl) + h_dot_H - hess) - g * bracket * 0.5

        traceless = II - einsum("i,ab->iab", H, g)
        self.B = traceless * self.rho
        grad_l = einsum("bc,c->b", ginv, dl)
        dH = geo.project_normal(H.grad())
        self.C = (dH + einsum("iab,b->ia", traceless, grad_l)) * (-1.0 / self.rho)

        self.gM = g * rho2
        self.gM_inv = J.inv(self.gM)
        self.gamM, self.riemM, self.ricM, self.scalM = curvature(self.gM)
        gam = self.gamM

        if order >= 5:
            self.dA = (self.A.grad() - einsum("dca,db->abc", gam, self.A)
                       - einsum("dcb,ad->abc", gam, self.A))
        else:
            self.dA = None
        dB = geo.project_normal(self.B.grad())
        self.dB = (dB - einsum("dca,idb->iabc", gam, self.B)
                   - einsum("dcb,iad->iabc", gam, self.B))
        ddB = geo.project_normal(self.dB.grad())
        self.ddB = (ddB - einsum("eda,iebc->iabcd", gam, self.dB)
                    - einsum("edb,iaec->iabcd", gam, self.dB)
                    - einsum("edc,iabe->iabcd", gam, self.dB))
        dC = geo.project_normal(self.C.grad())
        self.dC = dC - einsum("dba,id->iab", gam, self.C)

        proj = geo.normal_projector()
        dP = proj.grad()
        comm = einsum("ijb,jkc->ikbc", dP, dP)
        comm = comm - comm.transpose(0, 1, 3, 2)
        self.Rperp = einsum("ij,jkbc->ikbc", proj, einsum("jlbc,lk->jkbc", comm, proj))

        sig = signs(len(geo.sig) + 1, True)
        self.lsig = sig
        ycomps = [self.rho] + [self.rho * x[i] for i in range(x.shape[0])]
        self.Y = J.stack(ycomps)
        dY = self.Y.grad()
        ddY = dY.grad()
        self.dY = dY
        self.lapY = einsum("ab,iab->i", self.gM_inv, ddY - einsum("cab,ic->iab", gam, dY))

        self.frame = orthonormal_coframe(self.gM.value)
        _, _, normals = geo.frames()
        self.normals = normals

    # -- frame components --------------------------------------------------
    def _tan(self, arr, axes):
        """Contract the listed chart axes of ``arr`` with the Moebius frame."""
        for ax in axes:
            arr = np.moveaxis(np.tensordot(arr, self.frame, axes=([ax], [0])), -1, ax)
        return arr

    def _nor(self, arr):
        """Normal frame components of an ambient-vector-first array."""
        return np.tensordot(self.normals, arr, axes=([1], [0]))

    @property
    def kappa(self):
        return float(self.scalM.value) / (self.m * (self.m - 1))

    def A_frame(self):
        return self._tan(self.A.value, (0, 1))

    def B_frame(self):
        return self._nor(self._tan(self.B.value, (1, 2)))

    def B_ambient(self):
        """``B(E_i, E_j)`` as ambient vectors, shape (n+1, m, m)."""
        return self._tan(self.B.value, (1, 2))

    def C_frame(self):
        return self._nor(self._tan(self.C.value, (1,)))

    def dA_frame(self):
        if self.dA is None:
            raise JetOrderError("the covariant derivative of A needs jet order >= 5")
        return self._tan(self.dA.value, (0, 1, 2))

    def dB_frame(self):
        return self._nor(self._tan(self.dB.value, (1, 2, 3)))

    def ddB_frame(self):
        return self._nor(self._tan(self.ddB.value, (1, 2, 3, 4)))

    def dC_frame(self):
        return self._nor(self._tan(self.dC.value, (1, 2)))

    def riemann_frame(self):
        return self._tan(self.riemM.value, (0, 1, 2, 3))

    def ricci_frame(self):
        return self._tan(self.ricM.value, (0, 1))

    def normal_curvature_frame(self):
        """``R[alpha, beta, i, j] = <Rperp(E_i, E_j) e_alpha, e_beta>``."""
        op = self._tan(self.Rperp.value, (2, 3))
        return np.einsum("bk,kcij,ac->abij", self.normals, op, self.normals)

    def lift(self):
        return self.Y.value.copy()

    def biposition(self):
        """``N = -(1/m) Lap Y - (1/2m^2) <Lap Y, Lap Y> Y``."""
        lap = self.lapY.value
        m = self.m
        return -lap / m - np.dot(lap * self.lsig, lap) / (2 * m * m) * self.Y.value

    def frame_derivatives_Y(self):
        """``Y_i = dY(E_i)`` as rows."""
        return (self.dY.value @ self.frame).T

    def data(self):
        return MoebiusData(rho=float(self.rho.value), Y=self.lift(), N=self.biposition(),
                           A=self.A_frame(), B=self.B_frame(), C=self.C_frame(),
                           kappa=self.kappa)

    def parallel_residual(self):
        return float(np.max(np.abs(self.dA_frame())))

    # -- structure equations -----------------------------------------------
    def structure_residuals(self):
        """Max absolute deviation of each structure identity at this point."""
        m = self.m
        d = np.eye(m)
        A, B, C = self.A_frame(), self.B_frame(), self.C_frame()
        trA = np.trace(A)
        out = {}
        out["trace_B"] = float(np.max(np.abs(np.einsum("aii->a", B)), initial=0.0))
        out["norm_B"] = abs(float(np.sum(B ** 2)) - (m - 1) / m)
        out["trace_A"] = abs(trA - (1 + m * m * self.kappa) / (2 * m))

        riem = self.riemann_frame()
        gauss = (np.einsum("ail,ajk->ijkl", B, B) - np.einsum("aik,ajl->ijkl", B, B)
                 + np.einsum("il,jk->ijkl", A, d) - np.einsum("ik,jl->ijkl", A, d)
                 + np.einsum("jk,il->ijkl", A, d) - np.einsum("jl,ik->ijkl", A, d))
        out["gauss"] = float(np.max(np.abs(riem - gauss)))

        rn = self.normal_curvature_frame()
        rn_pred = (np.einsum("ajk,bik->abij", B, B) - np.einsum("aik,bjk->abij", B, B))
        out["normal_curvature"] = float(np.max(np.abs(rn - rn_pred), initial=0.0))

        dB = self.dB_frame()
        dC = self.dC_frame()
        if self.dA is not None:
            dA = self.dA_frame()
            lhs = dA - dA.transpose(0, 2, 1)
            rhs = np.einsum("aik,aj->ijk", B, C) - np.einsum("aij,ak->ijk", B, C)
            out["ricci_A"] = float(np.max(np.abs(lhs - rhs)))
        lhs = dB - dB.transpose(0, 1, 3, 2)
        rhs = np.einsum("ij,ak->aijk", d, C) - np.einsum("ik,aj->aijk", d, C)
        out["ricci_B"] = float(np.max(np.abs(lhs - rhs), initial=0.0))
        lhs = dC - dC.transpose(0, 2, 1)
        rhs = np.einsum("aik,kj->aij", B, A) - np.einsum("akj,ki->aij", B, A)
        out["ricci_C"] = float(np.max(np.abs(lhs - rhs), initial=0.0))

        ric_pred = -np.einsum("aik,akj->ij", B, B) + d * trA + (m - 2) * A
        out["ricci_traced"] = float(np.max(np.abs(self.ricci_frame() - ric_pred)))
        div = (m - 1) * C + np.einsum("aijj->ai", dB)
        out["divergence_B"] = float(np.max(np.abs(div), initial=0.0))

        ddB = self.ddB_frame()
        lhs = ddB - ddB.transpose(0, 1, 2, 4, 3)
        rhs = (np.einsum("aqj,iqkl->aijkl", B, riem) + np.einsum("aiq,jqkl->aijkl", B, riem)
               - np.einsum("bij,bakl->aijkl", B, rn))
        out["ricci_B_second"] = float(np.max(np.abs(lhs - rhs), initial=0.0))

        Y = self.Y.value
        sig = self.lsig
        lap = self.lapY.value
        N = self.biposition()
        Yi = self.frame_derivatives_Y()
        out["lightcone_Y"] = abs(float(np.dot(Y * sig, Y))) / float(Y[0] ** 2) + (
            0.0 if Y[0] > 0 else 1.0)
        out["laplace_Y"] = max(
            abs(float(np.dot(lap * sig, Y)) + m),
            float(np.max(np.abs(Yi @ (lap * sig)))),
            abs(float(np.dot(lap * sig, lap)) - 1 - m * m * self.kappa))
        out["biposition_N"] = max(abs(float(np.dot(N * sig, N))),
                                    abs(float(np.dot(Y * sig, N)) - 1.0))
        return out


def moebius_data(jet, spec, point=None, order=None):
    """Moebius invariants at the base point of ``jet``.

    The chart point is required because jets do not record their base point.
    """
    if point is None:
        raise ConfigurationError("moebius_data needs the chart point of the jet")
    return MoebiusJets(spec, point, order or jet.order).data()


def parallel_residual(spec, point, order=DEFAULT_ORDER):
    """``max |A_ij,k|`` of the Blaschke tensor in a Moebius orthonormal frame."""
    return MoebiusJets(spec, point, order).parallel_residual()


def apply_lorentz(transform, samples):
    """Act on lifted samples ``Y`` (rows); returns ``(T Y, x')``."""
    Y = np.atleast_2d(np.asarray(samples, dtype=float))
    Yp = Y @ transform.matrix.T
    if np.any(Yp[:, 0] <= 0):
        raise ConeViolationError("transformed lift left the future light cone")
    return Yp, Yp[:, 1:] / Yp[:, :1]


def transformed_spec(spec, transform):
    """The immersion ``x' = (T(1,x))_spatial / (T(1,x))_0``."""
    if spec.ambient != "sphere" or spec.radius != 1.0:
        raise ConfigurationError("Lorentz transforms act on immersions into the unit sphere")
    mat = transform.matrix
    if mat.shape[0] != spec.output_dim + 1:
        raise ConfigurationError("transform size does not match the ambient dimension")

    def chart(u):
        lifted = [1.0] + list(spec.chart(u))
        img = [sum(mat[i, j] * lifted[j] for j in range(len(lifted)) if mat[i, j] != 0.0)
               for i in range(len(lifted))]
        inv0 = 1.0 / img[0]
        return [c * inv0 for c in img[1:]]

    return ImmersionSpec(spec.family + "+lorentz", dict(spec.params), "sphere",
                         spec.dim_intrinsic, spec.dim_ambient, spec.domain, chart)


__all__ = [
    "MoebiusData", "MoebiusJets", "LorentzTransform", "moebius_factor", "canonical_lift",
    "blaschke_eigen", "moebius_data", "parallel_residual", "apply_lorentz",
    "transformed_spec", "lower",
]
