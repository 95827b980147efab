import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blaschke.errors import (ConeViolationError, ConfigurationError, JetOrderError,
                             SymmetryError, UmbilicPointError)
from blaschke.euclidean import euclidean_data
from blaschke.families import jet_eval, make_family
from blaschke.lorentz import LorentzTransform, inner, random_rotation, random_transform
from blaschke.moebius import (MoebiusJets, apply_lorentz, blaschke_eigen, canonical_lift,
                              moebius_data, moebius_factor, parallel_residual,
                              transformed_spec)
from blaschke.verify import STRUCTURE_BATTERY, sample_points

# [DERIVED] independent 40-digit mpmath evaluation of the coordinate formulas
# (numerical differentiation of the chart, no jets): rho and the eigenvalues
# of A relative to the Moebius metric.
ORACLE = {
    ("ellipse_torus", (0.3, 0.5)): (3.0287969000115109925,
                                    [-0.032191755068299794799, 0.74375303772710641955]),
    ("clifford", (0.3, 0.5)): (2.0, [0.125, 0.125]),
    ("sigma_cylinder", (0.3, 0.2)): (1.0928571428571428571, [-0.125, 0.375]),
}

UMBILIC_FREE = ["clifford", "ellipse_torus", "veronese", "twisted_torus", "deformed_product",
                "sigma_cylinder", "tau_cylinder", "product_torus"]


@pytest.mark.parametrize("key", sorted(ORACLE))
def test_against_independent_oracle(key):
    name, point = key
    rho, eigs = ORACLE[key]
    data = MoebiusJets(make_family(name), point).data()
    assert data.rho == pytest.approx(rho, rel=1e-13)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(data.A)), eigs, atol=1e-12)


def test_clifford_invariants():
    spec = make_family("clifford")
    for u in sample_points(spec, 5, 0):
        mj = MoebiusJets(spec, u)
        d = mj.data()
        assert d.rho == pytest.approx(2.0, abs=1e-12)
        np.testing.assert_allclose(d.A, np.eye(2) / 8, atol=1e-12)
        assert abs(d.B[0, 0, 0]) == pytest.approx(0.5, abs=1e-12)
        assert d.B[0, 1, 1] == pytest.approx(-d.B[0, 0, 0], abs=1e-12)
        assert d.norm_B_sq() == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(d.C, 0, atol=1e-12)
        assert d.Y[0] == pytest.approx(2.0, abs=1e-12)
        assert d.kappa == pytest.approx(0.0, abs=1e-12)
        assert mj.parallel_residual() <= 1e-8
        assert blaschke_eigen(d.A) == [(pytest.approx(0.125, abs=1e-12), 2)]


def test_moebius_factor_from_euclidean_data():
    spec = make_family("clifford")
    assert moebius_factor(euclidean_data(jet_eval(spec, [0.1, 0.2], 2), spec), 2) == \
        pytest.approx(2.0, abs=1e-13)
    spec = make_family("veronese")
    d = euclidean_data(jet_eval(spec, [1.0, 0.5], 2), spec)
    assert np.max(np.abs(d.H)) < 1e-13
    assert moebius_factor(d, 2) == pytest.approx(math.sqrt(2) * np.linalg.norm(d.h), rel=1e-13)


def test_umbilic_error_carries_point():
    spec = make_family("small_sphere", r=0.5)
    with pytest.raises(UmbilicPointError) as info:
        MoebiusJets(spec, [0.25, -0.5])
    assert info.value.point == [0.25, -0.5]
    d = euclidean_data(jet_eval(spec, [0.25, -0.5], 2), spec)
    with pytest.raises(UmbilicPointError):
        moebius_factor(d, 2, point=[0.25, -0.5])


def test_canonical_lift():
    np.testing.assert_array_equal(canonical_lift(2.0, [1, 0, 0, 0]), [2, 2, 0, 0, 0])
    x = np.array([0.6, 0.0, 0.8])
    assert abs(inner(canonical_lift(3.7, x), canonical_lift(3.7, x))) <= 1e-14
    with pytest.raises(ConfigurationError):
        canonical_lift(0.0, x)


@pytest.mark.parametrize("name", ["veronese", "twisted_torus", "deformed_product"])
def test_biposition_identities(name):
    spec = make_family(name)
    for u in sample_points(spec, 3, 9):
        mj = MoebiusJets(spec, u)
        Y, N, lap, m = mj.lift(), mj.biposition(), mj.lapY.value, mj.m
        assert inner(N, Y) == pytest.approx(1.0, abs=1e-8)
        assert abs(inner(N, N)) <= 1e-8
        assert inner(lap, Y) == pytest.approx(-m, abs=1e-8)
        trA = np.trace(mj.A_frame())
        kappa = (2 * m * trA - 1) / m ** 2
        assert inner(lap, lap) == pytest.approx(1 + m * m * kappa, abs=1e-6)


def test_blaschke_eigen_clustering():
    assert blaschke_eigen(np.diag([1.0, 1.0 + 1e-9])) == [(pytest.approx(1.0), 2)]
    assert blaschke_eigen(np.diag([3.0, 1.0, 2.0])) == [(1.0, 1), (2.0, 1), (3.0, 1)]
    assert [k for _, k in blaschke_eigen(np.diag([1.0, 1.001]), cluster_tol=1e-2)] == [2]
    with pytest.raises(SymmetryError):
        blaschke_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_order_requirements():
    spec = make_family("clifford")
    with pytest.raises(JetOrderError):
        MoebiusJets(spec, [0.1, 0.2], order=3)
    with pytest.raises(JetOrderError):
        MoebiusJets(spec, [0.1, 0.2], order=4).parallel_residual()
    with pytest.raises(JetOrderError):
        parallel_residual(spec, [0.1, 0.2], order=4)
    res = MoebiusJets(spec, [0.1, 0.2], order=4).structure_residuals()
    assert "ricci_A" not in res and res["gauss"] <= 1e-8


def test_non_sphere_ambient_rejected():
    with pytest.raises(ConfigurationError):
        MoebiusJets(make_family("round_sphere"), [0.1, 0.2])
    with pytest.raises(ConfigurationError):
        moebius_data(jet_eval(make_family("clifford"), [0.0, 0.0], 5), make_family("clifford"))


def test_moebius_data_matches_jets():
    spec = make_family("twisted_torus")
    jet = jet_eval(spec, [0.4, 0.9], 5)
    a = moebius_data(jet, spec, [0.4, 0.9])
    b = MoebiusJets(spec, [0.4, 0.9]).data()
    np.testing.assert_array_equal(a.A, b.A)
    assert a.rho == b.rho


def test_ellipse_not_parallel():
    spec = make_family("ellipse_torus")
    assert max(parallel_residual(spec, u) for u in sample_points(spec, 8, 0)) > 1e-3


def test_lorentz_transform_validation():
    with pytest.raises(ConfigurationError):
        LorentzTransform(np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(ConeViolationError):
        LorentzTransform(-np.eye(4))
    rng = np.random.default_rng(3)
    T = random_transform(5, rng)
    eta = np.diag([-1.0, 1, 1, 1, 1])
    assert np.max(np.abs(T.matrix.T @ eta @ T.matrix - eta)) <= 1e-10


def test_apply_lorentz_identity_and_rotation():
    spec = make_family("clifford")
    pts = sample_points(spec, 6, 1)
    Y = np.array([MoebiusJets(spec, u).lift() for u in pts])
    x = np.array([spec.evaluate(u) for u in pts])
    Yp, xp = apply_lorentz(LorentzTransform.identity(5), Y)
    np.testing.assert_array_equal(Yp, Y)
    np.testing.assert_allclose(xp, x, atol=1e-15)
    rot = random_rotation(4, np.random.default_rng(5))
    _, xp = apply_lorentz(LorentzTransform.rotation(rot), Y)
    np.testing.assert_allclose(xp, x @ rot.T, atol=1e-14)
    moved = transformed_spec(spec, LorentzTransform.rotation(rot))
    np.testing.assert_allclose(moved.evaluate(pts[0]), rot @ x[0], atol=1e-14)


def test_apply_lorentz_cone_violation():
    boost = LorentzTransform.boost([-1.0, 0.0, 0.0, 0.0], 1.0)
    with pytest.raises(ConeViolationError):
        apply_lorentz(boost, [[1.0, 5.0, 0.0, 0.0, 0.0]])


def test_boost_preserves_eigenvalues():
    spec = make_family("ellipse_torus")
    T = LorentzTransform.boost([0.3, -0.2, 0.5, 0.1], 0.8)
    moved = transformed_spec(spec, T)
    for u in sample_points(spec, 3, 2):
        a = np.linalg.eigvalsh(MoebiusJets(spec, u).data().A)
        b = np.linalg.eigvalsh(MoebiusJets(moved, u).data().A)
        np.testing.assert_allclose(a, b, atol=1e-8)


unit = st.floats(0.05, 0.95)


@given(st.sampled_from(UMBILIC_FREE), unit, unit, unit)
def test_structure_identities_hold(name, s, t, w):
    spec = make_family(name)
    lo = np.array([d[0] for d in spec.domain])
    hi = np.array([d[1] for d in spec.domain])
    u = lo + np.array([s, t, w][: spec.dim_intrinsic]) * (hi - lo)
    res = MoebiusJets(spec, u).structure_residuals()
    assert set(res) == set(STRUCTURE_BATTERY)
    for key, value in res.items():
        assert value <= STRUCTURE_BATTERY[key][0], key


@given(st.sampled_from(UMBILIC_FREE), unit, unit, unit)
def test_moebius_frame_invariants(name, s, t, w):
    spec = make_family(name)
    lo = np.array([d[0] for d in spec.domain])
    hi = np.array([d[1] for d in spec.domain])
    u = lo + np.array([s, t, w][: spec.dim_intrinsic]) * (hi - lo)
    d = MoebiusJets(spec, u).data()
    m = d.m
    assert np.max(np.abs(d.trace_B())) <= 1e-10
    assert d.norm_B_sq() == pytest.approx((m - 1) / m, abs=1e-8)
    np.testing.assert_allclose(d.A, d.A.T, atol=1e-12)
    assert abs(inner(d.Y, d.Y)) <= 1e-8 * d.Y[0] ** 2 and d.Y[0] > 0
    assert np.trace(d.A) == pytest.approx((1 + m * m * d.kappa) / (2 * m), abs=1e-6)
