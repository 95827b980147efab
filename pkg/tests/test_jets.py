import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blaschke import jets as J
from blaschke.errors import ConfigurationError, DomainError, JetOrderError, NumericError
from blaschke.families import FAMILIES, fd_crosscheck, jet_eval, make_family
from blaschke.verify import sample_points

# [DERIVED] sympy differentiation of the chart maps, divided by alpha!
ELLIPSE_COEFFS = {
    (2, 1): [0.0, 0.0, -0.055406478881523585, 0.10142087929594919],
    (1, 3): [0.0, 0.0, 0.005655467630073791, -0.010352264057392292],
    (0, 4): [0.0, 0.0, 0.022684645482972568, 0.01239267830857161],
    (5, 0): [0.004226093388689235, -0.022884346230676096, -0.011437756249504265,
             -0.006248474717330556],
}
SIGMA_CYLINDER_COEFFS = {
    (1, 2): [0.0, 0.15825647651200833, -0.511600165553585, 0.0],
    (3, 1): [0.0, -0.011782598981186023, 0.03808993933318662, 0.0],
}

DIFFERENTIABLE = [name for name in sorted(FAMILIES)]


def test_circle_coefficients():
    jet = jet_eval(make_family("circle"), [0.0], 3)
    np.testing.assert_allclose(jet.coefficient((0,)), [1, 0], atol=1e-15)
    np.testing.assert_allclose(jet.coefficient((1,)), [0, 1], atol=1e-15)
    np.testing.assert_allclose(jet.coefficient((2,)), [-0.5, 0], atol=1e-15)
    np.testing.assert_allclose(jet.coefficient((3,)), [0, -1 / 6], atol=1e-15)


@pytest.mark.parametrize("alpha", sorted(ELLIPSE_COEFFS))
def test_ellipse_torus_against_sympy(alpha):
    jet = jet_eval(make_family("ellipse_torus"), [0.3, 0.5], 5)
    np.testing.assert_allclose(jet.coefficient(alpha), ELLIPSE_COEFFS[alpha], atol=1e-14)


@pytest.mark.parametrize("alpha", sorted(SIGMA_CYLINDER_COEFFS))
def test_sigma_cylinder_against_sympy(alpha):
    jet = jet_eval(make_family("sigma_cylinder"), [0.3, 0.2], 4)
    np.testing.assert_allclose(jet.coefficient(alpha), SIGMA_CYLINDER_COEFFS[alpha],
                               atol=1e-14)


def test_derivative_scales_by_factorial():
    jet = jet_eval(make_family("circle"), [0.4], 4)
    assert jet.derivative((4,))[0] == pytest.approx(math.cos(0.4), abs=1e-14)
    assert jet.derivative((3,))[1] == pytest.approx(-math.cos(0.4), abs=1e-14)


@pytest.mark.parametrize("dim,order", [(1, 0), (1, 5), (2, 3), (3, 5), (4, 2)])
def test_coefficient_count(dim, order):
    assert J.jet_space(dim, order).size == math.comb(dim + order, order)
    assert J.count_coefficients(dim, order) == math.comb(dim + order, order)


def test_graded_lex_order():
    idx = J.jet_space(2, 2).indices
    assert idx == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_clifford_value_on_unit_sphere():
    spec = make_family("clifford")
    for u in sample_points(spec, 10, 1):
        assert np.linalg.norm(jet_eval(spec, u, 3).value) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("name", DIFFERENTIABLE)
def test_degree_zero_is_value(name):
    spec = make_family(name)
    for u in sample_points(spec, 5, 3):
        jet = jet_eval(spec, u, 2)
        np.testing.assert_allclose(jet.value, spec.evaluate(u), rtol=0, atol=1e-15)
        assert np.all(np.isfinite(jet.coeffs))


@pytest.mark.parametrize("name", DIFFERENTIABLE)
def test_matches_finite_differences(name):
    spec = make_family(name)
    for u in sample_points(spec, 4, 7):
        exact = jet_eval(spec, u, 2)
        approx = fd_crosscheck(spec, u, 2, 1e-4)
        assert np.max(np.abs(exact.coeffs - approx.coeffs)) <= 1e-6


def test_fd_identity_jacobian():
    spec = make_family("identity")
    jet = fd_crosscheck(spec, [0.3, -1.2], 1, 1e-3)
    jac = np.stack([jet.coefficient((1, 0)), jet.coefficient((0, 1))], axis=1)
    np.testing.assert_allclose(jac, np.eye(2), atol=1e-12)


def test_fd_second_order_convergence():
    spec = make_family("circle")
    exact = jet_eval(spec, [0.0], 2).coefficient((2,))
    errs = [np.max(np.abs(fd_crosscheck(spec, [0.0], 2, h).coefficient((2,)) - exact))
            for h in (0.1, 0.05)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.01)


def test_fd_errors():
    spec = make_family("circle")
    with pytest.raises(NumericError):
        fd_crosscheck(spec, [1.0], 2, 1e-300)
    with pytest.raises(ConfigurationError):
        fd_crosscheck(spec, [1.0], 3, 1e-3)
    with pytest.raises(ConfigurationError):
        fd_crosscheck(spec, [1.0], 2, 0.0)


def test_jet_eval_errors():
    with pytest.raises(DomainError):
        jet_eval(make_family("clifford"), [4.0, 0.0], 2)
    with pytest.raises(DomainError):
        jet_eval(make_family("clifford"), [math.pi, 0.0], 2)
    with pytest.raises(DomainError):
        jet_eval(make_family("clifford"), [0.0], 2)
    with pytest.raises(ConfigurationError):
        make_family("klein_bottle")
    with pytest.raises(ConfigurationError):
        jet_eval(make_family("clifford"), [0.0, 0.0], -1)


def test_derivative_beyond_order():
    jet = jet_eval(make_family("circle"), [0.0], 2)
    with pytest.raises(JetOrderError):
        jet.coefficient((3,))


coeff = st.floats(-2.0, 2.0, allow_nan=False)


def _random_jet(draw_values, dim, order):
    space = J.jet_space(dim, order)
    return J.Jet(space, np.array(draw_values[: space.size]))


@given(st.lists(coeff, min_size=20, max_size=20), st.lists(coeff, min_size=20, max_size=20))
def test_sum_is_coefficientwise(a, b):
    ja, jb = _random_jet(a, 3, 3), _random_jet(b, 3, 3)
    np.testing.assert_allclose((ja + jb).coeffs, np.array(a) + np.array(b), atol=1e-14)


@given(st.lists(coeff, min_size=10, max_size=10), st.lists(coeff, min_size=10, max_size=10))
def test_product_is_leibniz(a, b):
    ja, jb = _random_jet(a, 2, 3), _random_jet(b, 2, 3)
    prod = ja * jb
    space = ja.space
    for k, gamma in enumerate(space.indices):
        expected = 0.0
        for i, alpha in enumerate(space.indices):
            beta = tuple(g - x for g, x in zip(gamma, alpha))
            if min(beta) >= 0:
                expected += a[i] * b[space.position[beta]]
        assert prod.coeffs[k] == pytest.approx(expected, abs=1e-14)


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_elementary_functions_compose(x, y):
    u, v = J.variables([x, y], 4)
    lhs = J.sin(u + v) ** 2 + J.cos(u + v) ** 2
    np.testing.assert_allclose(lhs.coeffs, [1.0] + [0.0] * (lhs.space.size - 1), atol=1e-13)
    e = J.exp(J.log(1.5 + u * v))
    np.testing.assert_allclose(e.coeffs, (1.5 + u * v).coeffs, atol=1e-13)
    s = J.sqrt(2.0 + u * u)
    np.testing.assert_allclose((s * s).coeffs, (2.0 + u * u).coeffs, atol=1e-13)
