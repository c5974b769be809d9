import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igawave.splines import basis_matrix, element_basis, eval_basis, make_uniform_space
from oracles import collocation


def test_single_linear_element():
    s = make_uniform_space(1, 1)
    np.testing.assert_array_equal(s.knots, [0, 0, 1, 1])
    assert s.n == 2


def test_single_quadratic_element():
    s = make_uniform_space(2, 1)
    np.testing.assert_array_equal(s.knots, [0, 0, 0, 1, 1, 1])
    assert s.n == 3


def test_basis_count_is_elements_plus_degree():
    assert make_uniform_space(2, 32).n == 34


def test_invalid_spaces_rejected():
    with pytest.raises(ValueError):
        make_uniform_space(-1, 4)
    with pytest.raises(ValueError):
        make_uniform_space(2, 0)


def test_hat_functions_at_midpoint():
    first, v = eval_basis(make_uniform_space(1, 1), 0.5)
    assert first == 0
    np.testing.assert_allclose(v, [0.5, 0.5])


def test_clamped_endpoints_interpolate():
    s = make_uniform_space(2, 1)
    first, v = eval_basis(s, 0.0)
    assert first == 0
    np.testing.assert_allclose(v, [1, 0, 0])
    first, v = eval_basis(s, 1.0)
    assert first == s.n - 3
    np.testing.assert_allclose(v, [0, 0, 1])


def test_out_of_domain_and_bad_order():
    s = make_uniform_space(2, 4)
    with pytest.raises(ValueError):
        eval_basis(s, 1.5)
    with pytest.raises(ValueError):
        eval_basis(s, 0.3, derivative_order=2)


@pytest.mark.parametrize("p,n_el", [(1, 3), (2, 5), (3, 4), (4, 2)])
def test_matches_recursive_definition(p, n_el):
    s = make_uniform_space(p, n_el)
    x = np.linspace(0, 1, 37)
    np.testing.assert_allclose(basis_matrix(s, x, 0), collocation(p, n_el, x), atol=1e-14)
    np.testing.assert_allclose(basis_matrix(s, x, 1), collocation(p, n_el, x, 1), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(p=st.integers(0, 5), n_el=st.integers(1, 12), x=st.floats(0, 1))
def test_partition_of_unity(p, n_el, x):
    _, v = eval_basis(make_uniform_space(p, n_el), x)
    assert abs(v.sum() - 1) < 1e-13
    assert (v >= -1e-15).all()


@settings(max_examples=40, deadline=None)
@given(p=st.integers(1, 5), n_el=st.integers(1, 12), x=st.floats(0, 1))
def test_derivatives_sum_to_zero(p, n_el, x):
    _, d = eval_basis(make_uniform_space(p, n_el), x, 1)
    assert abs(d.sum()) < 1e-10 * max(1, n_el * p)


def test_derivative_matches_finite_difference():
    s = make_uniform_space(3, 6)
    x = np.linspace(0.013, 0.987, 23)
    h = 1e-6
    fd = (basis_matrix(s, x + h) - basis_matrix(s, x - h)) / (2 * h)
    np.testing.assert_allclose(basis_matrix(s, x, 1), fd, atol=1e-6)


def test_element_basis_matches_pointwise_evaluation():
    s = make_uniform_space(2, 4)
    first, vals = element_basis(s, 1)
    for e in range(s.n_el):
        for q, x in enumerate(s.quadrature.points[e]):
            f, v = eval_basis(s, x, 1)
            assert f == first[e]
            np.testing.assert_allclose(vals[e, :, q], v)


def test_quadrature_integrates_polynomials_exactly():
    s = make_uniform_space(3, 5)
    x, w = s.quadrature.points.ravel(), s.quadrature.weights.ravel()
    assert abs(w.sum() - 1) < 1e-14
    assert abs((w * x ** 7).sum() - 1 / 8) < 1e-14


def test_greville_points_of_linear_space_are_breakpoints():
    s = make_uniform_space(1, 4)
    np.testing.assert_allclose(s.greville(), np.linspace(0, 1, 5))
