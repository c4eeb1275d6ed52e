import math

import numpy as np
import pytest

from errors import ContractViolation
from quadrature import (
    composite,
    gauss_jacobi_unit,
    gauss_legendre,
    graded_edges,
    sphere_rule,
    symmetric_axis,
    tensor,
)


def test_gauss_legendre_is_exact_for_degree_2n_minus_1():
    x, w = gauss_legendre(4, -1.0, 3.0)
    # int_{-1}^{3} t^7 dt
    assert np.sum(w * x ** 7) == pytest.approx((3.0 ** 8 - 1.0) / 8.0, rel=1e-13)


def test_gauss_legendre_needs_a_node():
    with pytest.raises(ContractViolation):
        gauss_legendre(0, 0.0, 1.0)


@pytest.mark.parametrize("beta", [-0.5, -0.25, 0.0, 0.5, 2.0])
def test_gauss_jacobi_absorbs_the_power(beta):
    t, w = gauss_jacobi_unit(6, beta)
    assert np.all((t > 0.0) & (t < 1.0))
    # int_0^1 t^beta t^3 dt
    assert np.sum(w * t ** 3) == pytest.approx(1.0 / (beta + 4.0), rel=1e-12)


def test_gauss_jacobi_rejects_non_integrable_power():
    with pytest.raises(ContractViolation):
        gauss_jacobi_unit(8, -1.0)


def test_composite_matches_antiderivative():
    x, w = composite([0.0, 0.5, 2.0, 3.0], 8)
    assert x.size == 24
    assert np.sum(w * np.exp(x)) == pytest.approx(math.exp(3.0) - 1.0, rel=1e-13)


def test_graded_edges_double_past_the_core():
    assert graded_edges(40.0, 8.0) == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 16.0, 32.0, 64.0]
    assert graded_edges(3.0, 8.0) == [0.0, 1.0, 2.0, 3.0]


def test_symmetric_axis_is_mirrored():
    x, w = symmetric_axis(20.0, 4.0, 6)
    np.testing.assert_allclose(x, -x[::-1])
    np.testing.assert_allclose(w, w[::-1])
    assert np.sum(w) == pytest.approx(2.0 * 32.0)


def test_tensor_weights_multiply():
    a = gauss_legendre(3, 0.0, 2.0)
    b = gauss_legendre(5, -1.0, 1.0)
    nodes, weights = tensor([a, b])
    assert nodes.shape == (15, 2)
    assert np.sum(weights) == pytest.approx(4.0)
    assert np.sum(weights * nodes[:, 0] * nodes[:, 1] ** 2) == pytest.approx(2.0 * (2.0 / 3.0))


@pytest.mark.parametrize("d,area", [(1, 2.0), (2, 2.0 * math.pi), (3, 4.0 * math.pi)])
def test_sphere_rule_measures_the_sphere(d, area):
    dirs, w = sphere_rule(d, 12)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=-1), 1.0)
    assert np.sum(w) == pytest.approx(area, rel=1e-12)


def test_sphere_rule_integrates_low_degree_polynomials():
    dirs, w = sphere_rule(3, 12)
    # int_{S^2} z^2 = 4 pi / 3
    assert np.sum(w * dirs[:, 2] ** 2) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_sphere_rule_dimension_limit():
    with pytest.raises(ContractViolation):
        sphere_rule(4, 8)
