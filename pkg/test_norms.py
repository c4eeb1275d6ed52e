import math

import numpy as np
import pytest
from scipy import integrate

from errors import (
    ContractViolation,
    DivergingNormError,
    EvaluationError,
    NonIntegrableError,
    ParseError,
    UnsupportedOrderError,
)
from norms import (
    Difference,
    Grading,
    ball,
    box,
    build_quadrature,
    cached_quadrature,
    char_fn_fl_norm,
    decay_weight_norm,
    domain_id,
    full_space,
    multi_indices,
    parse_domain,
    tail_bound,
    weighted_lp_norm,
    weighted_sobolev_norm,
)
from weights import bracket, constant, decay, power


def ones(X):
    return np.ones(X.shape[0])


class Linear:
    """g(x) = x on the line, with its derivative."""

    def partial(self, alpha, X):
        if alpha == (0,):
            return X[:, 0]
        if alpha == (1,):
            return np.ones(X.shape[0])
        return np.zeros(X.shape[0])


def test_unit_integrand_on_a_box():
    grid = build_quadrature(box([(-1.0, 1.0)]), constant(1), 8)
    assert weighted_lp_norm(ones, constant(1), 1.0, grid).value == pytest.approx(2.0, rel=1e-14)
    assert weighted_lp_norm(ones, constant(1), 2.0, grid).value == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_decay_weight_on_the_full_line():
    grid = build_quadrature(full_space(1), decay(3.0), 64, p=1.0)
    assert grid.grading == Grading.TAIL
    result = weighted_lp_norm(ones, decay(3.0), 1.0, grid, sup_bound=1.0)
    # 2 int_0^inf (1 + x)^-3 dx = 1
    assert result.value == pytest.approx(1.0, abs=1e-8)
    assert 0.0 < result.tail_bound < 1e-8


def test_singular_weight_on_the_unit_disc():
    dom = ball((0.0, 0.0), 1.0)
    grid = build_quadrature(dom, power(-0.5, 2), 16)
    assert grid.grading == Grading.ORIGIN
    # 2 pi int_0^1 r^-0.5 r dr
    assert weighted_lp_norm(ones, power(-0.5, 2), 1.0, grid).value == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_singular_weight_on_a_square():
    grid = build_quadrature(box([(-1.0, 1.0), (-1.0, 1.0)]), power(-1.0, 2), 16)
    expected = 8.0 * math.log(1.0 + math.sqrt(2.0))
    assert weighted_lp_norm(ones, power(-1.0, 2), 1.0, grid).value == pytest.approx(expected, rel=1e-10)


def test_gaussian_l2_norm(gauss1):
    grid = build_quadrature(box([(-10.0, 10.0)]), constant(1), 64)
    assert weighted_lp_norm(gauss1, constant(1), 2.0, grid).value == pytest.approx(math.pi ** 0.25, rel=1e-12)


def test_gaussian_l2_on_the_unit_box(gauss1, unit_box, gauss_l2_box):
    grid = build_quadrature(unit_box, constant(1), 16)
    assert weighted_lp_norm(gauss1, constant(1), 2.0, grid).value == pytest.approx(gauss_l2_box, rel=1e-12)


def test_sobolev_norm_of_a_linear_function():
    grid = build_quadrature(box([(0.0, 1.0)]), constant(1), 8)
    # int x^2 + int 1 = 4/3
    assert weighted_sobolev_norm(Linear(), 1, 2.0, constant(1), grid).value == pytest.approx(2.0 / math.sqrt(3.0))


def test_sobolev_norm_grows_with_order(gauss1):
    grid = build_quadrature(box([(-3.0, 3.0)]), bracket(1.0), 16)
    values = [weighted_sobolev_norm(gauss1, ell, 2.0, bracket(1.0), grid).value for ell in range(4)]
    assert values == sorted(values)
    assert values[0] == pytest.approx(weighted_lp_norm(gauss1, bracket(1.0), 2.0, grid).value)


def test_triangle_inequality(gauss1):
    grid = build_quadrature(box([(-2.0, 2.0)]), bracket(0.5), 16)

    def f(X):
        return np.sin(3.0 * X[:, 0])

    def total(X):
        return f(X) + np.exp(-0.5 * X[:, 0] ** 2)

    for p in (1.0, 1.5, 3.0):
        lhs = weighted_lp_norm(total, bracket(0.5), p, grid).value
        rhs = weighted_lp_norm(f, bracket(0.5), p, grid).value + weighted_lp_norm(gauss1, bracket(0.5), p, grid).value
        assert lhs <= rhs * (1.0 + 1e-12)


def test_difference_of_identical_fields_is_zero(gauss2):
    grid = build_quadrature(box([(-1.0, 1.0), (0.0, 2.0)]), constant(2), 8)
    assert weighted_sobolev_norm(Difference(gauss2, gauss2), 1, 2.0, constant(2), grid).value == 0.0


def test_plain_callable_has_no_derivatives():
    grid = build_quadrature(box([(0.0, 1.0)]), constant(1), 4)
    with pytest.raises(UnsupportedOrderError):
        weighted_sobolev_norm(ones, 1, 2.0, constant(1), grid)


def test_non_finite_integrand_is_reported():
    grid = build_quadrature(box([(0.0, 1.0)]), constant(1), 4)
    with pytest.raises(EvaluationError):
        weighted_lp_norm(lambda X: np.full(X.shape[0], np.nan), constant(1), 1.0, grid)


def test_grid_rejects_a_different_weight():
    dom = box([(-1.0, 1.0)])
    grid = build_quadrature(dom, power(-0.5), 8)
    with pytest.raises(ContractViolation):
        weighted_lp_norm(ones, power(-0.25), 1.0, grid)
    uniform = build_quadrature(dom, constant(1), 8)
    with pytest.raises(ContractViolation):
        weighted_lp_norm(ones, power(-0.5), 1.0, uniform)


def test_full_space_needs_a_decay_weight():
    with pytest.raises(ContractViolation):
        build_quadrature(full_space(1), constant(1), 8)


def test_non_integrable_power_at_the_origin():
    with pytest.raises(NonIntegrableError):
        build_quadrature(box([(-1.0, 1.0)]), power(-1.0), 8)
    with pytest.raises(NonIntegrableError):
        build_quadrature(ball((0.0, 0.0), 1.0), power(-1.0, 2), 8, p=2.0)


def test_origin_outside_the_domain_is_not_graded():
    grid = build_quadrature(box([(1.0, 2.0)]), power(-1.0), 8)
    assert grid.grading == Grading.UNIFORM
    assert weighted_lp_norm(ones, power(-1.0), 1.0, grid).value == pytest.approx(math.log(2.0), rel=1e-10)


def test_cached_quadrature_reuses_grids():
    dom = box([(0.0, 1.0)])
    assert cached_quadrature(dom, constant(1), 6) is cached_quadrature(dom, constant(1), 6)


def test_tail_bound_value():
    assert tail_bound(2.0, 2.0, 9.0) == pytest.approx((2.0 / 3.0) * 1e-3)
    with pytest.raises(NonIntegrableError):
        tail_bound(0.5, 2.0, 1.0)


@pytest.mark.parametrize("u,r,d", [(3.0, 2.0, 1), (2.0, 1.5, 1), (2.0, 2.0, 2), (4.5, 2.0, 2)])
def test_decay_weight_norm_matches_quad(u, r, d):
    area = 2.0 if d == 1 else 2.0 * math.pi
    radial, _ = integrate.quad(lambda t: t ** (d - 1) * (1.0 + t) ** (-u * r), 0.0, math.inf, epsrel=1e-12)
    assert decay_weight_norm(u, r, d) == pytest.approx((area * radial) ** (1.0 / r), rel=1e-9)


def test_decay_weight_norm_diverges():
    with pytest.raises(NonIntegrableError):
        decay_weight_norm(1.0, 1.0, 1)


def test_multi_indices_order():
    assert multi_indices(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert len(multi_indices(3, 2)) == 10


@pytest.mark.parametrize("dom", [box([(-1.0, 1.0), (0.0, 2.0)]), ball((0.5, -1.0), 1.5), full_space(3)])
def test_domain_strings_round_trip(dom):
    assert parse_domain(domain_id(dom)) == dom


@pytest.mark.parametrize("text", ["cube:1", "box:1,0", "ball:0,0", "rd:x"])
def test_parse_domain_errors(text):
    with pytest.raises(ParseError):
        parse_domain(text)


def test_domain_geometry():
    dom = box([(-1.0, 2.0), (0.5, 1.0)])
    assert dom.volume() == pytest.approx(1.5)
    assert dom.r_max() == pytest.approx(math.sqrt(4.0 + 1.0))
    assert not dom.contains_origin()
    assert ball((0.0, 0.0, 0.0), 2.0).volume() == pytest.approx(32.0 * math.pi / 3.0)
    assert not full_space(2).bounded


# ---------------------------------------------------------------------------
# Indicator functions
# ---------------------------------------------------------------------------

def test_indicator_plancherel_on_boxes():
    assert char_fn_fl_norm(box([(-1.0, 1.0)]), 2.0, 0.0).value == pytest.approx(math.sqrt(2.0), rel=1e-6)
    assert char_fn_fl_norm(box([(-1.0, 1.0), (-1.0, 1.0)]), 2.0, 0.0).value == pytest.approx(2.0, rel=1e-6)


BOXES = [
    box([(-1.0, 1.0)]),
    box([(0.0, 3.0)]),
    box([(-2.0, 0.5)]),
    box([(0.25, 0.75)]),
    box([(-1.0, 1.0), (0.0, 2.0)]),
    box([(0.5, 1.0), (-3.0, -1.0)]),
    box([(-0.5, 0.5), (-0.5, 0.5)]),
    box([(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]),
    box([(-1.0, 2.0), (0.0, 0.5), (-0.25, 0.25)]),
    box([(0.0, 2.0), (0.0, 2.0), (-1.0, 0.0)]),
]

BALLS = [
    ball((0.0, 0.0), 1.0),
    ball((1.0, -0.5), 0.5),
    ball((0.0, 0.0), 2.0),
    ball((0.0, 0.0, 0.0), 1.0),
    ball((0.2, 0.0, 0.0), 0.7),
]


@pytest.mark.parametrize("dom", BOXES + BALLS, ids=domain_id)
def test_indicator_l2_norm_is_root_volume(dom):
    result = char_fn_fl_norm(dom, 2.0, 0.0)
    assert result.value == pytest.approx(math.sqrt(dom.volume()), rel=1e-6)
    assert result.tail_bound < 1e-3 * result.value


def test_indicator_of_a_box_is_not_barron():
    with pytest.raises(DivergingNormError) as info:
        char_fn_fl_norm(box([(-1.0, 1.0)]), 1.0, 0.0)
    assert info.value.factor == "indicator"


def test_indicator_sup_norm():
    # chi^(0) = (2 pi)^(-1/2) * length
    assert char_fn_fl_norm(box([(0.0, 3.0)]), math.inf, 0.0).value == pytest.approx(3.0 / math.sqrt(2.0 * math.pi))


def test_weighted_indicator_norm_grows_with_gamma():
    dom = box([(-1.0, 1.0)])
    values = [char_fn_fl_norm(dom, 4.0, g).value for g in (0.0, 0.25, 0.5)]
    assert values == sorted(values)
