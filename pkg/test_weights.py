import math

import numpy as np
import pytest
from scipy import integrate

from errors import ContractViolation, ParseError
from weights import (
    Ball,
    BallFamily,
    Verdict,
    ball_integral,
    bracket,
    check_ap,
    conjugate,
    constant,
    decay,
    eval_weight,
    is_radial_nondecreasing,
    lower_bound_check,
    muckenhoupt_statistic,
    parse_weight,
    power,
    power_ap_interval,
    power_exponent,
    radial_value,
    reciprocal,
    sobolev_weight_from_upsilon,
    weight_id,
)


def test_conjugate_endpoints():
    assert conjugate(2.0) == 2.0
    assert conjugate(3.0) == pytest.approx(1.5)
    assert conjugate(1.0) == math.inf
    assert conjugate(math.inf) == 1.0


def test_bracket_uses_one_plus_norm():
    assert eval_weight(bracket(2.0, 2), np.array([0.6, 0.8])) == pytest.approx(4.0)


def test_power_is_infinite_at_the_origin():
    assert eval_weight(power(-0.5, 2), np.zeros(2)) == math.inf


def test_derived_weight_of_constant_is_constant():
    w = sobolev_weight_from_upsilon(constant(2), 3.0)
    np.testing.assert_allclose(eval_weight(w, np.array([[0.1, 0.2], [5.0, -3.0]])), 1.0)


@pytest.mark.parametrize("gamma_exp,p,expected", [(1.0, 2.0, -0.5), (1.0, 3.0, -2.0 / 3.0), (0.0, 2.0, 0.0)])
def test_derived_weight_exponent(gamma_exp, p, expected):
    w = sobolev_weight_from_upsilon(power(gamma_exp), p)
    assert power_exponent(w) == pytest.approx(expected)
    assert radial_value(w, 4.0) == pytest.approx(4.0 ** expected)


def test_reciprocal_weight_values():
    w = reciprocal(power(0.5), shift=0.25, power_=2.0)
    # r^0.25 * (1/r)^(0.5 * 2)
    assert radial_value(w, 3.0) == pytest.approx(3.0 ** 0.25 * 3.0 ** -1.0)
    assert power_exponent(w) == pytest.approx(-0.75)


def test_monotonicity():
    assert is_radial_nondecreasing(power(0.5))
    assert is_radial_nondecreasing(constant())
    assert is_radial_nondecreasing(bracket(1.0))
    assert not is_radial_nondecreasing(decay(2.0))
    assert not is_radial_nondecreasing(power(-0.5))


def test_power_ap_interval():
    assert power_ap_interval(1, 2.0) == (-1.0, 1.0)
    assert power_ap_interval(3, 4.0) == (-3.0, 9.0)
    with pytest.raises(ContractViolation):
        power_ap_interval(1, 1.0)


def test_ball_integral_power_in_one_dimension():
    # int_{-1}^{1} |x|^0.5 dx
    assert ball_integral(power(0.5), Ball((0.0,), 1.0)) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_ball_integral_constant_in_the_plane():
    assert ball_integral(constant(2), Ball((0.5, 0.0), 2.0)) == pytest.approx(4.0 * math.pi, rel=1e-12)


@pytest.mark.parametrize("a", [-1.5, -0.5, 0.7, 2.0])
def test_ball_integral_power_centered(a):
    # int_{|x|<1} |x|^a dx = 2 pi / (2 + a) in the plane
    assert ball_integral(power(a, 2), Ball((0.0, 0.0), 1.0)) == pytest.approx(2.0 * math.pi / (2.0 + a), rel=1e-10)


def test_ball_integral_power_off_center_matches_polar_quadrature():
    ball = Ball((3.0, 0.0), 1.0)

    def inner(r):
        # angular measure of the circle |x| = r inside the ball
        c = (r * r + 9.0 - 1.0) / (6.0 * r)
        return 2.0 * math.acos(max(-1.0, min(1.0, c))) * r ** 0.5 * r

    expected, _ = integrate.quad(inner, 2.0, 4.0, epsabs=0.0, epsrel=1e-12, limit=200)
    assert ball_integral(power(0.5, 2), ball) == pytest.approx(expected, rel=1e-8)


def test_ball_integral_diverges_at_the_origin():
    assert ball_integral(power(-2.0, 2), Ball((0.0, 0.0), 1.0)) == math.inf
    assert ball_integral(power(-1.0), Ball((0.0,), 1.0)) == math.inf


def test_ball_integral_general_weight_uses_quad():
    expected, _ = integrate.quad(lambda t: (1.0 + abs(t)) ** 2, -1.0, 2.0, points=[0.0])
    assert ball_integral(bracket(2.0), Ball((0.5,), 1.5)) == pytest.approx(expected, rel=1e-10)


def test_statistic_of_constant_is_one():
    assert muckenhoupt_statistic(constant(1), 2.0, Ball((0.3,), 0.1)) == 1.0


def test_statistic_diverges_for_dual_singularity():
    assert muckenhoupt_statistic(power(1.5), 2.0, Ball((0.0,), 1.0)) == math.inf


def test_statistic_matches_closed_form():
    # (1/2) (int |x|^0.5)^(1/2) (int |x|^-0.5)^(1/2) over [-1, 1]
    expected = 0.5 * math.sqrt(4.0 / 3.0) * math.sqrt(4.0)
    assert muckenhoupt_statistic(power(0.5), 2.0, Ball((0.0,), 1.0)) == pytest.approx(expected, rel=1e-12)


def test_statistic_is_reproducible_by_adaptive_quadrature():
    ball = Ball((0.4,), 1.0)
    direct, _ = integrate.quad(lambda t: abs(t) ** 0.5, -0.6, 1.4, points=[0.0], epsabs=0.0, epsrel=1e-12)
    dual, _ = integrate.quad(lambda t: abs(t) ** -0.5, -0.6, 1.4, points=[0.0], epsabs=0.0, epsrel=1e-12)
    expected = math.sqrt(direct) * math.sqrt(dual) / 2.0
    assert muckenhoupt_statistic(power(0.5), 2.0, ball) == pytest.approx(expected, rel=1e-8)


def test_check_ap_examples():
    assert check_ap(power(0.5), 2.0).verdict == Verdict.BOUNDED
    assert check_ap(power(1.5), 2.0).verdict == Verdict.DIVERGING
    report = check_ap(constant(1), 2.0)
    assert report.verdict == Verdict.BOUNDED
    assert report.supremum == 1.0


def test_check_ap_rejects_empty_family():
    with pytest.raises(ContractViolation):
        check_ap(power(0.5), 2.0, BallFamily((), (1.0,)))


def _grid_cells():
    cells = []
    for d in (1, 2):
        for p in (1.5, 2.0, 3.0, 4.0):
            lo, hi = power_ap_interval(d, p)
            for a in (lo - 0.5 * d, lo, 0.5 * lo, 0.0, 0.25 * hi, 0.5 * hi, hi, hi + 0.5 * d):
                cells.append((d, p, a))
    return cells


def test_check_ap_matches_the_power_interval_on_the_grid():
    cells = _grid_cells()
    assert len(cells) >= 60
    wrong = []
    for d, p, a in cells:
        lo, hi = power_ap_interval(d, p)
        expected = Verdict.BOUNDED if lo < a < hi else Verdict.DIVERGING
        verdict = check_ap(power(a, d), p).verdict
        near_endpoint = min(abs(a - lo), abs(a - hi)) <= 0.05 * d
        if verdict == Verdict.INCONCLUSIVE and near_endpoint:
            continue
        if verdict != expected:
            wrong.append((d, p, a, verdict))
    assert wrong == []


def test_lower_bound_for_positive_power():
    samples = np.geomspace(1e-6, 1e3, 200)[:, None]
    holds, worst = lower_bound_check(power(0.5), 1.0, 2.0, samples)
    assert holds
    assert worst >= 1.0


def test_lower_bound_for_constant_is_tight():
    holds, worst = lower_bound_check(constant(1), 0.0, 2.0, [[0.5], [2.0]])
    assert holds
    assert worst == 1.0


def test_lower_bound_samples_avoid_origin():
    with pytest.raises(ContractViolation):
        lower_bound_check(constant(1), 0.0, 2.0, [[0.0]])


@pytest.mark.parametrize("text", ["const", "pow:-0.5", "bracket:2.0", "decay:3.5", "derived:pow:1.0:p=3.0",
                                  "recip:pow:0.5:shift=0.25:power=0.5"])
def test_weight_strings_round_trip(text):
    w = parse_weight(text, 2)
    assert parse_weight(weight_id(w), 2) == w


def test_parse_weight_errors():
    with pytest.raises(ParseError):
        parse_weight("wiggle:1")
    with pytest.raises(ParseError):
        parse_weight("pow:abc")
    with pytest.raises(ParseError):
        parse_weight("derived:pow:1")
