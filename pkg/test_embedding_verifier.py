import math
from dataclasses import replace

import pytest

from embedding_verifier import (
    CaseKind,
    EmbeddingCase,
    embedding_constant_scan,
    gaussian_family,
    hausdorff_young_check,
    higher_order_embedding_check,
    multi_index_count,
    read_records,
    validate_params,
    verify_embedding,
    write_records,
)
from errors import ContractViolation, DivergingNormError, ParameterError
from function_catalog import cauchy, gaussian, scaled
from norms import box, full_space
from weights import decay, power

UNIT = box([(-1.0, 1.0)])
SQUARE = box([(-1.0, 1.0), (-1.0, 1.0)])

# (p, tau0, tau1, gamma, violations) for the Barron case in one dimension
BARRON_TABLE = [
    (2.0, None, math.inf, 0.6, set()),
    (2.0, None, math.inf, 0.5, {"toft-strict"}),
    (2.0, None, math.inf, 0.4, {"toft-sum"}),
    (2.0, None, 2.0, 0.6, set()),
    (2.0, None, 1.5, 0.6, {"tau1-range", "toft-R-range"}),
    (2.0, None, 4.0, 0.6, set()),
    (2.0, 3.0, None, 0.6, {"hausdorff-young-order", "tau0-interval", "toft-R-range"}),
    (2.0, 1.5, None, 0.6, {"hausdorff-young-order", "tau0-interval", "toft-pair-01", "toft-pair-02"}),
    (3.0, None, 6.0, 0.6, set()),
    (3.0, None, 6.0, 0.5, {"toft-strict"}),
    (3.0, None, 7.0, 0.6, {"tau0-interval", "toft-R-range"}),
    (3.0, None, 1.5, 0.6, set()),
    (3.0, None, 1.4, 0.6, {"tau1-range", "toft-R-range"}),
    (3.0, None, 3.0, 0.6, set()),
    (3.0, None, 2.0, 0.6, set()),
    (3.0, None, 2.0, 1.0 / 6.0, {"toft-strict"}),
    (4.0, None, 4.0, 0.6, set()),
    (4.0, None, 4.0, 0.5, {"toft-strict"}),
    (4.0, None, 4.0, 0.4, {"toft-sum"}),
    (4.0, None, 5.0, 0.6, {"tau0-interval", "toft-R-range"}),
    (4.0, None, 4.0 / 3.0, 0.6, set()),
    (4.0, None, 1.2, 0.6, {"tau1-range", "toft-R-range"}),
    (4.0, None, 3.0, 0.6, set()),
    (4.0, None, 4.0, -0.1, {"gamma-lower", "toft-pair-12", "toft-sum", "upsilon-lower"}),
    (6.0, None, 3.0, 0.6, set()),
    (6.0, None, 3.0, 0.5, {"toft-strict"}),
    (6.0, None, 3.5, 0.6, {"tau0-interval", "toft-R-range"}),
    (6.0, None, 1.2, 0.6, set()),
    (6.0, None, 2.0, 0.6, set()),
    (6.0, None, 6.0, 0.6, {"tau0-interval", "toft-R-range", "toft-sum"}),
]


@pytest.mark.parametrize("p,tau0,tau1,gamma,expected", BARRON_TABLE)
def test_barron_parameter_table(p, tau0, tau1, gamma, expected):
    case = EmbeddingCase(CaseKind.BARRON, p=p, tau0=tau0, tau1=tau1, gamma=gamma, domain=UNIT)
    assert set(validate_params(case)) == expected


def test_barron_parameters_in_the_plane():
    assert validate_params(EmbeddingCase(CaseKind.BARRON, d=2, gamma=1.2, domain=SQUARE)) == []
    assert validate_params(EmbeddingCase(CaseKind.BARRON, d=2, gamma=1.0, domain=SQUARE)) == ["toft-strict"]


def test_missing_domain():
    assert validate_params(EmbeddingCase(CaseKind.BARRON, gamma=0.6)) == ["domain-bounded"]
    assert validate_params(EmbeddingCase(CaseKind.BARRON, gamma=0.6, domain=full_space(1))) == ["domain-bounded"]


def test_general_and_conjugate_defaults_pass():
    assert validate_params(EmbeddingCase(CaseKind.GENERAL, gamma=0.6, domain=UNIT)) == []
    assert validate_params(EmbeddingCase(CaseKind.CONJUGATE, gamma=0.6, domain=UNIT)) == []


def test_weight_hypotheses():
    case = EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.6, domain=UNIT, upsilon=decay(1.0))
    assert "upsilon-monotone" in validate_params(case)
    case = EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.6, domain=UNIT, upsilon=power(1.5))
    assert "upsilon-ap" in validate_params(case)
    case = EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.6, domain=UNIT, upsilon=power(0.5, 2))
    assert validate_params(case) == ["upsilon-dimension"]


def test_unbounded_parameters():
    assert validate_params(EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=2.0)) == []
    assert "exponent-order" in validate_params(EmbeddingCase(CaseKind.UNBOUNDED, q=3.0))
    assert "hoelder-split" in validate_params(EmbeddingCase(CaseKind.UNBOUNDED, q=2.0, p=4.0))
    assert "decay-integrable" in validate_params(EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=0.4))


def test_low_degree_defaults():
    case = EmbeddingCase(CaseKind.LOW_DEGREE, p=1.5, domain=UNIT)
    v = case.resolved()
    assert v["q"] == 1.5 and v["r"] == 2.0
    assert v["delta"] == pytest.approx(1.0 / 3.0 - 0.5)
    assert validate_params(case) == []


def test_unknown_case():
    with pytest.raises(ContractViolation):
        EmbeddingCase("lemma-9")


def test_multi_index_count():
    assert multi_index_count(1, 0) == 1
    assert multi_index_count(2, 1) == 3
    assert multi_index_count(3, 2) == 10


# ---------------------------------------------------------------------------
# Ratios
# ---------------------------------------------------------------------------

def test_barron_embedding_on_the_unit_interval(gauss1, gauss_l2_box):
    case = EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.0, domain=UNIT)
    rec = verify_embedding(case, gauss1)
    assert rec.lhs == pytest.approx(gauss_l2_box, rel=1e-10)
    assert rec.rhs == pytest.approx(math.sqrt(2.0) * math.sqrt(2.0 * math.pi), rel=1e-8)
    assert rec.ratio < 1.0
    assert rec.constant == 1


def test_zero_target_has_zero_ratio(gauss1):
    case = EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.0, domain=UNIT)
    rec = verify_embedding(case, scaled(gauss1, 0.0))
    assert rec.ratio == 0.0


def test_invalid_case_is_refused(gauss1):
    with pytest.raises(ParameterError):
        verify_embedding(EmbeddingCase(CaseKind.BARRON, gamma=0.4, domain=UNIT), gauss1)


def test_dimension_mismatch(gauss2):
    with pytest.raises(ContractViolation):
        verify_embedding(EmbeddingCase(CaseKind.BARRON, tau1=2.0, domain=UNIT), gauss2)


def test_unbounded_embedding_with_a_decay_weight(gauss1):
    case = EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=2.0)
    rec = verify_embedding(case, gauss1)
    assert rec.factors[0] == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)
    assert rec.ratio <= 1.0


def test_box_indicator_too_rough_for_the_weight(gauss1):
    # the parameters are admissible but the box indicator is not in FL^2 with weight <xi>^0.6
    case = EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.6, domain=UNIT)
    assert validate_params(case) == []
    with pytest.raises(DivergingNormError) as info:
        verify_embedding(case, gauss1)
    assert info.value.factor == "indicator"


def test_ratios_are_scale_invariant(gauss1):
    case = EmbeddingCase(CaseKind.BARRON, tau1=4.0, gamma=0.6, domain=UNIT)
    ratios = [verify_embedding(case, scaled(gauss1, c)).ratio for c in (1.0, 2.0, 3.0)]
    assert ratios[1] == pytest.approx(ratios[0], rel=1e-12)
    assert ratios[2] == pytest.approx(ratios[0], rel=1e-12)


def test_scan_of_a_single_target(gauss1):
    case = EmbeddingCase(CaseKind.BARRON, tau1=4.0, gamma=0.6, domain=UNIT)
    worst, records = embedding_constant_scan(case, [gauss1])
    assert len(records) == 1
    assert worst == records[0].ratio


def test_scan_in_parallel_matches_serial():
    case = EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=2.0)
    family = gaussian_family(1, 4)
    serial = embedding_constant_scan(case, family, workers=1)
    parallel = embedding_constant_scan(case, family, workers=3)
    assert serial[0] == parallel[0]
    assert [r.ratio for r in serial[1]] == [r.ratio for r in parallel[1]]


def test_scan_needs_targets():
    with pytest.raises(ContractViolation):
        embedding_constant_scan(EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=2.0), [])


def test_gaussian_family():
    family = gaussian_family(2, 5)
    assert len(family) == 5
    assert family[0].scales[0] == pytest.approx(0.25)
    assert family[-1].scales[0] == pytest.approx(4.0)
    with pytest.raises(ContractViolation):
        gaussian_family(1, 0)


def test_hausdorff_young_is_plancherel_at_two():
    for fn in (gaussian(1), gaussian(1, scale=2.0, center=[0.5]), gaussian(2, scale=0.7)):
        case = EmbeddingCase(CaseKind.HY_I, d=fn.d, p=2.0)
        assert hausdorff_young_check(fn, case).ratio == pytest.approx(1.0, rel=1e-6)


def test_hausdorff_young_with_a_power_weight(gauss1):
    case = EmbeddingCase(CaseKind.HY_II, p=2.0, upsilon=power(0.5))
    first = hausdorff_young_check(gauss1, case)
    doubled = hausdorff_young_check(scaled(gauss1, 2.0), case)
    assert math.isfinite(first.ratio) and first.ratio > 0.0
    assert doubled.ratio == pytest.approx(first.ratio, rel=1e-12)


def test_hausdorff_young_needs_a_decaying_target():
    with pytest.raises(ContractViolation):
        hausdorff_young_check(cauchy(1), EmbeddingCase(CaseKind.HY_I, p=2.0))


def test_hausdorff_young_rejects_other_cases(gauss1):
    with pytest.raises(ContractViolation):
        hausdorff_young_check(gauss1, EmbeddingCase(CaseKind.UNBOUNDED))


@pytest.mark.parametrize("kappa,t", [(0.0, 1.0), (0.5, 2.0), (1.0, 4.0)])
def test_higher_order_ratio_is_at_most_one(gauss1, kappa, t):
    rec = higher_order_embedding_check(gauss1, kappa, t)
    assert 0.0 < rec.ratio <= 1.0 + 1e-9


def test_higher_order_rejects_small_t(gauss1):
    with pytest.raises(ParameterError):
        higher_order_embedding_check(gauss1, 0.0, 0.5)


def test_records_round_trip(tmp_path, gauss1):
    case = EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=2.0)
    _, records = embedding_constant_scan(case, gaussian_family(1, 3))
    path = tmp_path / "ratios.csv"
    write_records(records, str(path))
    back = read_records(str(path))
    assert [(r.case_id, r.function_id, r.lhs, r.rhs, r.ratio, r.uncertainty, r.constant) for r in back] == \
        [(r.case_id, r.function_id, r.lhs, r.rhs, r.ratio, r.uncertainty, r.constant) for r in records]


REFINEMENT_CASES = [
    EmbeddingCase(CaseKind.BARRON, tau1=2.0, gamma=0.0, domain=UNIT),
    EmbeddingCase(CaseKind.BARRON, p=2.0, gamma=0.6, domain=UNIT),
    EmbeddingCase(CaseKind.BARRON, p=4.0, tau1=4.0, gamma=0.6, domain=UNIT),
    EmbeddingCase(CaseKind.LOW_DEGREE, p=1.5, domain=UNIT),
    EmbeddingCase(CaseKind.UNBOUNDED, q=1.0, u=2.0),
]


@pytest.mark.slow
@pytest.mark.parametrize("case", REFINEMENT_CASES, ids=lambda c: c.which)
def test_constant_estimate_is_stable_under_refinement(case):
    coarse, _ = embedding_constant_scan(case, gaussian_family(1, 10))
    fine_case = replace(case, resolution=2 * case.resolution)
    fine, _ = embedding_constant_scan(fine_case, gaussian_family(1, 20))
    assert math.isfinite(coarse) and math.isfinite(fine)
    assert abs(fine - coarse) <= 0.02 * coarse
