"""
Numerical checks of the embedding inequalities between Fourier-Lebesgue,
Barron and weighted Sobolev spaces, and of the weighted Hausdorff-Young
inequalities.

Each check computes both sides by quadrature and reports LHS / RHS. The
constants of the inequalities are not explicit, so a check passes when the
ratio stays finite and stable over a family of targets.
"""
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import get_workers
from errors import ContractViolation, ParameterError
from function_catalog import (
    TargetFunction,
    barron_norm,
    fourier_lebesgue_norm,
    gaussian,
    spatial_radius,
    target_id,
    weighted_fourier_lebesgue_norm,
)
from norms import (
    DomainSpec,
    NormResult,
    ball,
    build_quadrature,
    char_fn_fl_norm,
    decay_weight_norm,
    full_space,
    weighted_lp_norm,
    weighted_sobolev_norm,
)
from weights import (
    WeightSpec,
    conjugate,
    constant,
    decay,
    is_radial_nondecreasing,
    lower_bound_check,
    power_ap_interval,
    power,
    power_exponent,
    reciprocal,
    sobolev_weight_from_upsilon,
)

log = logging.getLogger(__name__)


class CaseKind:
    """Enum-like class for the inequalities under test."""
    GENERAL = "thm-3.1"
    BARRON = "cor-barron"
    CONJUGATE = "cor-conjugate-fl"
    LOW_DEGREE = "lemma-low-degree"
    UNBOUNDED = "lemma-unbounded"
    HY_I = "hausdorff-young-I"
    HY_II = "hausdorff-young-II"
    HIGHER_ORDER = "higher-order"


ALL_CASES = (CaseKind.GENERAL, CaseKind.BARRON, CaseKind.CONJUGATE, CaseKind.LOW_DEGREE,
             CaseKind.UNBOUNDED, CaseKind.HY_I, CaseKind.HY_II, CaseKind.HIGHER_ORDER)

_TOL = 1e-12


@dataclass(frozen=True)
class EmbeddingCase:
    """
    One inequality with its parameters. Unset parameters take the canonical
    choice of the case (see resolved()).
    """
    which: str
    d: int = 1
    ell: int = 0
    p: float = 2.0
    q: Optional[float] = None
    gamma: float = 0.0
    tau0: Optional[float] = None
    tau1: Optional[float] = None
    tau2: Optional[float] = None
    t1: Optional[float] = None
    t2: Optional[float] = None
    r: Optional[float] = None
    u: Optional[float] = None
    t: Optional[float] = None       # higher-order: integrability of the FL side
    kappa: float = 0.0              # higher-order: Barron order
    domain: Optional[DomainSpec] = None
    upsilon: Optional[WeightSpec] = None
    resolution: int = 48

    def __post_init__(self):
        if self.which not in ALL_CASES:
            raise ContractViolation(f"unknown embedding case {self.which!r}")
        if self.d < 1 or self.ell < 0:
            raise ContractViolation("need d >= 1 and ell >= 0")

    def weight(self) -> WeightSpec:
        return self.upsilon or constant(self.d)

    def resolved(self) -> Dict[str, float]:
        """Effective parameters, with the Toft-Young indices where the case uses them."""
        p, d, g = self.p, self.d, self.gamma
        out: Dict[str, float] = {"p": p, "d": d, "gamma": g, "ell": self.ell}
        if self.which in (CaseKind.GENERAL, CaseKind.BARRON, CaseKind.CONJUGATE):
            if self.which == CaseKind.CONJUGATE:
                p = out["p"] = 2.0
                tau = self.tau2 if self.tau2 is not None else 1.0
                tau0, tau1, tau2 = 2.0, conjugate(tau), tau
            elif self.which == CaseKind.BARRON:
                tau2 = 1.0
                tau0 = self.tau0 if self.tau0 is not None else p
                tau1 = self.tau1 if self.tau1 is not None else 2.0 * conjugate(p / 2.0)
            else:
                q = self.q if self.q is not None else conjugate(p)
                tau0 = conjugate(q)
                tau1 = self.tau1 if self.tau1 is not None else 2.0 * conjugate(p / 2.0)
                tau2 = self.tau2 if self.tau2 is not None else 1.0
            q = conjugate(tau0)
            delta = d * (1.0 / conjugate(p) - _inv(q))
            out.update(q=q, tau0=tau0, tau1=tau1, tau2=tau2, delta=delta, t0=-g - delta,
                       t1=self.t1 if self.t1 is not None else g,
                       t2=self.t2 if self.t2 is not None else g)
            out["R"] = 2.0 - _inv(tau0) - _inv(tau1) - _inv(tau2)
        elif self.which == CaseKind.LOW_DEGREE:
            q = self.q if self.q is not None else p
            r = self.r if self.r is not None else max(p, 2.0)
            out.update(q=q, r=r, delta=d * (1.0 / conjugate(q) - 1.0 / r))
        elif self.which == CaseKind.UNBOUNDED:
            q = self.q if self.q is not None else 1.0
            inv_r = 1.0 / p - _inv(conjugate(q))
            r = math.inf if inv_r == 0.0 else (1.0 / inv_r if inv_r > 0 else -1.0)
            out.update(q=q, r=r, u=self.u if self.u is not None else float(d + 1))
        elif self.which in (CaseKind.HY_I, CaseKind.HY_II):
            q = self.q if self.q is not None else p
            out.update(q=q, delta=d * (1.0 / conjugate(p) - 1.0 / q))
        else:
            out.update(t=self.t if self.t is not None else 2.0, kappa=self.kappa)
        return out

    @property
    def case_id(self) -> str:
        return self.which


@dataclass
class RatioRecord:
    case_id: str
    function_id: str
    lhs: float
    rhs: float
    ratio: float
    uncertainty: float = 0.0
    factors: Tuple[float, ...] = ()
    constant: int = 1

    def __post_init__(self):
        values = (self.lhs, self.rhs, self.ratio, self.uncertainty) + tuple(self.factors)
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise ContractViolation(f"ratio record for {self.function_id} has invalid entries {values}")


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def multi_index_count(d: int, ell: int) -> int:
    """Number of multi-indices alpha in N^d with |alpha| <= ell."""
    return math.comb(d + ell, d)


def gaussian_family(d: int, n: int, lo: float = 0.25, hi: float = 4.0) -> List[TargetFunction]:
    """n centered Gaussians with log-spaced scales in [lo, hi]."""
    if n < 1:
        raise ContractViolation(f"family size must be positive, got {n}")
    scales = np.geomspace(lo, hi, n) if n > 1 else np.array([lo])
    return [gaussian(d, float(s)) for s in scales]


# ---------------------------------------------------------------------------
# Parameter validation
# ---------------------------------------------------------------------------

def _toft_violations(v: Dict[str, float]) -> List[str]:
    out = []
    R, d = v["R"], v["d"]
    t = (v["t0"], v["t1"], v["t2"])
    if not (-_TOL <= R <= 0.5 + _TOL):
        out.append("toft-R-range")
    for j, k in ((0, 1), (0, 2), (1, 2)):
        if t[j] + t[k] < -_TOL:
            out.append(f"toft-pair-{j}{k}")
    slack = sum(t) - d * R
    if slack < -_TOL:
        out.append("toft-sum")
    elif R > _TOL and abs(slack) <= _TOL and any(abs(tj - d * R) <= _TOL for tj in t):
        out.append("toft-strict")
    return out


def _tau0_interval(p: float, tau1: float) -> Optional[Tuple[float, float]]:
    """Feasible tau0 for a Barron right-hand side; None when tau1 < p'."""
    pp = conjugate(p)
    if tau1 < pp - _TOL:
        return None
    if tau1 <= 2.0:
        return conjugate(tau1), p
    cap = min(p, 2.0 * conjugate(tau1 / 2.0))
    if tau1 <= p:
        return conjugate(tau1), cap
    return pp, cap


def _weight_violations(case: EmbeddingCase, ap_index: float, gamma: Optional[float] = None,
                       p: float = 2.0) -> List[str]:
    out = []
    w = case.weight()
    if w.d != case.d:
        out.append("upsilon-dimension")
        return out
    if not is_radial_nondecreasing(w):
        out.append("upsilon-monotone")
    a = power_exponent(w)
    if a is not None and ap_index > 1:
        lo, hi = power_ap_interval(case.d, ap_index)
        if not (lo < a < hi):
            out.append("upsilon-ap")
    if gamma is not None:
        points = np.outer(np.geomspace(1e-3, 1e3, 61), np.eye(case.d)[0])
        holds, _ = lower_bound_check(w, gamma, p, points)
        if not holds:
            out.append("upsilon-lower")
    return out


def validate_params(case: EmbeddingCase) -> List[str]:
    """
    Names of every violated hypothesis of the case; an empty list means pass.
    """
    v = case.resolved()
    p = v["p"]
    out: List[str] = []
    which = case.which
    if which in (CaseKind.GENERAL, CaseKind.BARRON, CaseKind.CONJUGATE):
        pp = conjugate(p)
        if not (2.0 <= p < math.inf):
            out.append("p-range")
        q = v["q"]
        if not (1.0 < pp <= q + _TOL and q <= p + _TOL):
            out.append("hausdorff-young-order")
        if v["gamma"] < -v["delta"] - _TOL:
            out.append("gamma-lower")
        if which == CaseKind.BARRON:
            interval = _tau0_interval(p, v["tau1"])
            if interval is None:
                out.append("tau1-range")
            elif not (interval[0] - _TOL <= v["tau0"] <= interval[1] + _TOL):
                out.append("tau0-interval")
        out.extend(_toft_violations(v))
        out.extend(_weight_violations(case, pp, v["gamma"], p))
        if case.domain is None or not case.domain.bounded:
            out.append("domain-bounded")
    elif which == CaseKind.LOW_DEGREE:
        q, r = v["q"], v["r"]
        if not (1.0 < p < math.inf and 1.0 < q < math.inf and 1.0 < r < math.inf):
            out.append("exponent-range")
        if not (1.0 < q <= r + _TOL and r <= conjugate(q) + _TOL):
            out.append("hausdorff-young-order")
        if p > r + _TOL:
            out.append("p-le-r")
        out.extend(_weight_violations(case, q))
        if case.domain is None or not case.domain.bounded:
            out.append("domain-bounded")
    elif which == CaseKind.UNBOUNDED:
        q, r = v["q"], v["r"]
        if not (1.0 <= q <= 2.0 + _TOL and 2.0 <= p < math.inf):
            out.append("exponent-order")
        if r < 0:
            out.append("hoelder-split")
        elif not (math.isinf(r) or v["u"] * r > case.d):
            out.append("decay-integrable")
    elif which == CaseKind.HY_I:
        q = v["q"]
        if not (1.0 < p <= q + _TOL and q <= conjugate(p) + _TOL and not math.isinf(q)):
            out.append("hausdorff-young-order")
        out.extend(_weight_violations(case, p))
    elif which == CaseKind.HY_II:
        q = v["q"]
        if not (1.0 < conjugate(p) <= q + _TOL and q <= p + _TOL and not math.isinf(p)):
            out.append("hausdorff-young-order")
        out.extend(_weight_violations(case, conjugate(p)))
    else:
        if v["t"] < 1.0:
            out.append("t-range")
        if v["kappa"] < 0:
            out.append("kappa-range")
    return out


def _require_valid(case: EmbeddingCase):
    violations = validate_params(case)
    if violations:
        raise ParameterError(f"{case.which} hypotheses fail: {', '.join(violations)}")


# ---------------------------------------------------------------------------
# Ratios
# ---------------------------------------------------------------------------

def _record(case: EmbeddingCase, fn: TargetFunction, lhs: NormResult, factors: Sequence[float],
            rhs_unc: float = 0.0) -> RatioRecord:
    rhs = float(np.prod(factors))
    value = float(lhs)
    ratio = 0.0 if value == 0.0 else value / rhs
    rel = (lhs.tail_bound / value if value > 0 else 0.0) + (rhs_unc / rhs if rhs > 0 else 0.0)
    return RatioRecord(case.case_id, target_id(fn), value, rhs, ratio, ratio * rel,
                       tuple(float(f) for f in factors), multi_index_count(case.d, case.ell))


def _whole_space(fn: TargetFunction) -> DomainSpec:
    """A ball outside which fn is negligible."""
    R = spatial_radius(fn)
    if not math.isfinite(R):
        raise ContractViolation(f"{fn.kind} decays too slowly for a whole-space spatial norm")
    return ball((0.0,) * fn.d, R)


def _indicator_factor(dom: DomainSpec, q: float, gamma: float) -> Tuple[float, float]:
    if q == 2.0 and gamma == 0.0:
        return math.sqrt(dom.volume()), 0.0
    res = char_fn_fl_norm(dom, q, gamma)
    return float(res), res.tail_bound


def verify_embedding(case: EmbeddingCase, fn: TargetFunction) -> RatioRecord:
    """LHS / RHS of the case's inequality for one target."""
    if case.which in (CaseKind.HY_I, CaseKind.HY_II):
        return hausdorff_young_check(fn, case)
    if case.which == CaseKind.HIGHER_ORDER:
        v = case.resolved()
        return higher_order_embedding_check(fn, v["kappa"], v["t"], case)
    _require_valid(case)
    if fn.d != case.d:
        raise ContractViolation(f"target has dimension {fn.d}, case has {case.d}")
    v = case.resolved()
    p, ell = v["p"], case.ell

    if case.which == CaseKind.UNBOUNDED:
        omega = decay(v["u"], case.d)
        grid = build_quadrature(full_space(case.d), omega, case.resolution, p)
        lhs = weighted_sobolev_norm(fn, ell, p, omega, grid)
        decay_norm = 1.0 if math.isinf(v["r"]) else decay_weight_norm(v["u"], v["r"], case.d)
        factors = [decay_norm, fourier_lebesgue_norm(fn, v["q"], ell)]
        return _record(case, fn, lhs, factors)

    dom = case.domain
    if case.which == CaseKind.LOW_DEGREE:
        q, r = v["q"], v["r"]
        upsilon = case.weight()
        spatial = reciprocal(upsilon, v["delta"], 1.0 / q)
        freq = reciprocal(upsilon, 0.0, 1.0 / q)
        grid = build_quadrature(dom, spatial, case.resolution, p)
        lhs = weighted_sobolev_norm(fn, ell, p, spatial, grid)
        factors = [dom.volume() ** (1.0 / p - 1.0 / r), weighted_fourier_lebesgue_norm(fn, freq, q, float(ell))]
        return _record(case, fn, lhs, factors)

    omega = sobolev_weight_from_upsilon(case.weight(), p)
    grid = build_quadrature(dom, omega, case.resolution, p)
    lhs = weighted_sobolev_norm(fn, ell, p, omega, grid)
    chi, chi_unc = _indicator_factor(dom, v["tau1"], v["t1"])
    order = v["t2"] + ell
    if v["tau2"] == 1.0:
        target = barron_norm(fn, order)
    else:
        target = fourier_lebesgue_norm(fn, v["tau2"], order)
    return _record(case, fn, lhs, [chi, target], chi_unc * target)


def embedding_constant_scan(case: EmbeddingCase, family: Sequence[TargetFunction],
                            workers: Optional[int] = None) -> Tuple[float, List[RatioRecord]]:
    """Largest ratio over the family: an empirical lower bound on the embedding constant."""
    if not family:
        raise ContractViolation("target family is empty")
    workers = workers or get_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda fn: verify_embedding(case, fn), family))
    else:
        records = [verify_embedding(case, fn) for fn in family]
    worst = max(rec.ratio for rec in records)
    log.info("%s over %d targets: max ratio %.6g", case.which, len(records), worst)
    return worst, records


def hausdorff_young_check(fn: TargetFunction, case: EmbeddingCase) -> RatioRecord:
    """
    Type I:  ||f||_{FL^q(theta)} / ||f||_{L^p(omega)},  omega = v^(1/p)
    Type II: ||f||_{FL^p(omega)} / ||f||_{L^q(theta)},  omega = v^(-1/p')
    with theta(x) = |x|^(d(1/p' - 1/q)) omega(1/|x|) in both.
    """
    if case.which not in (CaseKind.HY_I, CaseKind.HY_II):
        raise ContractViolation(f"{case.which} is not a Hausdorff-Young case")
    _require_valid(case)
    if fn.d != case.d:
        raise ContractViolation(f"target has dimension {fn.d}, case has {case.d}")
    v = case.resolved()
    p, q, delta = v["p"], v["q"], v["delta"]
    upsilon = case.weight()
    dom = _whole_space(fn)
    if case.which == CaseKind.HY_I:
        omega = _power_root(upsilon, 1.0 / p)
        theta = reciprocal(upsilon, delta, 1.0 / p)
        grid = build_quadrature(dom, omega, case.resolution, p)
        spatial = weighted_lp_norm(fn, omega, p, grid)
        freq = weighted_fourier_lebesgue_norm(fn, theta, q)
        return _record(case, fn, NormResult(freq), [float(spatial)], spatial.tail_bound)
    omega = sobolev_weight_from_upsilon(upsilon, p)
    theta = reciprocal(omega, delta, 1.0)
    grid = build_quadrature(dom, theta, case.resolution, q)
    spatial = weighted_lp_norm(fn, theta, q, grid)
    freq = weighted_fourier_lebesgue_norm(fn, omega, p)
    return _record(case, fn, NormResult(freq), [float(spatial)], spatial.tail_bound)


def _power_root(upsilon: WeightSpec, e: float) -> WeightSpec:
    """upsilon^e for a pure power upsilon."""
    a = power_exponent(upsilon)
    if a is None:
        raise ContractViolation("Hausdorff-Young checks need a pure power upsilon")
    return constant(upsilon.d) if a * e == 0.0 else power(a * e, upsilon.d)


def higher_order_embedding_check(fn: TargetFunction, kappa: float, t: float,
                                 case: Optional[EmbeddingCase] = None) -> RatioRecord:
    """
    ||f||_{B^kappa} / (||<.>^-(d+1)||_{L^1}^(1-1/t) ||f||_{FL^t_(kappa+sigma)}),
    sigma = (d+1)(1-1/t). Hoelder's inequality makes the ratio at most 1.
    """
    if t < 1:
        raise ParameterError(f"t must be >= 1, got {t}")
    case = case or EmbeddingCase(CaseKind.HIGHER_ORDER, d=fn.d, t=t, kappa=kappa)
    d = fn.d
    sigma = (d + 1) * (1.0 - _inv(t))
    lhs = barron_norm(fn, kappa)
    factors = [decay_weight_norm(d + 1.0, 1.0, d) ** (1.0 - _inv(t)),
               fourier_lebesgue_norm(fn, t, kappa + sigma)]
    return _record(case, fn, NormResult(lhs), factors)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

RECORD_FIELDS = ["case", "function", "lhs", "rhs", "ratio", "uncertainty", "constant"]


def write_records(records: Sequence[RatioRecord], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for rec in records:
            writer.writerow([rec.case_id, rec.function_id, repr(rec.lhs), repr(rec.rhs), repr(rec.ratio),
                             repr(rec.uncertainty), rec.constant])
    log.info("wrote %d ratio records to %s", len(records), path)


def read_records(path: str) -> List[RatioRecord]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [RatioRecord(row["case"], row["function"], float(row["lhs"]), float(row["rhs"]),
                        float(row["ratio"]), float(row["uncertainty"]), (), int(row["constant"]))
            for row in rows]
