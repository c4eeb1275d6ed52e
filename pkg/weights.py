"""
Weight functions on R^d and the Muckenhoupt A_p machinery.

Every weight here is radial, so evaluation goes through the radius |x|.
The bracket is fixed as <x> = 1 + |x|.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from errors import ContractViolation, ParseError

log = logging.getLogger(__name__)


class WeightKind:
    """Enum-like class for weight families."""
    CONSTANT = "constant"
    POWER = "power"            # |x|^a
    BRACKET = "bracket"        # <x>^s
    DECAY = "decay"            # <x>^-u
    DERIVED = "derived"        # base^(-1/p')
    RECIPROCAL = "reciprocal"  # |x|^shift * base(1/|x|)^power


@dataclass(frozen=True)
class WeightSpec:
    kind: str
    exponent: float = 0.0
    d: int = 1
    p_prime: Optional[float] = None
    base: Optional["WeightSpec"] = None
    power: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ContractViolation(f"weight dimension must be positive, got {self.d}")
        if self.kind == WeightKind.DERIVED:
            if self.base is None or self.p_prime is None or self.p_prime <= 1:
                raise ContractViolation("derived weight needs a base and p' > 1")
        if self.kind == WeightKind.RECIPROCAL:
            if self.base is None:
                raise ContractViolation("reciprocal weight needs a base")
            if self.base.kind == WeightKind.RECIPROCAL:
                raise ContractViolation("nested reciprocal weights are not supported")
            if self.power <= 0:
                raise ContractViolation("reciprocal weight power must be positive")
        if self.kind == WeightKind.DECAY and self.exponent < 0:
            raise ContractViolation(f"decay exponent must be nonnegative, got {self.exponent}")


def constant(d: int = 1) -> WeightSpec:
    return WeightSpec(WeightKind.CONSTANT, 0.0, d)


def power(alpha: float, d: int = 1) -> WeightSpec:
    return WeightSpec(WeightKind.POWER, float(alpha), d)


def bracket(s: float, d: int = 1) -> WeightSpec:
    return WeightSpec(WeightKind.BRACKET, float(s), d)


def decay(u: float, d: int = 1) -> WeightSpec:
    return WeightSpec(WeightKind.DECAY, float(u), d)


def reciprocal(base: WeightSpec, shift: float = 0.0, power_: float = 1.0) -> WeightSpec:
    """|x|^shift * base(1/|x|)^power_, the shape used by the Hausdorff-Young weights."""
    return WeightSpec(WeightKind.RECIPROCAL, float(shift), base.d, base=base, power=float(power_))


def conjugate(p: float) -> float:
    """Hoelder conjugate with 1' = inf and inf' = 1."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# Exponent arithmetic
# ---------------------------------------------------------------------------

def power_exponent(w: WeightSpec) -> Optional[float]:
    """Exponent a when w(x) = |x|^a exactly, None otherwise."""
    if w.kind == WeightKind.CONSTANT:
        return 0.0
    if w.kind == WeightKind.POWER:
        return w.exponent
    if w.kind in (WeightKind.BRACKET, WeightKind.DECAY):
        return 0.0 if w.exponent == 0 else None
    base = power_exponent(w.base)
    if base is None:
        return None
    if w.kind == WeightKind.DERIVED:
        return -base / w.p_prime
    return w.exponent - w.power * base


def origin_exponent(w: WeightSpec) -> float:
    """k such that w(x) behaves like |x|^k as x -> 0."""
    if w.kind == WeightKind.POWER:
        return w.exponent
    if w.kind in (WeightKind.CONSTANT, WeightKind.BRACKET, WeightKind.DECAY):
        return 0.0
    if w.kind == WeightKind.DERIVED:
        return -origin_exponent(w.base) / w.p_prime
    return w.exponent - w.power * infinity_exponent(w.base)


def infinity_exponent(w: WeightSpec) -> float:
    """k such that w(x) behaves like |x|^k as |x| -> inf."""
    if w.kind == WeightKind.CONSTANT:
        return 0.0
    if w.kind in (WeightKind.POWER, WeightKind.BRACKET):
        return w.exponent
    if w.kind == WeightKind.DECAY:
        return -w.exponent
    if w.kind == WeightKind.DERIVED:
        return -infinity_exponent(w.base) / w.p_prime
    return w.exponent - w.power * origin_exponent(w.base)


def _monotonicity(w: WeightSpec) -> Optional[int]:
    # +1 nondecreasing, -1 nonincreasing, 0 constant, None neither
    if w.kind == WeightKind.CONSTANT:
        return 0
    if w.kind in (WeightKind.POWER, WeightKind.BRACKET):
        return int(np.sign(w.exponent))
    if w.kind == WeightKind.DECAY:
        return -int(np.sign(w.exponent))
    base = _monotonicity(w.base)
    if base is None:
        return None
    if w.kind == WeightKind.DERIVED:
        return -base
    outer = int(np.sign(w.exponent))
    inner = -base
    if outer == 0 or inner == 0 or outer == inner:
        return outer or inner
    return None


def is_radial_nondecreasing(w: WeightSpec) -> bool:
    return _monotonicity(w) in (0, 1)


def is_singular_at_origin(w: WeightSpec) -> bool:
    return origin_exponent(w) < 0


def power_ap_interval(d: int, p: float) -> Tuple[float, float]:
    """Open interval of exponents a with |x|^a in A_p(R^d)."""
    if p <= 1:
        raise ContractViolation(f"A_p needs p > 1, got {p}")
    return -float(d), d * (p - 1.0)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def radial_value(w: WeightSpec, r) -> np.ndarray:
    """Weight value as a function of the radius r >= 0 (vectorized)."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if w.kind == WeightKind.CONSTANT:
            return np.ones_like(r)
        if w.kind == WeightKind.POWER:
            if w.exponent == 0:
                return np.ones_like(r)
            return np.power(r, w.exponent)
        if w.kind == WeightKind.BRACKET:
            return np.power(1.0 + r, w.exponent)
        if w.kind == WeightKind.DECAY:
            return np.power(1.0 + r, -w.exponent)
        if w.kind == WeightKind.DERIVED:
            return np.power(radial_value(w.base, r), -1.0 / w.p_prime)
        # reciprocal: the origin value is fixed by the leading exponent
        out = np.empty_like(r)
        at_zero = r == 0
        pos = ~at_zero
        out[pos] = np.power(r[pos], w.exponent) * np.power(radial_value(w.base, 1.0 / r[pos]), w.power)
        k = origin_exponent(w)
        out[at_zero] = np.inf if k < 0 else (0.0 if k > 0 else 1.0)
        return out


def eval_weight(w: WeightSpec, x) -> np.ndarray:
    """
    Pointwise weight value at x, shape (d,) or (n, d).

    Returns +inf only at the origin for weights singular there.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != w.d:
        raise ContractViolation(f"point has dimension {x.shape[-1]}, weight has {w.d}")
    return radial_value(w, np.linalg.norm(x, axis=-1))


def sobolev_weight_from_upsilon(upsilon: WeightSpec, p: float) -> WeightSpec:
    """omega = upsilon^(-1/p') with p' = p/(p-1)."""
    if not (1 < p < math.inf):
        raise ContractViolation(f"p must lie in (1, inf), got {p}")
    return WeightSpec(WeightKind.DERIVED, 0.0, upsilon.d, p_prime=p / (p - 1.0), base=upsilon)


# ---------------------------------------------------------------------------
# Ball integrals
# ---------------------------------------------------------------------------

def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^(d-1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(d: int, radius: float) -> float:
    return sphere_area(d) * radius ** d / d


@dataclass(frozen=True)
class Ball:
    center: Tuple[float, ...]
    radius: float

    @property
    def d(self) -> int:
        return len(self.center)


def _interval_power_integral(a: float, b: float, beta: float) -> float:
    """Closed-form integral of |x|^beta over [a, b]."""
    if a <= 0.0 <= b and beta <= -1.0:
        return math.inf
    if beta == -1.0:
        lo, hi = sorted((abs(a), abs(b)))
        return math.log(hi / lo)

    def antiderivative(t):
        return math.copysign(abs(t) ** (beta + 1.0), t) / (beta + 1.0)

    return antiderivative(b) - antiderivative(a)


def _radial_antiderivative(l1, l2, k: float):
    # integral of r^(k-1) dr over [l1, l2]
    if k == 0:
        return np.log(l2 / l1)
    return (np.power(l2, k) - np.power(l1, k)) / k


def ball_integral(w: WeightSpec, ball: Ball, e: float = 1.0, nodes: int = 200) -> float:
    """
    Integral of w^e over a ball.

    Pure powers use the radial antiderivative along rays from the origin,
    with Gauss-Legendre in the angle to the ball axis (exact in d = 1).
    Other weights integrate the radial profile with scipy's adaptive quad.
    """
    d = ball.d
    if d != w.d:
        raise ContractViolation(f"ball has dimension {d}, weight has {w.d}")
    if ball.radius <= 0:
        raise ContractViolation(f"ball radius must be positive, got {ball.radius}")
    c = np.asarray(ball.center, dtype=float)
    R = float(ball.radius)
    rc = float(np.linalg.norm(c))
    a = power_exponent(w)
    beta = None if a is None else a * e

    if d == 1:
        lo, hi = c[0] - R, c[0] + R
        if beta is not None:
            return _interval_power_integral(lo, hi, beta)
        points = [0.0] if lo < 0.0 < hi else None
        value, _ = integrate.quad(lambda t: float(radial_value(w, abs(t)) ** e), lo, hi, points=points, limit=200)
        return value

    k = d + beta if beta is not None else None
    if rc <= R:
        if k is not None and k <= 0:
            return math.inf
        # rays leave the ball at L(theta); split where L has a kink when the origin is on the sphere
        pieces = [(0.0, math.pi)] if rc < R else [(0.0, math.pi / 2.0)]
        total = 0.0
        for t0, t1 in pieces:
            x, wts = np.polynomial.legendre.leggauss(nodes)
            theta = 0.5 * (t1 - t0) * x + 0.5 * (t1 + t0)
            wts = 0.5 * (t1 - t0) * wts
            s = np.sin(theta)
            L = rc * np.cos(theta) + np.sqrt(np.maximum(R * R - rc * rc * s * s, 0.0))
            if k is not None:
                inner = np.power(L, k) / k
            else:
                inner = np.array([_radial_quad(w, e, d, 0.0, li) for li in L])
            total += float(np.sum(wts * s ** (d - 2) * inner))
        return sphere_area(d - 1) * total

    # origin outside: substitute sin(theta) = (R/rc) sin(psi) to remove the tangency singularity
    x, wts = np.polynomial.legendre.leggauss(nodes)
    psi = 0.25 * math.pi * (x + 1.0)
    wts = 0.25 * math.pi * wts
    sin_t = (R / rc) * np.sin(psi)
    cos_t = np.sqrt(1.0 - sin_t ** 2)
    jac = (R / rc) * np.cos(psi) / cos_t
    half = R * np.cos(psi)
    l1 = rc * cos_t - half
    l2 = rc * cos_t + half
    if k is not None:
        inner = _radial_antiderivative(l1, l2, k)
    else:
        inner = np.array([_radial_quad(w, e, d, a_, b_) for a_, b_ in zip(l1, l2)])
    return sphere_area(d - 1) * float(np.sum(wts * jac * sin_t ** (d - 2) * inner))


def _radial_quad(w: WeightSpec, e: float, d: int, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    value, _ = integrate.quad(lambda r: float(radial_value(w, r) ** e) * r ** (d - 1), lo, hi, limit=200)
    return value


# ---------------------------------------------------------------------------
# Muckenhoupt statistic and verdicts
# ---------------------------------------------------------------------------

def muckenhoupt_statistic(upsilon: WeightSpec, p: float, ball: Ball) -> float:
    """(1/|B|) (int_B v)^(1/p) (int_B v^(1-p'))^(1/p'); +inf if a factor diverges."""
    if p <= 1:
        raise ContractViolation(f"A_p statistic needs p > 1, got {p}")
    if power_exponent(upsilon) == 0.0:
        return 1.0
    q = conjugate(p)
    direct = ball_integral(upsilon, ball, 1.0)
    dual = ball_integral(upsilon, ball, 1.0 - q)
    if not (math.isfinite(direct) and math.isfinite(dual)):
        return math.inf
    vol = ball_volume(ball.d, ball.radius)
    return direct ** (1.0 / p) * dual ** (1.0 / q) / vol


class Verdict:
    BOUNDED = "bounded"
    DIVERGING = "diverging"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BallFamily:
    centers: Tuple[Tuple[float, ...], ...]
    radii: Tuple[float, ...]

    def balls(self) -> List[Ball]:
        return [Ball(c, r) for c in self.centers for r in self.radii]

    def describe(self) -> str:
        return (f"{len(self.centers)} centers x {len(self.radii)} radii "
                f"in [{min(self.radii):.3g}, {max(self.radii):.3g}]")


def default_family(d: int, decades: int = 6, per_decade: int = 2) -> BallFamily:
    """Balls at the origin and at distance 1, 10, 100 along the first axis."""
    centers = [tuple([0.0] * d)]
    for dist in (1.0, 10.0, 100.0):
        centers.append(tuple([dist] + [0.0] * (d - 1)))
    radii = tuple(float(r) for r in np.logspace(-3, -3 + decades, decades * per_decade + 1))
    return BallFamily(tuple(centers), radii)


@dataclass
class ApReport:
    p: float
    family: str
    values: List[float] = field(default_factory=list)
    supremum: float = 0.0
    verdict: str = Verdict.INCONCLUSIVE


def check_ap(upsilon: WeightSpec, p: float, family: Optional[BallFamily] = None,
             cap: Optional[float] = None) -> ApReport:
    """
    Sample the A_p statistic over a ball family.

    "bounded" means no counterexample was found: the running supremum grew by
    less than 1% over the last decade of radii. "diverging" means some ball
    produced an infinite statistic or one above the cap.
    """
    from config import AP_CAP

    family = family or default_family(upsilon.d)
    if not family.centers or not family.radii:
        raise ContractViolation("ball family is empty")
    cap = AP_CAP if cap is None else cap
    balls = family.balls()
    values = [muckenhoupt_statistic(upsilon, p, b) for b in balls]
    report = ApReport(p=p, family=family.describe(), values=values)
    report.supremum = max(values)
    if not math.isfinite(report.supremum) or report.supremum > cap:
        report.verdict = Verdict.DIVERGING
        return report
    r_max = max(family.radii)
    earlier = [v for v, b in zip(values, balls) if b.radius < r_max / 10.0]
    if earlier:
        before = max(earlier)
        growth = (report.supremum - before) / before
        report.verdict = Verdict.BOUNDED if growth < 0.01 else Verdict.INCONCLUSIVE
    log.debug("A_p p=%s sup=%.6g verdict=%s", p, report.supremum, report.verdict)
    return report


def lower_bound_check(upsilon: WeightSpec, gamma: float, p: float, samples) -> Tuple[bool, float]:
    """Check v(x) >= <1/|x|>^(-gamma p') on samples; returns (holds, minimal ratio)."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ContractViolation("lower bound samples must avoid the origin")
    q = conjugate(p)
    bound = np.power(1.0 + 1.0 / r, -gamma * q)
    ratio = eval_weight(upsilon, x) / bound
    worst = float(np.min(ratio))
    return bool(worst >= 1.0 - 1e-12), worst


# ---------------------------------------------------------------------------
# String form
# ---------------------------------------------------------------------------

def parse_weight(text: str, d: int = 1) -> WeightSpec:
    """
    Parse "const", "pow:-0.5", "bracket:2", "decay:3", "derived:pow:1.0:p=2"
    or "recip:pow:0.5:shift=0:power=1".
    """
    tokens = [t.strip() for t in text.strip().split(":")]
    try:
        return _parse_tokens(tokens, d)
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"cannot parse weight {text!r}: {exc}")


def _parse_tokens(tokens: Sequence[str], d: int) -> WeightSpec:
    head = tokens[0]
    if head in ("const", "constant", "one"):
        return constant(d)
    if head in ("pow", "power"):
        return power(float(tokens[1]), d)
    if head == "bracket":
        return bracket(float(tokens[1]), d)
    if head == "decay":
        return decay(float(tokens[1]), d)
    keyed = {}
    rest = []
    for tok in tokens[1:]:
        if "=" in tok:
            key, value = tok.split("=", 1)
            keyed[key.strip()] = float(value)
        else:
            rest.append(tok)
    if head == "derived":
        if "p" not in keyed:
            raise ParseError("derived weight needs p=<value>")
        return sobolev_weight_from_upsilon(_parse_tokens(rest, d), keyed["p"])
    if head in ("recip", "reciprocal"):
        return reciprocal(_parse_tokens(rest, d), keyed.get("shift", 0.0), keyed.get("power", 1.0))
    raise ParseError(f"unknown weight kind {head!r}")


def weight_id(w: WeightSpec) -> str:
    """Canonical string form; parse_weight(weight_id(w), w.d) == w."""
    if w.kind == WeightKind.CONSTANT:
        return "const"
    if w.kind == WeightKind.POWER:
        return f"pow:{w.exponent!r}"
    if w.kind == WeightKind.BRACKET:
        return f"bracket:{w.exponent!r}"
    if w.kind == WeightKind.DECAY:
        return f"decay:{w.exponent!r}"
    if w.kind == WeightKind.DERIVED:
        p = w.p_prime / (w.p_prime - 1.0)
        return f"derived:{weight_id(w.base)}:p={p!r}"
    return f"recip:{weight_id(w.base)}:shift={w.exponent!r}:power={w.power!r}"
