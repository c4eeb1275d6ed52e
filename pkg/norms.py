"""
Spatial quadrature and weighted norms on boxes, balls and truncated R^d.

Grids for weights with a power singularity at the origin absorb |x|^beta
into Gauss-Jacobi weights along rays (Duffy pyramids on boxes, origin-star
rays on balls), so integrands are never evaluated at the singular point.
"""
import itertools
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from config import CORE_RADIUS, SPATIAL_TAIL_TOL
from errors import (
    ContractViolation,
    DivergingNormError,
    EvaluationError,
    NonIntegrableError,
    ParseError,
    UnsupportedOrderError,
)
from function_catalog import FreqQuadrature, TargetFunction, eval_partial
from quadrature import (
    composite,
    gauss_jacobi_unit,
    gauss_legendre,
    sphere_rule,
    symmetric_axis,
    tensor,
)
from weights import (
    WeightKind,
    WeightSpec,
    origin_exponent,
    power_exponent,
    radial_value,
    sphere_area,
)

log = logging.getLogger(__name__)

MAX_GRID_NODES = 20_000_000


class DomainKind:
    BOX = "box"
    BALL = "ball"
    FULL = "full-space"


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    d: int
    intervals: Tuple[Tuple[float, float], ...] = ()
    center: Tuple[float, ...] = ()
    radius: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ContractViolation(f"domain dimension must be positive, got {self.d}")
        if self.kind == DomainKind.BOX:
            if len(self.intervals) != self.d or any(hi <= lo for lo, hi in self.intervals):
                raise ContractViolation(f"box needs {self.d} nonempty intervals, got {self.intervals}")
        elif self.kind == DomainKind.BALL:
            if len(self.center) != self.d or self.radius <= 0:
                raise ContractViolation("ball needs a center of dimension d and a positive radius")
        elif self.kind != DomainKind.FULL:
            raise ContractViolation(f"unknown domain kind {self.kind!r}")

    @property
    def bounded(self) -> bool:
        return self.kind != DomainKind.FULL

    def volume(self) -> float:
        if self.kind == DomainKind.BOX:
            return float(np.prod([hi - lo for lo, hi in self.intervals]))
        if self.kind == DomainKind.BALL:
            return sphere_area(self.d) * self.radius ** self.d / self.d
        return math.inf

    def r_max(self) -> float:
        """R_U = sup over the domain of |x|."""
        if self.kind == DomainKind.BOX:
            return math.sqrt(sum(max(lo * lo, hi * hi) for lo, hi in self.intervals))
        if self.kind == DomainKind.BALL:
            return math.sqrt(sum(c * c for c in self.center)) + self.radius
        return math.inf

    def contains_origin(self) -> bool:
        """Origin in the closed domain."""
        if self.kind == DomainKind.BOX:
            return all(lo <= 0.0 <= hi for lo, hi in self.intervals)
        if self.kind == DomainKind.BALL:
            return math.sqrt(sum(c * c for c in self.center)) <= self.radius
        return True


def box(intervals: Sequence[Sequence[float]]) -> DomainSpec:
    ivs = tuple((float(lo), float(hi)) for lo, hi in intervals)
    return DomainSpec(DomainKind.BOX, len(ivs), intervals=ivs)


def ball(center: Sequence[float], radius: float) -> DomainSpec:
    c = tuple(float(v) for v in center)
    return DomainSpec(DomainKind.BALL, len(c), center=c, radius=float(radius))


def full_space(d: int) -> DomainSpec:
    return DomainSpec(DomainKind.FULL, int(d))


def parse_domain(text: str) -> DomainSpec:
    """Parse "box:-1,1;-1,1", "ball:0,0:1" or "rd:2"."""
    parts = [p.strip() for p in text.strip().split(":")]
    try:
        if parts[0] == "box" and len(parts) == 2:
            return box([[float(v) for v in iv.split(",")] for iv in parts[1].split(";")])
        if parts[0] == "ball" and len(parts) == 3:
            return ball([float(v) for v in parts[1].split(",")], float(parts[2]))
        if parts[0] == "rd" and len(parts) == 2:
            return full_space(int(parts[1]))
    except (ValueError, ContractViolation) as exc:
        raise ParseError(f"cannot parse domain {text!r}: {exc}")
    raise ParseError(f"cannot parse domain {text!r}")


def domain_id(dom: DomainSpec) -> str:
    if dom.kind == DomainKind.BOX:
        return "box:" + ";".join(f"{lo!r},{hi!r}" for lo, hi in dom.intervals)
    if dom.kind == DomainKind.BALL:
        return "ball:" + ",".join(repr(c) for c in dom.center) + f":{dom.radius!r}"
    return f"rd:{dom.d}"


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

class Grading:
    UNIFORM = "uniform"
    ORIGIN = "origin-graded"
    TAIL = "tail-truncated"


@dataclass(eq=False)
class QuadratureGrid:
    domain: DomainSpec
    nodes: np.ndarray
    weights: np.ndarray
    grading: str = Grading.UNIFORM
    tail_bound: float = 0.0
    weight: Optional[WeightSpec] = None
    p: float = 1.0
    absorbed: float = 0.0  # exponent beta of |x|^beta folded into the weights
    _factors: Dict[tuple, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class NormResult:
    value: float
    tail_bound: float = 0.0

    def __float__(self) -> float:
        return float(self.value)


def tail_bound(u: float, p: float, T: float, d: int = 1) -> float:
    """Upper bound on the integral of <x>^(-u p) over |x| > T."""
    if u * p <= d:
        raise NonIntegrableError(f"<x>^-{u * p} is not integrable in dimension {d}")
    if T <= 0:
        raise ContractViolation(f"truncation radius must be positive, got {T}")
    return sphere_area(d) * (1.0 + T) ** (d - u * p) / (u * p - d)


def decay_weight_norm(u: float, r: float, d: int = 1) -> float:
    """Closed-form || <.>^-u ||_{L^r(R^d)} = (|S^(d-1)| B(d, u r - d))^(1/r)."""
    if u * r <= d:
        raise NonIntegrableError(f"<x>^-{u} is not in L^{r}(R^{d})")
    return (sphere_area(d) * special.beta(d, u * r - d)) ** (1.0 / r)


def _box_axis(lo: float, hi: float, n: int):
    if lo < 0.0 < hi:
        return composite([lo, 0.0, hi], n)
    return gauss_legendre(n, lo, hi)


def _tensor_box(dom: DomainSpec, n: int):
    return tensor([_box_axis(lo, hi, n) for lo, hi in dom.intervals])


def _duffy_box(dom: DomainSpec, n: int, beta: float):
    """Origin-graded box grid: every orthant piece is split into d pyramids with apex 0."""
    d = dom.d
    ends = [[e for e in (lo, hi) if e != 0.0] for lo, hi in dom.intervals]
    t, wt = gauss_jacobi_unit(n, d - 1 + beta)
    all_nodes, all_weights = [], []
    for corner in itertools.product(*ends):
        a = np.asarray(corner, dtype=float)
        for k in range(d):
            others = [j for j in range(d) if j != k]
            if others:
                face, wface = tensor([gauss_legendre(n, min(0.0, a[j]), max(0.0, a[j])) for j in others])
            else:
                face, wface = np.zeros((1, 0)), np.ones(1)
            y = np.empty((face.shape[0], d))
            y[:, others] = face
            y[:, k] = a[k]
            wy = abs(a[k]) * wface * np.power(np.linalg.norm(y, axis=-1), beta)
            all_nodes.append((t[:, None, None] * y[None, :, :]).reshape(-1, d))
            all_weights.append((wt[:, None] * wy[None, :]).ravel())
    return np.concatenate(all_nodes), np.concatenate(all_weights)


def _star_ball(dom: DomainSpec, n: int, beta: float):
    """Rays from the origin to the sphere, Gauss-Jacobi in the ray parameter."""
    d = dom.d
    c = np.asarray(dom.center)
    dirs, wdir = sphere_rule(d, n)
    proj = dirs @ c
    L = proj + np.sqrt(np.maximum(proj * proj - c @ c + dom.radius ** 2, 0.0))
    keep = L > 0
    dirs, wdir, L = dirs[keep], wdir[keep], L[keep]
    t, wt = gauss_jacobi_unit(n, d - 1 + beta)
    nodes = (t[None, :, None] * L[:, None, None] * dirs[:, None, :]).reshape(-1, d)
    weights = (wdir[:, None] * np.power(L, d + beta)[:, None] * wt[None, :]).ravel()
    return nodes, weights


def _polar_ball(dom: DomainSpec, n: int):
    d = dom.d
    dirs, wdir = sphere_rule(d, n)
    t, wt = gauss_jacobi_unit(n, d - 1.0)
    R = dom.radius
    nodes = np.asarray(dom.center)[None, :] + R * (t[None, :, None] * dirs[:, None, :]).reshape(-1, d)
    weights = (wdir[:, None] * R ** d * wt[None, :]).ravel()
    return nodes, weights


def _full_space_grid(dom: DomainSpec, w: WeightSpec, n: int, p: float) -> QuadratureGrid:
    if w.kind != WeightKind.DECAY:
        raise ContractViolation(f"full-space grids need a decay weight <x>^-u, got {w.kind}")
    u, d = w.exponent, dom.d
    total = sphere_area(d) * special.beta(d, u * p - d) if u * p > d else 0.0
    T = CORE_RADIUS
    while tail_bound(u, p, T, d) > SPATIAL_TAIL_TOL * total:
        T *= 2.0
    axis = symmetric_axis(T, CORE_RADIUS, n)
    if axis[0].size ** d > MAX_GRID_NODES:
        raise ContractViolation(f"full-space grid with {axis[0].size}^{d} nodes is too large")
    nodes, weights = tensor([axis] * d)
    bound = tail_bound(u, p, T, d)
    log.debug("full-space grid d=%d u=%g p=%g: T=%g nodes=%d tail=%.3g", d, u, p, T, weights.size, bound)
    return QuadratureGrid(dom, nodes, weights, Grading.TAIL, bound, w, p)


def build_quadrature(dom: DomainSpec, w: WeightSpec, resolution: int, p: float = 1.0) -> QuadratureGrid:
    """
    Quadrature grid for integrands of the form w(x)^p |g(x)|^p over dom.

    Bounded grids integrate polynomials of degree <= 2*resolution-1 exactly
    per axis. When the closed domain contains the origin and w behaves like
    |x|^k there with k != 0, |x|^(k p) is absorbed into the weights.
    """
    if dom.d != w.d:
        raise ContractViolation(f"domain has dimension {dom.d}, weight has {w.d}")
    if resolution < 1:
        raise ContractViolation(f"resolution must be positive, got {resolution}")
    if p < 1 or math.isinf(p):
        raise ContractViolation(f"p must lie in [1, inf), got {p}")
    n = int(resolution)
    if dom.kind == DomainKind.FULL:
        return _full_space_grid(dom, w, n, p)

    k0 = origin_exponent(w)
    graded = dom.contains_origin() and k0 != 0.0
    beta = k0 * p
    if graded and beta <= -dom.d:
        raise NonIntegrableError(f"|x|^{k0} is not {p}-integrable at the origin in dimension {dom.d}")

    target = dom
    if dom.kind == DomainKind.BALL and dom.d == 1:
        target = box([(dom.center[0] - dom.radius, dom.center[0] + dom.radius)])

    if target.kind == DomainKind.BOX:
        nodes, weights = _duffy_box(target, n, beta) if graded else _tensor_box(target, n)
    elif graded:
        nodes, weights = _star_ball(target, n, beta)
    else:
        nodes, weights = _polar_ball(target, n)

    grid = QuadratureGrid(dom, nodes, weights, Grading.ORIGIN if graded else Grading.UNIFORM,
                          0.0, w, p, beta if graded else 0.0)
    log.debug("grid %s: %s, %d nodes", domain_id(dom), grid.grading, grid.size)
    return grid


_grid_cache: Dict[tuple, QuadratureGrid] = {}
_grid_lock = threading.Lock()


def cached_quadrature(dom: DomainSpec, w: WeightSpec, resolution: int, p: float = 1.0) -> QuadratureGrid:
    """build_quadrature behind a small process-wide cache."""
    key = (dom, w, int(resolution), float(p))
    with _grid_lock:
        if key in _grid_cache:
            return _grid_cache[key]
    grid = build_quadrature(dom, w, resolution, p)
    with _grid_lock:
        _grid_cache[key] = grid
        if len(_grid_cache) > 32:
            for old in list(_grid_cache.keys())[:16]:
                del _grid_cache[old]
    return grid


# ---------------------------------------------------------------------------
# Weighted norms
# ---------------------------------------------------------------------------

Partial = Callable[[Tuple[int, ...], np.ndarray], np.ndarray]


def as_partials(g) -> Partial:
    """
    Adapt g to a partial-derivative evaluator (alpha, X) -> values.

    Accepts a TargetFunction, anything with a .partial(alpha, X) method, or a
    plain callable X -> values (order 0 only).
    """
    if isinstance(g, TargetFunction):
        return lambda alpha, X: eval_partial(g, alpha, X)
    if hasattr(g, "partial"):
        return g.partial

    def plain(alpha, X):
        if any(alpha):
            raise UnsupportedOrderError("a plain function has no derivatives")
        return g(X)

    return plain


@dataclass(frozen=True)
class Difference:
    """g1 - g2 as one evaluable field."""
    first: object
    second: object

    def partial(self, alpha, X):
        return as_partials(self.first)(alpha, X) - as_partials(self.second)(alpha, X)


def multi_indices(d: int, order: int) -> List[Tuple[int, ...]]:
    """All alpha in N^d with |alpha| <= order, by total degree then lexicographically."""
    out = []
    for total in range(order + 1):
        for alpha in itertools.product(range(total + 1), repeat=d):
            if sum(alpha) == total:
                out.append(alpha)
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def _weight_factor(grid: QuadratureGrid, w: WeightSpec, p: float) -> np.ndarray:
    """w(x)^p at the nodes, divided by whatever power the grid already absorbed."""
    if w.d != grid.domain.d:
        raise ContractViolation(f"weight has dimension {w.d}, grid has {grid.domain.d}")
    if grid.grading != Grading.UNIFORM and (w != grid.weight or p != grid.p):
        raise ContractViolation("grid was built for a different weight or exponent; rebuild it")
    if grid.grading == Grading.UNIFORM and grid.domain.contains_origin() and origin_exponent(w) < 0:
        raise ContractViolation("weight is singular at the origin but the grid is not origin-graded")
    key = (w, float(p))
    cached = grid._factors.get(key)
    if cached is not None:
        return cached
    r = np.linalg.norm(grid.nodes, axis=-1)
    if grid.absorbed == 0.0:
        factor = np.power(radial_value(w, r), p)
    else:
        k0 = origin_exponent(w)
        if power_exponent(w) == k0:
            factor = np.ones_like(r)
        else:
            factor = np.power(radial_value(w, r) / np.power(r, k0), p)
    grid._factors[key] = factor
    return factor


def _power_sum(values: np.ndarray, factor: np.ndarray, grid: QuadratureGrid, p: float) -> float:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise EvaluationError(f"integrand returned shape {values.shape}, expected ({grid.size},)")
    if not np.all(np.isfinite(values)):
        bad = grid.nodes[~np.isfinite(values)][0]
        raise EvaluationError(f"integrand is not finite at node {bad}")
    return float(np.sum(grid.weights * factor * np.power(np.abs(values), p)))


def _result(total: float, tail_mass: float, p: float) -> NormResult:
    value = total ** (1.0 / p)
    if tail_mass <= 0.0:
        return NormResult(value, 0.0)
    return NormResult(value, (total + tail_mass) ** (1.0 / p) - value)


def weighted_lp_norm(g, w: WeightSpec, p: float, grid: QuadratureGrid,
                     sup_bound: Optional[float] = None) -> NormResult:
    """
    ||w g||_{L^p} by quadrature.

    On tail-truncated grids the neglected mass is bounded by
    sup|g|^p * tail_bound, with sup|g| taken from sup_bound or, when absent,
    from the largest nodal value.
    """
    if p < 1 or math.isinf(p):
        raise ContractViolation(f"p must lie in [1, inf), got {p}")
    factor = _weight_factor(grid, w, p)
    values = np.asarray(as_partials(g)((0,) * grid.domain.d, grid.nodes), dtype=float)
    total = _power_sum(values, factor, grid, p)
    tail_mass = 0.0
    if grid.tail_bound > 0.0:
        sup = sup_bound if sup_bound is not None else float(np.max(np.abs(values)))
        tail_mass = sup ** p * grid.tail_bound
    return _result(total, tail_mass, p)


def weighted_sobolev_norm(g, ell: int, p: float, w: WeightSpec, grid: QuadratureGrid,
                          sup_bound: Optional[float] = None) -> NormResult:
    """(sum over |alpha| <= ell of ||w d^alpha g||_{L^p}^p)^(1/p)."""
    if ell < 0:
        raise ContractViolation(f"Sobolev order must be nonnegative, got {ell}")
    if p < 1 or math.isinf(p):
        raise ContractViolation(f"p must lie in [1, inf), got {p}")
    factor = _weight_factor(grid, w, p)
    partial = as_partials(g)
    total = 0.0
    tail_mass = 0.0
    for alpha in multi_indices(grid.domain.d, ell):
        values = np.asarray(partial(alpha, grid.nodes), dtype=float)
        total += _power_sum(values, factor, grid, p)
        if grid.tail_bound > 0.0:
            sup = sup_bound if sup_bound is not None else float(np.max(np.abs(values)))
            tail_mass += sup ** p * grid.tail_bound
    return _result(total, tail_mass, p)


# ---------------------------------------------------------------------------
# Fourier-Lebesgue norms of indicator functions
# ---------------------------------------------------------------------------

DEFAULT_PERIODS = 2000


def _mean_abs_sin(q: float) -> float:
    """Mean of |sin|^q over a period."""
    return special.gamma((q + 1.0) / 2.0) / (math.sqrt(math.pi) * special.gamma(q / 2.0 + 1.0))


def _power_tail(lead: float, q: float, gamma: float, decay: float, T: float, extra: float = 0.0) -> float:
    """int_T^inf t^extra (1 + t)^(gamma q) (lead t^-decay)^q dt."""
    if gamma == 0.0 and extra == 0.0:
        return lead ** q * T ** (1.0 - decay * q) / (decay * q - 1.0)
    val, _ = integrate.quad(
        lambda t: t ** extra * (1.0 + t) ** (gamma * q) * t ** (-decay * q), T, math.inf, limit=200)
    return lead ** q * val


def _box_axis_chi(h: float, t: np.ndarray) -> np.ndarray:
    # |chi^| of [-h, h] in one variable
    return (2.0 * math.pi) ** -0.5 * 2.0 * h * np.abs(np.sinc(h * t / math.pi))


class _AxisFactor:
    """1D integral of (1 + |t|)^(g q) |chi^(t)|^q over R for an interval of half-width h."""

    def __init__(self, h: float, q: float, gamma: float, n: int, periods: int):
        self.T = periods * math.pi / h
        t, w = composite([j * math.pi / h for j in range(periods + 1)], n)
        self.t, self.w = t, w
        lead = (2.0 * math.pi) ** -0.5 * 2.0
        grid = 2.0 * float(np.sum(w * (1.0 + t) ** (gamma * q) * _box_axis_chi(h, t) ** q))
        self.upper = 2.0 * _power_tail(lead, q, gamma, 1.0, self.T)
        self.mean = _mean_abs_sin(q) * self.upper
        self.grid = grid
        self.value = grid + self.mean

    @property
    def hi(self) -> float:
        return self.grid + self.upper

    @property
    def lo(self) -> float:
        return self.grid


def char_fn_fl_norm(dom: DomainSpec, q: float, gamma: float,
                    quad: Optional[FreqQuadrature] = None) -> NormResult:
    """
    || <.>^gamma chi_U^ ||_{L^q} for a box or ball U.

    Oscillatory tails beyond the last half-period are replaced by their mean
    value; the reported tail bound covers the replacement.
    """
    if not dom.bounded:
        raise ContractViolation("the indicator norm needs a bounded domain")
    if q < 1:
        raise ContractViolation(f"q must be >= 1, got {q}")
    if gamma < 0:
        raise ContractViolation(f"gamma must be nonnegative, got {gamma}")
    n = quad.nodes if quad is not None else 8
    if dom.kind == DomainKind.BALL and dom.d >= 2:
        return _ball_char_norm(dom, q, gamma, n, quad)

    intervals = dom.intervals if dom.kind == DomainKind.BOX else ((dom.center[0] - dom.radius,
                                                                   dom.center[0] + dom.radius),)
    d = len(intervals)
    if (math.isinf(q) and gamma > 1.0) or (not math.isinf(q) and q * (gamma - 1.0) >= -1.0):
        raise DivergingNormError(
            f"<xi>^{gamma} chi^ of a box is not in L^{q}: the sinc factors decay like |xi_k|^-1",
            factor="indicator")
    halves = [0.5 * (hi - lo) for lo, hi in intervals]

    if math.isinf(q):
        if gamma == 0.0:
            return NormResult(float(np.prod([(2.0 * math.pi) ** -0.5 * 2.0 * h for h in halves])), 0.0)
        return _box_sup(halves, gamma, n)

    def periods_for(h, default):
        if quad is not None and quad.radius > 0:
            return max(1, int(math.ceil(quad.radius * h / math.pi)))
        return default

    if d == 1 or gamma == 0.0:
        factors = [_AxisFactor(h, q, gamma if d == 1 else 0.0, n, periods_for(h, DEFAULT_PERIODS))
                   for h in halves]
        value = float(np.prod([f.value for f in factors])) ** (1.0 / q)
        hi = float(np.prod([f.hi for f in factors])) ** (1.0 / q)
        lo = float(np.prod([f.lo for f in factors])) ** (1.0 / q)
        return NormResult(value, max(hi - value, value - lo))

    # gamma > 0 couples the axes through (1 + |xi|); integrate the orthant on a tensor grid
    per_axis = {2: 64, 3: 12}.get(d)
    if per_axis is None:
        raise ContractViolation(f"weighted indicator norms are available for d <= 3, got {d}")
    rules, cutoffs = [], []
    for h in halves:
        K = periods_for(h, per_axis)
        rules.append(composite([j * math.pi / h for j in range(K + 1)], n))
        cutoffs.append(K * math.pi / h)
    nodes, w = tensor(rules)
    chi = np.prod([_box_axis_chi(h, nodes[:, k]) for k, h in enumerate(halves)], axis=0)
    rad = np.linalg.norm(nodes, axis=-1)
    core = 2.0 ** d * float(np.sum(w * (1.0 + rad) ** (gamma * q) * chi ** q))
    # full 1D factors with the per-axis weight bound (1 + |xi|) <= prod (1 + |xi_k|)
    full = [_AxisFactor(h, q, gamma, n, DEFAULT_PERIODS) for h in halves]
    lead = (2.0 * math.pi) ** -0.5 * 2.0
    mean_tail = 0.0
    upper_tail = 0.0
    for k, Tk in enumerate(cutoffs):
        upper = 2.0 * _power_tail(lead, q, gamma, 1.0, Tk)
        rest = float(np.prod([f.value for j, f in enumerate(full) if j != k]))
        mean_tail += _mean_abs_sin(q) * upper * rest
        upper_tail += upper * rest
    value = (core + mean_tail) ** (1.0 / q)
    hi = (core + upper_tail) ** (1.0 / q)
    return NormResult(value, max(hi - value, value - core ** (1.0 / q)))


def _box_sup(halves: Sequence[float], gamma: float, n: int) -> NormResult:
    K = 64
    lead = (2.0 * math.pi) ** -0.5 * 2.0
    axes = [np.concatenate([[0.0], composite([j * math.pi / h for j in range(K + 1)], n)[0]]) for h in halves]
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    chi = np.prod([_box_axis_chi(h, nodes[:, k]) for k, h in enumerate(halves)], axis=0)
    value = float(np.max((1.0 + np.linalg.norm(nodes, axis=-1)) ** gamma * chi))
    # outside the grid: (1 + |xi|)^g <= prod (1 + |xi_k|)^g and (1 + t)^g / t decreases for g <= 1
    axis_sup = [float(np.max((1.0 + t) ** gamma * _box_axis_chi(h, t))) for h, t in zip(halves, axes)]
    beyond = 0.0
    for k, h in enumerate(halves):
        Tk = K * math.pi / h
        rest = float(np.prod([s for j, s in enumerate(axis_sup) if j != k]))
        beyond = max(beyond, (1.0 + Tk) ** gamma * lead / Tk * rest)
    return NormResult(value, max(0.0, beyond - value))


def _ball_char_norm(dom: DomainSpec, q: float, gamma: float, n: int,
                    quad: Optional[FreqQuadrature]) -> NormResult:
    d, R = dom.d, dom.radius
    decay = (d + 1) / 2.0
    if (math.isinf(q) and gamma > decay) or (not math.isinf(q) and q * (gamma - decay) >= -d):
        raise DivergingNormError(
            f"<xi>^{gamma} chi^ of a ball is not in L^{q}: it decays like |xi|^-{decay}", factor="indicator")
    K = DEFAULT_PERIODS
    if quad is not None and quad.radius > 0:
        K = max(1, int(math.ceil(quad.radius * R / math.pi)))
    T = K * math.pi / R
    rho, w = composite([j * math.pi / R for j in range(K + 1)], n)
    a = (d - 1) / 2.0
    m = int(math.ceil(0.6 * R * T)) + 50
    s, ws = special.roots_jacobi(m, a, a)
    lead = (2.0 * math.pi) ** (-d / 2.0) * math.pi ** a / special.gamma(a + 1.0) * R ** d
    F = np.empty_like(rho)
    for lo in range(0, rho.size, 512):
        F[lo:lo + 512] = lead * np.cos(R * rho[lo:lo + 512, None] * s[None, :]) @ ws
    at0 = lead * float(np.sum(ws))
    amp = math.sqrt(2.0 / math.pi) * R ** a
    if math.isinf(q):
        value = max(at0, float(np.max((1.0 + rho) ** gamma * np.abs(F))))
        beyond = (1.0 + T) ** gamma * amp * T ** -decay
        return NormResult(value, max(0.0, beyond - value))
    area = sphere_area(d)
    core = area * float(np.sum(w * rho ** (d - 1) * (1.0 + rho) ** (gamma * q) * np.abs(F) ** q))
    upper = area * _power_tail(amp, q, gamma, decay, T, extra=d - 1.0)
    mean = _mean_abs_sin(q) * upper
    value = (core + mean) ** (1.0 / q)
    hi = (core + upper) ** (1.0 / q)
    log.debug("ball indicator norm d=%d R=%g q=%g gamma=%g: %d radial nodes, %d Gegenbauer nodes",
              d, R, q, gamma, rho.size, m)
    return NormResult(value, max(hi - value, value - core ** (1.0 / q)))
