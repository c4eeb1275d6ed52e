"""
Closed-form target functions and their frequency-side norms.

Fourier transforms use the symmetric convention
f^(xi) = (2 pi)^(-d/2) int f(x) exp(-i <x, xi>) dx.

Every entry is a sum of tensor products of one 1D profile g, shifted and
scaled per component: f(x) = sum_j c_j prod_k g((x_k - c_jk) / s_j), so
f^(xi) = sum_j c_j s_j^d prod_k g^(s_j xi_k) exp(-i <c_j, xi>).
"""
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial, hermite_e
from scipy import integrate, special

from config import FREQ_TAIL_TOL
from errors import (
    AccuracyError,
    ContractViolation,
    DivergingNormError,
    ParseError,
    UnsupportedOrderError,
)
from quadrature import gauss_jacobi_unit, composite, graded_edges, symmetric_axis, tensor
from weights import (
    WeightSpec,
    infinity_exponent,
    origin_exponent,
    power_exponent,
    radial_value,
    sphere_area,
)

log = logging.getLogger(__name__)

# Unit frequency panels up to this radius, doubling panels beyond
FREQ_CORE = 16.0

# Largest tensor frequency grid we are willing to build
MAX_TENSOR_NODES = 20_000_000

# Smallest spectrum exponent n; partials are supported up to order 2n - 2
MIN_SPECTRUM_ORDER = 3

_CHUNK = 1 << 17


class TargetKind:
    """Enum-like class for catalog entries."""
    GAUSSIAN = "gaussian"
    MIXTURE = "gaussian-mixture"
    CAUCHY = "cauchy-type"
    SPECTRUM = "prescribed-spectrum"


class QuadScheme:
    RADIAL = "radial-product"
    TENSOR = "tensor"


@dataclass(frozen=True)
class TargetFunction:
    kind: str
    d: int
    centers: Tuple[Tuple[float, ...], ...]
    scales: Tuple[float, ...]
    coefficients: Tuple[float, ...]
    order: int = 0  # n of the prescribed spectrum (1 + xi^2)^(-n)

    def __post_init__(self):
        if self.d < 1:
            raise ContractViolation(f"dimension must be positive, got {self.d}")
        if not (len(self.centers) == len(self.scales) == len(self.coefficients) >= 1):
            raise ContractViolation("centers, scales and coefficients must have one entry per component")
        for c in self.centers:
            if len(c) != self.d:
                raise ContractViolation(f"center {c} does not have dimension {self.d}")
        if any(s <= 0 for s in self.scales):
            raise ContractViolation("scales must be positive")
        if self.kind != TargetKind.MIXTURE and len(self.scales) != 1:
            raise ContractViolation(f"{self.kind} has exactly one component")
        if self.kind == TargetKind.SPECTRUM and self.order < MIN_SPECTRUM_ORDER:
            # partials up to order 4 need 2n - 2 >= 4
            raise ContractViolation(f"spectrum order must be >= {MIN_SPECTRUM_ORDER}, got {self.order}")
        if self.kind not in (TargetKind.GAUSSIAN, TargetKind.MIXTURE, TargetKind.CAUCHY, TargetKind.SPECTRUM):
            raise ContractViolation(f"unknown target kind {self.kind!r}")

    @property
    def radial(self) -> bool:
        """|f^| depends on |xi| only."""
        return self.kind == TargetKind.GAUSSIAN

    @property
    def barron_limit(self) -> float:
        """Sup of the orders s with finite Barron norm (exclusive)."""
        if self.kind == TargetKind.SPECTRUM:
            return 2.0 * self.order - 1.0
        return math.inf

    @property
    def decay_exponent(self) -> float:
        """<xi>^s |f^| is integrable for s < decay_exponent - d."""
        return self.barron_limit + self.d

    @property
    def max_order(self) -> Optional[int]:
        """Highest supported partial derivative order, None if unlimited."""
        if self.kind == TargetKind.SPECTRUM:
            return 2 * self.order - 2
        return None


def gaussian(d: int = 1, scale: float = 1.0, center: Optional[Sequence[float]] = None,
             amp: float = 1.0) -> TargetFunction:
    center = tuple(float(c) for c in center) if center is not None else (0.0,) * d
    return TargetFunction(TargetKind.GAUSSIAN, d, (center,), (float(scale),), (float(amp),))


def mixture(centers: Sequence[Sequence[float]], scales: Sequence[float],
            coefficients: Sequence[float]) -> TargetFunction:
    centers = tuple(tuple(float(c) for c in ctr) for ctr in centers)
    d = len(centers[0]) if centers else 0
    return TargetFunction(TargetKind.MIXTURE, d, centers, tuple(float(s) for s in scales),
                          tuple(float(c) for c in coefficients))


def cauchy(d: int = 1, scale: float = 1.0, center: Optional[Sequence[float]] = None,
           amp: float = 1.0) -> TargetFunction:
    center = tuple(float(c) for c in center) if center is not None else (0.0,) * d
    return TargetFunction(TargetKind.CAUCHY, d, (center,), (float(scale),), (float(amp),))


def spectrum(d: int = 1, n: int = 5, amp: float = 1.0, center: Optional[Sequence[float]] = None,
             scale: float = 1.0) -> TargetFunction:
    center = tuple(float(c) for c in center) if center is not None else (0.0,) * d
    return TargetFunction(TargetKind.SPECTRUM, d, (center,), (float(scale),), (float(amp),), int(n))


def scaled(fn: TargetFunction, c: float) -> TargetFunction:
    """c * f."""
    return replace(fn, coefficients=tuple(c * a for a in fn.coefficients))


# ---------------------------------------------------------------------------
# 1D profiles
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _spectrum_polys(n: int, k: int) -> Polynomial:
    # g(u) = exp(-|u|) P(|u|); the k-th derivative for u > 0 is exp(-u) Q_k(u)
    coef = [
        math.sqrt(math.pi / 2.0) / (4.0 ** (n - 1) * math.factorial(n - 1))
        * math.factorial(2 * n - 2 - j) / (math.factorial(j) * math.factorial(n - 1 - j)) * 2.0 ** j
        for j in range(n)
    ]
    P = Polynomial(coef)
    Q = Polynomial([0.0])
    for j in range(k + 1):
        Q = Q + math.comb(k, j) * (-1) ** (k - j) * P.deriv(j)
    return Q


def _profile_derivative(fn: TargetFunction, k: int, u: np.ndarray) -> np.ndarray:
    """k-th derivative of the 1D profile g at u."""
    if fn.kind in (TargetKind.GAUSSIAN, TargetKind.MIXTURE):
        he = hermite_e.hermeval(u, [0.0] * k + [1.0])
        return (-1.0) ** k * he * np.exp(-0.5 * u * u)
    if fn.kind == TargetKind.CAUCHY:
        return (-1.0) ** k * math.factorial(k) * np.imag(np.power(u - 1j, -k - 1))
    y = np.abs(u)
    sign = np.where(u < 0, -1.0, 1.0) ** k
    return sign * np.exp(-y) * _spectrum_polys(fn.order, k)(y)


def _profile_hat(fn: TargetFunction, w: np.ndarray) -> np.ndarray:
    """Transform of the 1D profile; real and nonnegative for every entry."""
    if fn.kind in (TargetKind.GAUSSIAN, TargetKind.MIXTURE):
        return np.exp(-0.5 * w * w)
    if fn.kind == TargetKind.CAUCHY:
        return math.sqrt(math.pi / 2.0) * np.exp(-np.abs(w))
    return np.power(1.0 + w * w, -float(fn.order))


# ---------------------------------------------------------------------------
# Pointwise evaluation
# ---------------------------------------------------------------------------

def _as_points(fn: TargetFunction, x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if fn.d == 1 and x.ndim == 1 and x.shape[0] != 1:
        pts = x[:, None]
        single = False
    if pts.shape[-1] != fn.d:
        raise ContractViolation(f"point has dimension {pts.shape[-1]}, target has {fn.d}")
    if not np.all(np.isfinite(pts)):
        raise ContractViolation("evaluation points must be finite")
    return pts, single


def _check_alpha(fn: TargetFunction, alpha: Sequence[int]) -> Tuple[int, ...]:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != fn.d or any(a < 0 for a in alpha):
        raise ContractViolation(f"multi-index {alpha} is not valid in dimension {fn.d}")
    if fn.max_order is not None and sum(alpha) > fn.max_order:
        raise UnsupportedOrderError(f"{fn.kind} supports partials up to order {fn.max_order}, got {sum(alpha)}")
    return alpha


def eval_partial(fn: TargetFunction, alpha: Sequence[int], x):
    """Closed-form partial derivative d^alpha f at x, shape (d,) or (n, d)."""
    alpha = _check_alpha(fn, alpha)
    pts, single = _as_points(fn, x)
    out = np.zeros(pts.shape[0])
    for coef, center, sig in zip(fn.coefficients, fn.centers, fn.scales):
        if coef == 0.0:
            continue
        u = (pts - np.asarray(center)) / sig
        term = np.full(pts.shape[0], float(coef))
        for k, a in enumerate(alpha):
            term = term * (sig ** -a) * _profile_derivative(fn, a, u[:, k])
        out += term
    return float(out[0]) if single else out


def eval_f(fn: TargetFunction, x):
    return eval_partial(fn, (0,) * fn.d, x)


def eval_f_hat(fn: TargetFunction, xi):
    """f^(xi) under the symmetric normalization."""
    pts, single = _as_points(fn, xi)
    out = np.zeros(pts.shape[0], dtype=complex)
    for coef, center, sig in zip(fn.coefficients, fn.centers, fn.scales):
        mag = coef * sig ** fn.d * np.prod(_profile_hat(fn, sig * pts), axis=-1)
        out += mag * np.exp(-1j * (pts @ np.asarray(center)))
    return complex(out[0]) if single else out


def abs_f_hat(fn: TargetFunction, xi) -> np.ndarray:
    """|f^(xi)|; computed without the phase for single-component entries."""
    pts, single = _as_points(fn, xi)
    if len(fn.coefficients) == 1:
        sig = fn.scales[0]
        out = abs(fn.coefficients[0]) * sig ** fn.d * np.prod(_profile_hat(fn, sig * pts), axis=-1)
    else:
        out = np.abs(eval_f_hat(fn, pts))
    return float(out[0]) if single else out


def radial_profile(fn: TargetFunction, r) -> np.ndarray:
    """|f^| as a function of |xi| for radial entries."""
    if not fn.radial:
        raise ContractViolation(f"{fn.kind} does not have a radial spectrum")
    sig = fn.scales[0]
    r = np.asarray(r, dtype=float)
    return abs(fn.coefficients[0]) * sig ** fn.d * np.exp(-0.5 * sig * sig * r * r)


def axis_envelope(fn: TargetFunction) -> Tuple[float, Callable[[np.ndarray], np.ndarray]]:
    """(C, a) with |f^(xi)| <= C prod_k a(xi_k) everywhere."""
    if fn.kind in (TargetKind.GAUSSIAN, TargetKind.MIXTURE):
        C = sum(abs(c) * s ** fn.d for c, s in zip(fn.coefficients, fn.scales))
        smin = min(fn.scales)
        return C, lambda t: np.exp(-0.5 * smin * smin * np.asarray(t) ** 2)
    sig = fn.scales[0]
    C = abs(fn.coefficients[0]) * sig ** fn.d
    return C, lambda t: _profile_hat(fn, sig * np.asarray(t, dtype=float))


def spatial_radius(fn: TargetFunction, eps: float = 1e-17) -> float:
    """Radius beyond which |f| < eps * sum |c_j| (infinite for Cauchy tails)."""
    if fn.kind == TargetKind.CAUCHY:
        return math.inf
    reach = max(math.sqrt(sum(c * c for c in ctr)) for ctr in fn.centers)
    if fn.kind == TargetKind.SPECTRUM:
        # exp(-y) P(y) < eps once y is past the polynomial's growth
        y = -math.log(eps) + 4.0 * fn.order
        return reach + fn.scales[0] * y * math.sqrt(fn.d)
    return reach + max(fn.scales) * math.sqrt(-2.0 * math.log(eps)) * math.sqrt(fn.d)


# ---------------------------------------------------------------------------
# Frequency quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreqQuadrature:
    scheme: str
    radius: float
    nodes: int = 16
    tail_bound: float = 0.0
    tolerance: float = FREQ_TAIL_TOL


@lru_cache(maxsize=32)
def _radial_rule(d: int, T: float, n: int, beta: float):
    # first panel absorbs r^(d-1+beta); later panels are plain Gauss-Legendre
    r0, w0 = gauss_jacobi_unit(n, d - 1 + beta)
    r1, w1 = composite(graded_edges(T, FREQ_CORE, start=1.0), n)
    r = np.concatenate([r0, r1])
    w = np.concatenate([w0, w1])
    first = np.concatenate([np.ones(r0.size, dtype=bool), np.zeros(r1.size, dtype=bool)])
    return r, w, first


@lru_cache(maxsize=4)
def _tensor_rule(d: int, T: float, n: int):
    axis = symmetric_axis(T, FREQ_CORE, n)
    if axis[0].size ** d > MAX_TENSOR_NODES:
        raise ContractViolation(
            f"tensor frequency grid with {axis[0].size}^{d} nodes is too large; lower T or the node count")
    return tensor([axis] * d)


def _scheme_for(fn: TargetFunction) -> str:
    return QuadScheme.RADIAL if fn.radial else QuadScheme.TENSOR


def _weight_exponents(weight: Optional[WeightSpec]) -> Tuple[float, float]:
    if weight is None:
        return 0.0, 0.0
    return origin_exponent(weight), infinity_exponent(weight)


def _weight_tail_factor(weight: Optional[WeightSpec], T: float, kplus: float) -> float:
    """sup over r >= T of w(r) / (1 + r)^kplus, for the monotone radial families."""
    if weight is None:
        return 1.0
    radii = np.array([max(T, 1.0), 1e8 * max(T, 1.0)])
    ratio = radial_value(weight, radii) / np.power(1.0 + radii, kplus)
    return float(np.max(ratio))


def _check_integrable(fn: TargetFunction, q: float, s: float, weight: Optional[WeightSpec]):
    k0, kinf = _weight_exponents(weight)
    if weight is not None and k0 != 0.0:
        if not fn.radial:
            raise ContractViolation("weights singular or vanishing at the origin need a radial spectrum")
        if math.isinf(q):
            if k0 < 0:
                raise DivergingNormError("weight is unbounded at the origin", factor="weight")
        elif k0 * q <= -fn.d:
            raise DivergingNormError(f"weight |xi|^{k0} is not {q}-integrable at the origin", factor="weight")
    if fn.kind == TargetKind.SPECTRUM:
        excess = s + kinf - 2.0 * fn.order
        if (math.isinf(q) and excess > 0) or (not math.isinf(q) and q * excess >= -1.0):
            raise DivergingNormError(
                f"<xi>^{s} |f^| is not in L^{q}: spectrum decays like |xi|^-{2 * fn.order} per axis",
                factor="target")


class _Envelope:
    """Tail bounds of int_{outside [-T, T]^d} (w <xi>^s |f^|)^q, without the weight factor."""

    def __init__(self, fn: TargetFunction, q: float, e: float):
        self.fn = fn
        self.q = q
        self.e = e  # exponent of (1 + |xi|) after absorbing the weight growth
        self.C, self.a = axis_envelope(fn)
        d = fn.d
        if fn.kind in (TargetKind.GAUSSIAN, TargetKind.MIXTURE):
            smin = min(fn.scales)
            self.lam = q * smin * smin / 2.0
            self.m = d - 1 + e * q
            ref, _ = integrate.quad(
                lambda r: r ** (d - 1) * (1.0 + r) ** (e * q) * math.exp(-self.lam * r * r), 0.0, math.inf)
            self.ref = self.C ** q * sphere_area(d) * ref
        else:
            self.ref = self.C ** q * self._one(0.0) ** d

    def _one(self, T: float) -> float:
        # 2 int_T^inf (1 + t)^(e q) a(t)^q dt, bounded in closed form
        fn, q, m = self.fn, self.q, self.e * self.q
        sig = fn.scales[0]
        if fn.kind == TargetKind.CAUCHY:
            lam = q * sig
            with np.errstate(divide="ignore"):
                logq = np.log(special.gammaincc(m + 1.0, lam * (1.0 + T)))
            return float(2.0 * (math.pi / 2.0) ** (q / 2.0)
                         * np.exp(lam + special.gammaln(m + 1.0) + logq - (m + 1.0) * math.log(lam)))
        n = fn.order
        expo = 2.0 * n * q - m - 1.0
        if expo <= 0:
            raise AccuracyError(f"cannot bound the frequency tail of a spectrum with n={n} at order {self.e}")
        scale = max(1.0, 1.0 / sig) ** m * 2.0 ** (n * q)
        return 2.0 * scale * (1.0 + sig * T) ** (-expo) / (sig * expo)

    def tail(self, T: float) -> float:
        fn, d, q = self.fn, self.fn.d, self.q
        T = max(T, 1.0)
        if fn.kind in (TargetKind.GAUSSIAN, TargetKind.MIXTURE):
            h = (self.m + 1.0) / 2.0
            with np.errstate(divide="ignore"):
                logq = np.log(special.gammaincc(h, self.lam * T * T))
            core = np.exp(special.gammaln(h) + logq - h * math.log(self.lam))
            return float(self.C ** q * sphere_area(d) * 2.0 ** (self.e * q) * 0.5 * core)
        return float(self.C ** q * d * self._one(T) * self._one(0.0) ** (d - 1))

    def sup_tail(self, T: float) -> float:
        """sup over |xi_k| > T of (1 + |xi|)^e |f^| bound, for q = inf."""
        t = np.geomspace(max(T, 1e-3), max(T, 1.0) * 1e8, 4000)
        outer = float(np.max((1.0 + t) ** self.e * self.a(t)))
        if self.fn.kind in (TargetKind.GAUSSIAN, TargetKind.MIXTURE):
            return self.C * outer
        t0 = np.concatenate([[0.0], t])
        inner = float(np.max((1.0 + t0) ** self.e * self.a(t0)))
        return self.C * outer * inner ** (self.fn.d - 1)


def frequency_quadrature(fn: TargetFunction, s: float = 0.0, q: float = 1.0, nodes: int = 16,
                         tol: Optional[float] = None, weight: Optional[WeightSpec] = None) -> FreqQuadrature:
    """Pick the truncation radius T whose tail bound is below tol times the envelope mass."""
    tol = FREQ_TAIL_TOL if tol is None else tol
    _check_integrable(fn, q, s, weight)
    _, kinf = _weight_exponents(weight)
    kplus = max(kinf, 0.0)
    env = _Envelope(fn, 1.0 if math.isinf(q) else q, s + kplus)
    T = 1.0
    for _ in range(48):
        factor = _weight_tail_factor(weight, T, kplus)
        if math.isinf(q):
            tail = factor * env.sup_tail(T)
            ref = env.C
        else:
            tail = factor ** q * env.tail(T)
            ref = env.ref
        if tail <= tol * ref or ref == 0.0:
            log.debug("frequency quadrature for %s: T=%g tail=%.3g", fn.kind, T, tail)
            return FreqQuadrature(_scheme_for(fn), T, nodes, tail, tol)
        T *= 2.0
    raise AccuracyError(f"no truncation radius below {T:g} meets the tail tolerance {tol:g}")


def spectral_integral(fn: TargetFunction, q: float, s: float, quad: Optional[FreqQuadrature] = None,
                      weight: Optional[WeightSpec] = None) -> Tuple[float, float]:
    """
    int (w(xi) <xi>^s |f^(xi)|)^q dxi and its tail bound.

    For q = inf returns (sup over the nodes, sup bound outside the grid).
    """
    if s < 0:
        raise ContractViolation(f"negative orders are not supported, got s={s}")
    if q < 1:
        raise ContractViolation(f"q must be >= 1, got {q}")
    if weight is not None and weight.d != fn.d:
        raise ContractViolation(f"weight has dimension {weight.d}, target has {fn.d}")
    _check_integrable(fn, q, s, weight)
    if quad is None:
        quad = frequency_quadrature(fn, s, q, weight=weight)
    if quad.scheme != _scheme_for(fn):
        raise ContractViolation(f"{quad.scheme} quadrature does not fit a {fn.kind} target")
    if quad.radius < 1.0:
        raise ContractViolation(f"frequency truncation radius must be >= 1, got {quad.radius}")

    k0, kinf = _weight_exponents(weight)
    kplus = max(kinf, 0.0)
    env = _Envelope(fn, 1.0 if math.isinf(q) else q, s + kplus)
    factor = _weight_tail_factor(weight, quad.radius, kplus)
    sup_mode = math.isinf(q)

    if fn.radial:
        beta = 0.0 if sup_mode else k0 * q
        r, w, first = _radial_rule(fn.d, float(quad.radius), quad.nodes, float(beta))
        base = (1.0 + r) ** s * radial_profile(fn, r)
        wv = np.ones_like(r) if weight is None else radial_value(weight, r)
        if sup_mode:
            vals = wv * base
            at0 = (1.0 if weight is None else float(radial_value(weight, 0.0))) * float(radial_profile(fn, 0.0))
            return max(float(np.max(vals)), at0), factor * env.sup_tail(quad.radius)
        pure = power_exponent(weight) if weight is not None else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            if weight is None or (pure is not None and pure == k0):
                wq_first = np.ones_like(r)
            else:
                wq_first = np.power(wv / np.power(r, k0), q)
            wq_rest = np.power(wv, q) * np.power(r, fn.d - 1)
        integrand = np.where(first, wq_first, wq_rest) * np.power(base, q)
        value = sphere_area(fn.d) * float(np.sum(w * integrand))
        return value, factor ** q * env.tail(quad.radius)

    nodes, w = _tensor_rule(fn.d, float(quad.radius), quad.nodes)
    total = 0.0
    sup = 0.0
    for lo in range(0, nodes.shape[0], _CHUNK):
        xi = nodes[lo:lo + _CHUNK]
        rad = np.linalg.norm(xi, axis=-1)
        vals = (1.0 + rad) ** s * abs_f_hat(fn, xi)
        if weight is not None:
            vals = vals * radial_value(weight, rad)
        if sup_mode:
            sup = max(sup, float(np.max(vals)))
        else:
            total += float(np.sum(w[lo:lo + _CHUNK] * np.power(vals, q)))
    if sup_mode:
        return sup, factor * env.sup_tail(quad.radius)
    return total, factor ** q * env.tail(quad.radius)


def _finish(fn: TargetFunction, value: float, tail: float, q: float, s: float,
            quad: Optional[FreqQuadrature], weight: Optional[WeightSpec]) -> float:
    tol = quad.tolerance if quad is not None else FREQ_TAIL_TOL
    if math.isinf(q):
        if tail > value * (1.0 + tol) and value > 0:
            raise AccuracyError(f"frequency sup may lie outside the grid (tail sup {tail:.3g} > {value:.3g})")
        return value
    kplus = max(_weight_exponents(weight)[1], 0.0)
    ref = _Envelope(fn, q, s + kplus).ref
    if tail > tol * ref:
        raise AccuracyError(f"frequency tail bound {tail:.3g} exceeds {tol:g} of the envelope mass {ref:.3g}")
    return value if q == 1 else value ** (1.0 / q)


def barron_norm(fn: TargetFunction, s: float, quad: Optional[FreqQuadrature] = None) -> float:
    """int <xi>^s |f^(xi)| dxi."""
    if s < 0:
        raise ContractViolation(f"Barron order must be nonnegative, got {s}")
    if s >= fn.barron_limit:
        raise DivergingNormError(f"{fn.kind} is not in B^{s} (needs s < {fn.barron_limit})", factor="target")
    value, tail = spectral_integral(fn, 1.0, s, quad)
    return _finish(fn, value, tail, 1.0, s, quad, None)


def fourier_lebesgue_norm(fn: TargetFunction, q: float, s: float, quad: Optional[FreqQuadrature] = None) -> float:
    """|| <.>^s f^ ||_{L^q}; q = 1 is barron_norm."""
    if q == 1:
        return barron_norm(fn, s, quad)
    value, tail = spectral_integral(fn, q, s, quad)
    return _finish(fn, value, tail, q, s, quad, None)


def weighted_fourier_lebesgue_norm(fn: TargetFunction, w: WeightSpec, q: float, s: float = 0.0,
                                   quad: Optional[FreqQuadrature] = None) -> float:
    """|| w <.>^s f^ ||_{L^q} for a radial weight w on the frequency side."""
    value, tail = spectral_integral(fn, q, s, quad, weight=w)
    return _finish(fn, value, tail, q, s, quad, w)


# ---------------------------------------------------------------------------
# String form
# ---------------------------------------------------------------------------

_KINDS = {
    "gauss": TargetKind.GAUSSIAN,
    "mix": TargetKind.MIXTURE,
    "cauchy": TargetKind.CAUCHY,
    "spectrum": TargetKind.SPECTRUM,
}
_KEYS = {
    TargetKind.GAUSSIAN: {"d", "scale", "center", "amp"},
    TargetKind.MIXTURE: {"d", "scales", "centers", "coeffs"},
    TargetKind.CAUCHY: {"d", "scale", "center", "amp"},
    TargetKind.SPECTRUM: {"d", "n", "amp", "center", "scale"},
}


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def parse_target(text: str) -> TargetFunction:
    """
    Parse "gauss:d=2:scale=1:center=0,0:amp=1", "mix:d=1:scales=1,2:centers=0;1:coeffs=1,-1",
    "cauchy:d=1:scale=1" or "spectrum:d=1:n=5". Omitted keys take their defaults.
    """
    parts = [p.strip() for p in text.strip().split(":") if p.strip()]
    if not parts or parts[0] not in _KINDS:
        raise ParseError(f"unknown target kind in {text!r}")
    kind = _KINDS[parts[0]]
    keys = {}
    for part in parts[1:]:
        if "=" not in part:
            raise ParseError(f"expected key=value in target {text!r}, got {part!r}")
        key, value = part.split("=", 1)
        key = key.strip()
        if key not in _KEYS[kind]:
            raise ParseError(f"unknown key {key!r} for target kind {parts[0]!r}")
        keys[key] = value.strip()
    try:
        d = int(keys.get("d", 1))
        if kind == TargetKind.MIXTURE:
            centers = [_floats(c) for c in keys.get("centers", ",".join(["0"] * d)).split(";")]
            scales = _floats(keys.get("scales", "1"))
            coeffs = _floats(keys.get("coeffs", "1"))
            if any(len(c) != d for c in centers):
                raise ParseError(f"mixture centers must have dimension {d}")
            return mixture(centers, scales, coeffs)
        center = _floats(keys["center"]) if "center" in keys else None
        amp = float(keys.get("amp", 1.0))
        scale = float(keys.get("scale", 1.0))
        if kind == TargetKind.GAUSSIAN:
            return gaussian(d, scale, center, amp)
        if kind == TargetKind.CAUCHY:
            return cauchy(d, scale, center, amp)
        return spectrum(d, int(keys.get("n", 5)), amp, center, scale)
    except ParseError:
        raise
    except ContractViolation as exc:
        raise ParseError(f"invalid target {text!r}: {exc}")
    except ValueError as exc:
        raise ParseError(f"cannot parse target {text!r}: {exc}")


def target_id(fn: TargetFunction) -> str:
    """Canonical string form; parse_target(target_id(fn)) == fn."""
    def join(vals):
        return ",".join(repr(float(v)) for v in vals)

    if fn.kind == TargetKind.MIXTURE:
        centers = ";".join(join(c) for c in fn.centers)
        return f"mix:d={fn.d}:scales={join(fn.scales)}:centers={centers}:coeffs={join(fn.coefficients)}"
    head = {v: k for k, v in _KINDS.items()}[fn.kind]
    out = (f"{head}:d={fn.d}:scale={fn.scales[0]!r}:center={join(fn.centers[0])}"
           f":amp={fn.coefficients[0]!r}")
    if fn.kind == TargetKind.SPECTRUM:
        out += f":n={fn.order}"
    return out
