"""
Integral representation of a Barron target over the ridge dictionary, and
Maurey sampling of N atoms from it.

f(x) = int int rho~(x; xi, b) dmu_f(xi, b) with

    bounded:   dmu_f = C (<xi>^(g+l) / phi(xi, b)) f^(xi) e^(-i tau b),
               phi(xi, b) = (1 + (|b| - R_U |xi / tau|)_+)^s
    unbounded: dmu_f = C (<xi>^(l+r) / <b>^r) f^(xi) e^(-i tau b)

and C = ((2 pi)^((d+1)/2) rho^(tau))^-1. Sampling draws xi from the
frequency marginal, then b from its exact conditional, and carries the
phase theta = arg dmu_f so the real network uses cos(theta) coefficients.
"""
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from config import TABLE_SIZE
from dictionary import (
    ActivationSpec,
    NeuronBoundConfig,
    ShallowNetwork,
    activation_fourier,
    activation_id,
    activation_sup_norm,
    save_network,
    slice_constant,
    tau_factor,
)
from errors import (
    ContractViolation,
    DivergingMassError,
    DivergingNormError,
    EnvelopeFailureError,
    NoValidTauError,
    NonIntegrableError,
    ParameterError,
)
from function_catalog import (
    FREQ_CORE,
    TargetFunction,
    abs_f_hat,
    axis_envelope,
    barron_norm,
    eval_f_hat,
    frequency_quadrature,
    radial_profile,
    spectral_integral,
    target_id,
)
from norms import DomainKind, DomainSpec, build_quadrature, domain_id, weighted_lp_norm
from weights import (
    WeightSpec,
    constant,
    decay,
    is_radial_nondecreasing,
    lower_bound_check,
    sobolev_weight_from_upsilon,
    weight_id,
)

log = logging.getLogger(__name__)

MIN_ACCEPTANCE = 1e-3

# Factor on the sampled cell maxima of the rejection envelope
ENVELOPE_SAFETY = 1.05


class Variant:
    """Enum-like class for the two constructions."""
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class MaureyConfig:
    variant: str
    target: TargetFunction
    domain: DomainSpec
    activation: ActivationSpec = field(default_factory=ActivationSpec)
    tau: float = 1.0
    ell: int = 0
    p: float = 2.0
    gamma: float = 0.0          # bounded
    s: float = 2.0              # bounded
    upsilon: Optional[WeightSpec] = None  # bounded; omega = upsilon^(-1/p')
    r: float = 2.0              # unbounded
    u: float = 4.5              # unbounded
    seed: int = 0

    @property
    def d(self) -> int:
        return self.target.d

    @property
    def r_u(self) -> float:
        return self.domain.r_max()

    @property
    def order(self) -> float:
        """Power of <xi> in the density."""
        if self.variant == Variant.BOUNDED:
            return self.gamma + self.ell
        return self.ell + self.r

    @property
    def omega(self) -> WeightSpec:
        """The weight of the error norm."""
        if self.variant == Variant.BOUNDED:
            return sobolev_weight_from_upsilon(self.upsilon or constant(self.d), self.p)
        return decay(self.u, self.d)

    @property
    def constant(self) -> complex:
        return 1.0 / ((2.0 * math.pi) ** ((self.d + 1) / 2.0) * activation_fourier(self.activation, self.tau))

    def validate(self):
        if self.variant not in (Variant.BOUNDED, Variant.UNBOUNDED):
            raise ContractViolation(f"unknown variant {self.variant!r}")
        if self.domain.d != self.d:
            raise ContractViolation(f"domain has dimension {self.domain.d}, target has {self.d}")
        if self.tau == 0.0:
            raise ParameterError("tau must be nonzero")
        if abs(activation_fourier(self.activation, self.tau)) < 1e-12:
            raise NoValidTauError(f"rho^({self.tau}) vanishes for {self.activation.kind}")
        if not (2.0 <= self.p < math.inf):
            raise ParameterError(f"the construction needs 2 <= p < inf, got {self.p}")
        if self.ell < 0 or self.ell > self.activation.max_order:
            raise ParameterError(f"ell={self.ell} is outside 0..{self.activation.max_order} for {self.activation.kind}")
        if self.seed < 0:
            raise ContractViolation(f"seed must be nonnegative, got {self.seed}")
        if self.variant == Variant.BOUNDED:
            self._validate_bounded()
        else:
            self._validate_unbounded()

    def _validate_bounded(self):
        if not self.domain.bounded:
            raise ParameterError("the bounded construction needs a box or ball")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be nonnegative, got {self.gamma}")
        if self.s <= 1.0:
            raise ParameterError(f"s must exceed 1, got {self.s}")
        if self.target.barron_limit <= self.gamma + self.ell + 1:
            raise DivergingMassError(
                f"{self.target.kind} is not in B^{self.gamma + self.ell + 1}", factor="target")
        if self.upsilon is not None:
            if self.upsilon.d != self.d:
                raise ContractViolation(f"upsilon has dimension {self.upsilon.d}, target has {self.d}")
            if not is_radial_nondecreasing(self.upsilon):
                raise ParameterError("upsilon must be radial and nondecreasing")
            points = np.outer(np.geomspace(1e-3, 1e3, 61), np.eye(self.d)[0])
            holds, worst = lower_bound_check(self.upsilon, self.gamma, self.p, points)
            if not holds:
                log.warning("upsilon >= <1/|x|>^(-gamma p') fails (worst ratio %.3g)", worst)

    def _validate_unbounded(self):
        if self.domain.kind != DomainKind.FULL:
            raise ParameterError("the unbounded construction measures errors on all of R^d")
        if not (1.0 < self.r <= self.activation.v):
            raise ParameterError(f"need 1 < r <= v={self.activation.v}, got r={self.r}")
        if (self.u - self.r) * self.p <= self.d:
            raise ParameterError(f"need (u - r) p > d, got {(self.u - self.r) * self.p}")
        if self.target.barron_limit <= self.ell + self.r:
            raise DivergingMassError(f"{self.target.kind} is not in B^{self.ell + self.r}", factor="target")


@dataclass
class SampledRepresentation:
    xi: np.ndarray
    b: np.ndarray
    theta: np.ndarray
    mass: float
    uncertainty: float
    seed: int
    acceptance: float = 1.0

    @property
    def size(self) -> int:
        return int(self.b.size)


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------

def _points(cfg: MaureyConfig, xi) -> Tuple[np.ndarray, bool]:
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim <= 1 and (cfg.d > 1 or xi.size == 1)
    pts = xi.reshape(-1, cfg.d)
    return pts, single


def modified_weight(xi, b, cfg: MaureyConfig) -> np.ndarray:
    """phi(xi, b) = (1 + (|b| - R_U |xi / tau|)_+)^s."""
    pts, _ = _points(cfg, xi)
    a = cfg.r_u * np.linalg.norm(pts, axis=-1) / abs(cfg.tau)
    return np.power(1.0 + np.maximum(np.abs(np.asarray(b, dtype=float)) - a, 0.0), cfg.s)


def density_bounded(xi, b, cfg: MaureyConfig):
    """|C| <xi>^(gamma+ell) |f^(xi)| / phi(xi, b)."""
    if cfg.variant != Variant.BOUNDED:
        raise ContractViolation("density_bounded needs the bounded variant")
    pts, single = _points(cfg, xi)
    out = (abs(cfg.constant) * np.power(1.0 + np.linalg.norm(pts, axis=-1), cfg.order)
           * np.atleast_1d(abs_f_hat(cfg.target, pts)) / modified_weight(pts, b, cfg))
    return float(out[0]) if single and np.ndim(b) == 0 else out


def density_unbounded(xi, b, cfg: MaureyConfig):
    """|C| <xi>^(ell+r) <b>^-r |f^(xi)|."""
    if cfg.variant != Variant.UNBOUNDED:
        raise ContractViolation("density_unbounded needs the unbounded variant")
    pts, single = _points(cfg, xi)
    b = np.asarray(b, dtype=float)
    out = (abs(cfg.constant) * np.power(1.0 + np.linalg.norm(pts, axis=-1), cfg.order)
           * np.power(1.0 + np.abs(b), -cfg.r) * np.atleast_1d(abs_f_hat(cfg.target, pts)))
    return float(out[0]) if single and b.ndim == 0 else out


def _marginal_terms(cfg: MaureyConfig) -> Tuple[float, float]:
    """(A, B) with int density db = |C| <xi>^order |f^(xi)| (A |xi| + B)."""
    if cfg.variant == Variant.BOUNDED:
        return 2.0 * cfg.r_u / abs(cfg.tau), 2.0 / (cfg.s - 1.0)
    return 0.0, 2.0 / (cfg.r - 1.0)


def _barron_with_tail(fn: TargetFunction, s: float) -> Tuple[float, float]:
    try:
        value = barron_norm(fn, s)
    except DivergingNormError as exc:
        raise DivergingMassError(str(exc), factor=exc.factor)
    _, tail = spectral_integral(fn, 1.0, s)
    return value, tail


def total_mass(cfg: MaureyConfig) -> Tuple[float, float]:
    """
    Variation norm M = ||mu_f||_{L^1} and an upper bound on its quadrature tail.

    The b-marginal is closed form, so M is a combination of Barron norms:
    with <xi> = 1 + |xi|, int |xi| <xi>^k |f^| = B^(k+1) - B^k.
    """
    cfg.validate()
    c = abs(cfg.constant)
    A, B = _marginal_terms(cfg)
    k = cfg.order
    low, low_tail = _barron_with_tail(cfg.target, k)
    if A == 0.0:
        mass, tail = c * B * low, c * B * low_tail
    else:
        high, high_tail = _barron_with_tail(cfg.target, k + 1.0)
        mass = c * (A * (high - low) + B * low)
        tail = c * (A * high_tail + B * low_tail)
    log.debug("mass %s: M=%.10g (tail %.3g)", cfg.variant, mass, tail)
    return mass, tail


def phase(xi, b, cfg: MaureyConfig):
    """arg(C f^(xi) e^(-i tau b)) in (-pi, pi]; 0 where f^ vanishes."""
    pts, single = _points(cfg, xi)
    b = np.asarray(b, dtype=float)
    z = cfg.constant * np.atleast_1d(eval_f_hat(cfg.target, pts)) * np.exp(-1j * cfg.tau * b)
    theta = np.angle(z)
    theta = np.where(theta <= -math.pi, math.pi, theta)
    theta = np.where(np.abs(z) == 0.0, 0.0, theta)
    return float(theta[0]) if single and b.ndim == 0 else theta


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def make_stream(seed: int, N: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, N)."""
    if seed < 0 or N < 0:
        raise ContractViolation("seed and N must be nonnegative")
    return np.random.Generator(np.random.Philox(key=np.array([seed, N], dtype=np.uint64)))


def _b_magnitude(U: np.ndarray, a: np.ndarray, cfg: MaureyConfig) -> np.ndarray:
    """Inverse CDF of |b| given the plateau half-width a."""
    if cfg.variant == Variant.UNBOUNDED:
        return np.power(1.0 - U, -1.0 / (cfg.r - 1.0)) - 1.0
    c = 1.0 / (cfg.s - 1.0)
    m = U * (a + c)
    with np.errstate(invalid="ignore", divide="ignore"):
        tail = a + np.power(np.maximum(1.0 - (m - a) / c, 1e-300), -1.0 / (cfg.s - 1.0)) - 1.0
    return np.where(m <= a, m, tail)


def conditional_b_cdf(xi, b, cfg: MaureyConfig):
    """CDF of b given xi under the normalized density."""
    pts, single = _points(cfg, xi)
    b = np.asarray(b, dtype=float)
    y = np.abs(b)
    if cfg.variant == Variant.UNBOUNDED:
        G = 1.0 - np.power(1.0 + y, -(cfg.r - 1.0))
    else:
        a = cfg.r_u * np.linalg.norm(pts, axis=-1) / abs(cfg.tau)
        c = 1.0 / (cfg.s - 1.0)
        inner = np.minimum(y, a)
        outer = c * (1.0 - np.power(1.0 + np.maximum(y - a, 0.0), -(cfg.s - 1.0)))
        G = (inner + outer) / (a + c)
    out = 0.5 + 0.5 * np.sign(b) * G
    return float(np.atleast_1d(out)[0]) if single and b.ndim == 0 else out


def _radial_table(cfg: MaureyConfig, T: float) -> Tuple[np.ndarray, np.ndarray]:
    """Monotone inverse-CDF table of the radial frequency marginal."""
    A, B = _marginal_terms(cfg)
    d = cfg.d
    r = np.linspace(0.0, T, TABLE_SIZE)
    dens = np.power(r, d - 1) * np.power(1.0 + r, cfg.order) * radial_profile(cfg.target, r) * (A * r + B)
    steps = 0.5 * (dens[1:] + dens[:-1]) * np.diff(r)
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    cdf /= cdf[-1]
    return r, cdf


def _invert(table_x: np.ndarray, cdf: np.ndarray, U: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(cdf, U, side="right"), 1, cdf.size - 1)
    lo, hi = cdf[idx - 1], cdf[idx]
    width = np.where(hi > lo, hi - lo, 1.0)
    frac = np.clip((U - lo) / width, 0.0, 1.0)
    return table_x[idx - 1] + frac * (table_x[idx] - table_x[idx - 1])


def _directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    if d == 1:
        return np.where(rng.random(n) < 0.5, -1.0, 1.0)[:, None]
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


class _AxisEnvelope:
    """
    Piecewise-constant upper envelope of h(t) = (1 + |t|)^(k+1) a(t) on [-T, T].

    Cells are uniform up to the frequency core and geometric beyond; the cell
    value is the largest of h at both ends and the midpoint, times
    ENVELOPE_SAFETY. On cells where h is monotone the endpoint value is already
    a bound; the factor covers the few cells holding a turning point of h.
    """

    def __init__(self, a, k: float, T: float):
        half = TABLE_SIZE // 2
        inner = np.linspace(0.0, min(FREQ_CORE, T), half)
        outer = np.geomspace(min(FREQ_CORE, T), T, half)[1:] if T > FREQ_CORE else np.empty(0)
        pos = np.concatenate([inner, outer])
        self.edges = np.concatenate([-pos[::-1], pos[1:]])

        def h(t):
            return np.power(1.0 + np.abs(t), k + 1.0) * a(t)

        mid = 0.5 * (self.edges[1:] + self.edges[:-1])
        self.height = ENVELOPE_SAFETY * np.maximum(np.maximum(h(self.edges[1:]), h(self.edges[:-1])), h(mid))
        mass = self.height * np.diff(self.edges)
        self.total = float(np.sum(mass))
        self.cdf = np.concatenate([[0.0], np.cumsum(mass)]) / self.total

    def sample(self, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Draws and the envelope height at each draw."""
        U = rng.random(n)
        cell = np.clip(np.searchsorted(self.cdf, U, side="right") - 1, 0, self.height.size - 1)
        t = self.edges[cell] + rng.random(n) * (self.edges[cell + 1] - self.edges[cell])
        return t, self.height[cell]


def _sample_radial(cfg: MaureyConfig, rng: np.random.Generator, N: int, T: float) -> np.ndarray:
    r, cdf = _radial_table(cfg, T)
    radius = _invert(r, cdf, rng.random(N))
    return radius[:, None] * _directions(rng, N, cfg.d)


def _sample_rejection(cfg: MaureyConfig, rng: np.random.Generator, N: int, T: float,
                      mass: float) -> Tuple[np.ndarray, float]:
    # <xi>^k |f^| (A|xi| + B) <= C max(A, B) prod (1 + |xi_k|)^(k+1) a(xi_k)
    C, a = axis_envelope(cfg.target)
    A, B = _marginal_terms(cfg)
    env = _AxisEnvelope(a, cfg.order, T)
    scale = C * max(A, B)
    acceptance = mass / (abs(cfg.constant) * scale * env.total ** cfg.d)
    if acceptance < MIN_ACCEPTANCE:
        raise EnvelopeFailureError(f"envelope acceptance {acceptance:.3g} is below {MIN_ACCEPTANCE:g}")
    if acceptance < 0.05:
        log.warning("low envelope acceptance %.3g for %s", acceptance, cfg.target.kind)
    out = np.empty((N, cfg.d))
    filled = 0
    batch = max(64, int(2 * N / acceptance))
    while filled < N:
        draws = [env.sample(rng, batch) for _ in range(cfg.d)]
        xi = np.stack([t for t, _ in draws], axis=-1)
        height = scale * np.prod(np.stack([h for _, h in draws], axis=-1), axis=-1)
        norm = np.linalg.norm(xi, axis=-1)
        target = np.power(1.0 + norm, cfg.order) * abs_f_hat(cfg.target, xi) * (A * norm + B)
        ratio = target / height
        if np.any(ratio > 1.0):
            raise EnvelopeFailureError(f"envelope undershoots the frequency density (ratio {float(np.max(ratio)):.6g})")
        keep = xi[rng.random(batch) < ratio]
        take = min(N - filled, keep.shape[0])
        out[filled:filled + take] = keep[:take]
        filled += take
    return out, float(acceptance)


def sample_atoms(cfg: MaureyConfig, N: int, seed: Optional[int] = None) -> SampledRepresentation:
    """
    N i.i.d. draws (xi, b) from |mu_f| / M with their phases.

    Same (cfg, N, seed) gives bit-identical output.
    """
    seed = cfg.seed if seed is None else int(seed)
    if N < 0:
        raise ContractViolation(f"N must be nonnegative, got {N}")
    mass, tail = total_mass(cfg)
    d = cfg.d
    if N == 0:
        return SampledRepresentation(np.zeros((0, d)), np.zeros(0), np.zeros(0), mass, tail, seed)
    rng = make_stream(seed, N)
    T = frequency_quadrature(cfg.target, s=cfg.order + 1.0).radius
    acceptance = 1.0
    if cfg.target.radial:
        xi = _sample_radial(cfg, rng, N, T)
    else:
        xi, acceptance = _sample_rejection(cfg, rng, N, T, mass)
    a = cfg.r_u * np.linalg.norm(xi, axis=-1) / abs(cfg.tau) if cfg.variant == Variant.BOUNDED else np.zeros(N)
    magnitude = _b_magnitude(rng.random(N), a, cfg)
    b = np.where(rng.random(N) < 0.5, -magnitude, magnitude)
    theta = np.atleast_1d(phase(xi, b, cfg))
    log.debug("sampled %d atoms (seed %d, T=%g, acceptance %.3g)", N, seed, T, acceptance)
    return SampledRepresentation(xi, b, theta, mass, tail, seed, acceptance)


def assemble_network(rep: SampledRepresentation, cfg: MaureyConfig) -> ShallowNetwork:
    """Empirical mean of the representation: coefficients (M/N) cos(theta_i)."""
    N = rep.size
    if N == 0:
        return ShallowNetwork(np.zeros((0, cfg.d)), [], cfg.tau, [], [], rep.mass, cfg.activation, cfg.d)
    bracket_xi = 1.0 + np.linalg.norm(rep.xi, axis=-1)
    if cfg.variant == Variant.BOUNDED:
        prefactor = modified_weight(rep.xi, rep.b, cfg) / np.power(bracket_xi, cfg.gamma + cfg.ell)
    else:
        prefactor = np.power(1.0 + np.abs(rep.b), cfg.r) / np.power(bracket_xi, cfg.r + cfg.ell)
    coefficient = (rep.mass / N) * np.cos(rep.theta)
    return ShallowNetwork(rep.xi, rep.b, cfg.tau, prefactor, coefficient, rep.mass, cfg.activation, cfg.d)


def omega_norm(cfg: MaureyConfig, resolution: int = 32) -> float:
    """||omega||_{L^p(U)} on the bounded domain."""
    omega = cfg.omega
    try:
        grid = build_quadrature(cfg.domain, omega, resolution, cfg.p)
        return float(weighted_lp_norm(lambda X: np.ones(X.shape[0]), omega, cfg.p, grid))
    except NonIntegrableError as exc:
        raise ParameterError(f"omega is not in L^{cfg.p}(U): {exc}")


def dictionary_bound(cfg: MaureyConfig, resolution: int = 32) -> float:
    """
    Uniform bound K on the weighted Sobolev norm of every dictionary atom.

    bounded:   ||rho||_{W^(l,inf)(<.>^s)} * sum_alpha |tau|^-|alpha| * ||omega||_{L^p(U)}
    unbounded: ||rho||_{W^(l,inf)(<.>^v)} * sum_alpha |tau|^-|alpha|
               * (K_d 2 / ((u - r) p - d))^(1/p) * min(1, |tau|)^-r
    """
    cfg.validate()
    taus = tau_factor(cfg.tau, cfg.ell, cfg.d)
    if cfg.variant == Variant.BOUNDED:
        c_rho = activation_sup_norm(cfg.activation, cfg.ell, cfg.s)
        return c_rho * taus * omega_norm(cfg, resolution)
    ncfg = NeuronBoundConfig(cfg.ell, cfg.p, cfg.u, cfg.activation.v, cfg.r, cfg.tau, cfg.d, cfg.activation)
    ncfg.validate()
    c_rho = activation_sup_norm(cfg.activation, cfg.ell, cfg.activation.v)
    reduced = slice_constant(cfg.d, cfg.u * cfg.p) * 2.0 / ((cfg.u - cfg.r) * cfg.p - cfg.d)
    return c_rho * taus * reduced ** (1.0 / cfg.p) * min(1.0, abs(cfg.tau)) ** (-cfg.r)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def config_dict(cfg: MaureyConfig) -> dict:
    out = {
        "variant": cfg.variant,
        "target": target_id(cfg.target),
        "activation": activation_id(cfg.activation),
        "domain": domain_id(cfg.domain),
        "tau": cfg.tau,
        "ell": cfg.ell,
        "p": cfg.p,
        "seed": cfg.seed,
    }
    if cfg.variant == Variant.BOUNDED:
        out.update(gamma=cfg.gamma, s=cfg.s, upsilon=weight_id(cfg.upsilon or constant(cfg.d)))
    else:
        out.update(r=cfg.r, u=cfg.u)
    return out


def write_representation(rep: SampledRepresentation, cfg: MaureyConfig, path: str,
                         extra: Optional[dict] = None) -> str:
    """Write the assembled network to path and its sidecar next to it; returns the sidecar path."""
    save_network(assemble_network(rep, cfg), path)
    sidecar = os.path.splitext(path)[0] + ".json"
    meta = {
        "config": config_dict(cfg),
        "N": rep.size,
        "M": rep.mass,
        "uncertainty": rep.uncertainty,
        "seed": rep.seed,
        "acceptance": rep.acceptance,
    }
    meta.update(extra or {})
    with open(sidecar, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    return sidecar


def read_sidecar(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
