"""
Activation functions, ridge-function atoms and shallow networks.

An atom is prefactor * rho(<xi, x>/tau + b); a network is a finite sum of
atoms with coefficients whose absolute sum stays within a declared budget.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, special

from errors import (
    ContractViolation,
    NoValidTauError,
    ParameterError,
    ParseError,
    UnsupportedOrderError,
)
from norms import multi_indices

log = logging.getLogger(__name__)


class ActivationKind:
    """Enum-like class for activation families."""
    GAUSSIAN = "gaussian"
    SECH = "sech"
    RATIONAL = "rational-decay"
    BUMP = "raised-cosine-bump"


# Largest decay exponent v each family supports, and its derivative order m
_MAX_DECAY = {
    ActivationKind.GAUSSIAN: math.inf,
    ActivationKind.SECH: math.inf,
    ActivationKind.RATIONAL: 2.0,
    ActivationKind.BUMP: 3.0,
}
_MAX_ORDER = {
    ActivationKind.GAUSSIAN: 8,
    ActivationKind.SECH: 4,
    ActivationKind.RATIONAL: 8,
    ActivationKind.BUMP: 8,
}
_DEFAULT_DECAY = {
    ActivationKind.GAUSSIAN: 3.0,
    ActivationKind.SECH: 3.0,
    ActivationKind.RATIONAL: 2.0,
    ActivationKind.BUMP: 2.0,
}


@dataclass(frozen=True)
class ActivationSpec:
    kind: str = ActivationKind.GAUSSIAN
    v: float = 3.0
    band: float = 1.0  # half-width of supp rho^ for the bump

    def __post_init__(self):
        if self.kind not in _MAX_ORDER:
            raise ContractViolation(f"unknown activation kind {self.kind!r}")
        if not (1.0 < self.v <= _MAX_DECAY[self.kind]):
            raise ContractViolation(
                f"{self.kind} supports decay exponents in (1, {_MAX_DECAY[self.kind]}], got {self.v}")
        if self.band <= 0:
            raise ContractViolation(f"band must be positive, got {self.band}")

    @property
    def max_order(self) -> int:
        return _MAX_ORDER[self.kind]


def _sinc_derivative(k: int, z: np.ndarray) -> np.ndarray:
    """k-th derivative of sin(z)/z."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1.0
    if np.any(small):
        zs = z[small]
        acc = np.zeros_like(zs)
        for j in range((k + 1) // 2, 30):
            acc += ((-1) ** j * math.factorial(2 * j) / (math.factorial(2 * j - k) * math.factorial(2 * j + 1))
                    * zs ** (2 * j - k))
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        acc = np.zeros_like(zb)
        for j in range(k + 1):
            acc += (math.comb(k, j) * np.sin(zb + (k - j) * math.pi / 2.0)
                    * (-1) ** j * math.factorial(j) * zb ** (-j - 1.0))
        out[big] = acc
    return out


def eval_activation(rho: ActivationSpec, k: int, t):
    """Closed-form k-th derivative of rho at t (scalar or array)."""
    if k < 0:
        raise ContractViolation(f"derivative order must be nonnegative, got {k}")
    if k > rho.max_order:
        raise UnsupportedOrderError(f"{rho.kind} has derivatives up to order {rho.max_order}, got {k}")
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if rho.kind == ActivationKind.GAUSSIAN:
        out = (-1.0) ** k * hermite_e.hermeval(t, [0.0] * k + [1.0]) * np.exp(-0.5 * t * t)
    elif rho.kind == ActivationKind.RATIONAL:
        out = (-1.0) ** k * math.factorial(k) * np.imag(np.power(t - 1j, -k - 1))
    elif rho.kind == ActivationKind.SECH:
        s = 1.0 / np.cosh(t)
        th = np.tanh(t)
        out = [
            s,
            -s * th,
            s - 2.0 * s ** 3,
            -s * th * (1.0 - 6.0 * s * s),
            s - 20.0 * s ** 3 + 24.0 * s ** 5,
        ][k]
    else:
        om = rho.band
        a = math.pi / om
        out = (2.0 * math.pi) ** -0.5 * om ** (k + 1) * (
            _sinc_derivative(k, om * t)
            + 0.5 * _sinc_derivative(k, om * (t - a))
            + 0.5 * _sinc_derivative(k, om * (t + a)))
    return float(out) if scalar else out


def activation_fourier(rho: ActivationSpec, tau: float) -> complex:
    """rho^(tau) under the symmetric normalization."""
    tau = float(tau)
    if rho.kind == ActivationKind.GAUSSIAN:
        return complex(math.exp(-0.5 * tau * tau))
    if rho.kind == ActivationKind.SECH:
        return complex(math.sqrt(math.pi / 2.0) / math.cosh(math.pi * tau / 2.0))
    if rho.kind == ActivationKind.RATIONAL:
        return complex(math.sqrt(math.pi / 2.0) * math.exp(-abs(tau)))
    if abs(tau) >= rho.band:
        return 0j
    return complex(0.5 * (1.0 + math.cos(math.pi * tau / rho.band)))


def select_tau(rho: ActivationSpec, grid: Sequence[float]) -> float:
    """
    The grid value maximizing |rho^(tau)|.

    Ties go to the smallest |tau|, then to the positive sign.
    """
    taus = [float(t) for t in grid]
    if not taus:
        raise ContractViolation("tau grid is empty")
    if any(t == 0.0 for t in taus):
        raise ContractViolation("tau grid must exclude 0")
    mags = [abs(activation_fourier(rho, t)) for t in taus]
    best = max(mags)
    if best < 1e-12:
        raise NoValidTauError(f"|rho^| < 1e-12 on the whole tau grid for {rho.kind}")
    tied = [t for t, m in zip(taus, mags) if m >= best * (1.0 - 1e-12)]
    return min(tied, key=lambda t: (abs(t), -t))


@lru_cache(maxsize=64)
def activation_sup_norm(rho: ActivationSpec, ell: int, v: float) -> float:
    """
    ||rho||_{W^{ell,inf}(<.>^v)} = max over k <= ell of sup_t (1 + |t|)^v |rho^(k)(t)|, by dense scan.
    """
    if v > _MAX_DECAY[rho.kind]:
        raise ParameterError(f"{rho.kind} is not in W^(ell,inf)(<.>^{v})")
    core = np.linspace(-64.0, 64.0, 256_001)
    far = np.geomspace(64.0, 1e6, 40_001)
    t = np.concatenate([-far[::-1], core, far])
    weight = np.power(1.0 + np.abs(t), v)
    return max(float(np.max(weight * np.abs(eval_activation(rho, k, t)))) for k in range(ell + 1))


# ---------------------------------------------------------------------------
# Atoms and networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    xi: Tuple[float, ...]
    b: float
    tau: float
    prefactor: float
    coefficient: float = 1.0

    def __post_init__(self):
        if self.tau == 0.0:
            raise ContractViolation("tau must be nonzero")
        if not self.prefactor > 0.0:
            raise ContractViolation(f"prefactor must be positive, got {self.prefactor}")


def atom_eval(a: Atom, rho: ActivationSpec, x, alpha: Sequence[int]):
    """prefactor * xi^alpha / tau^|alpha| * rho^(|alpha|)(<xi, x>/tau + b)."""
    alpha = tuple(int(v) for v in alpha)
    if len(alpha) != len(a.xi):
        raise ContractViolation(f"multi-index {alpha} does not match dimension {len(a.xi)}")
    k = sum(alpha)
    xi = np.asarray(a.xi, dtype=float)
    x = np.asarray(x, dtype=float)
    z = (x @ xi) / a.tau + a.b
    scale = a.prefactor * float(np.prod(xi ** np.asarray(alpha))) / a.tau ** k
    return scale * eval_activation(rho, k, z)


class ShallowNetwork:
    """
    Immutable sum of N ridge atoms sharing one tau.

    Args:
        xi: frequencies, shape (N, d)
        b: offsets, shape (N,)
        tau: the common dilation
        prefactor: positive atom normalizations, shape (N,)
        coefficient: outer coefficients, shape (N,)
        budget: declared bound M on sum |coefficient|
        activation: the activation the atoms were built for
    """

    def __init__(self, xi, b, tau: float, prefactor, coefficient, budget: float,
                 activation: Optional[ActivationSpec] = None, d: Optional[int] = None):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 1:
            xi = xi.reshape(0, d or 1) if xi.size == 0 else xi[:, None]
        self.xi = xi
        self.d = int(d if d is not None else xi.shape[1])
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.prefactor = np.asarray(prefactor, dtype=float).reshape(-1)
        self.coefficient = np.asarray(coefficient, dtype=float).reshape(-1)
        self.tau = float(tau)
        self.budget = float(budget)
        self.activation = activation or ActivationSpec()
        self._validate()
        for arr in (self.xi, self.b, self.prefactor, self.coefficient):
            arr.setflags(write=False)

    def _validate(self):
        n = self.xi.shape[0]
        if self.xi.shape[1] != self.d:
            raise ContractViolation(f"frequencies have dimension {self.xi.shape[1]}, network has {self.d}")
        if not (self.b.size == self.prefactor.size == self.coefficient.size == n):
            raise ContractViolation("atom arrays must have one entry per atom")
        if self.tau == 0.0:
            raise ContractViolation("tau must be nonzero")
        if n and not np.all(self.prefactor > 0):
            raise ContractViolation("atom prefactors must be positive")
        if self.budget < 0:
            raise ContractViolation(f"budget must be nonnegative, got {self.budget}")
        used = float(np.sum(np.abs(self.coefficient)))
        if used > self.budget * (1.0 + 1e-12) + 1e-12:
            raise ParameterError(f"coefficient sum {used:.17g} exceeds the budget {self.budget:.17g}")

    @classmethod
    def from_atoms(cls, atoms: Iterable[Atom], budget: float, activation: Optional[ActivationSpec] = None,
                   d: Optional[int] = None) -> "ShallowNetwork":
        atoms = list(atoms)
        if not atoms:
            return cls(np.zeros((0, d or 1)), [], 1.0, [], [], budget, activation, d or 1)
        taus = {a.tau for a in atoms}
        if len(taus) != 1:
            raise ContractViolation("all atoms of a network must share tau")
        return cls([a.xi for a in atoms], [a.b for a in atoms], atoms[0].tau,
                   [a.prefactor for a in atoms], [a.coefficient for a in atoms], budget, activation)

    @property
    def width(self) -> int:
        return int(self.b.size)

    @property
    def atoms(self) -> List[Atom]:
        return [Atom(tuple(float(v) for v in self.xi[i]), float(self.b[i]), self.tau,
                     float(self.prefactor[i]), float(self.coefficient[i])) for i in range(self.width)]

    def scaled(self, c: float) -> "ShallowNetwork":
        return ShallowNetwork(self.xi, self.b, self.tau, self.prefactor, c * self.coefficient,
                              abs(c) * self.budget, self.activation, self.d)

    def concatenated(self, other: "ShallowNetwork") -> "ShallowNetwork":
        if other.d != self.d or other.tau != self.tau or other.activation != self.activation:
            raise ContractViolation("networks differ in dimension, tau or activation")
        return ShallowNetwork(np.vstack([self.xi, other.xi]), np.concatenate([self.b, other.b]), self.tau,
                              np.concatenate([self.prefactor, other.prefactor]),
                              np.concatenate([self.coefficient, other.coefficient]),
                              self.budget + other.budget, self.activation, self.d)

    def partial(self, alpha, X):
        return network_eval(self, self.activation, X, alpha)


def network_eval(net: ShallowNetwork, rho: ActivationSpec, x, alpha: Sequence[int]):
    """sum_i coefficient_i * atom_eval(atom_i, rho, x, alpha), vectorized over points."""
    alpha = tuple(int(v) for v in alpha)
    if len(alpha) != net.d:
        raise ContractViolation(f"multi-index {alpha} does not match dimension {net.d}")
    k = sum(alpha)
    if k > rho.max_order:
        raise UnsupportedOrderError(f"{rho.kind} has derivatives up to order {rho.max_order}, got {k}")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and (net.d > 1 or x.size == 1))
    X = x.reshape(-1, net.d)
    out = np.zeros(X.shape[0])
    if net.width == 0:
        return float(out[0]) if single else out
    outer = net.coefficient * net.prefactor * np.prod(net.xi ** np.asarray(alpha), axis=1) / net.tau ** k
    chunk = max(1, (1 << 22) // net.width)
    for lo in range(0, X.shape[0], chunk):
        Z = (X[lo:lo + chunk] @ net.xi.T) / net.tau + net.b
        out[lo:lo + chunk] = eval_activation(rho, k, Z) @ outer
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Neuron bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeuronBoundConfig:
    """Parameters of the ridge norm ||rho(<xi, .>/tau + b)||_{W^{ell,p}(<.>^-u; R^d)}."""
    ell: int
    p: float
    u: float
    v: float
    r: float
    tau: float
    d: int = 1
    activation: ActivationSpec = field(default_factory=ActivationSpec)

    def validate(self):
        if not (2.0 <= self.p < math.inf):
            raise ParameterError(f"neuron bounds need 2 <= p < inf, got {self.p}")
        if not (1.0 < self.r <= self.v):
            raise ParameterError(f"neuron bounds need 1 < r <= v, got r={self.r}, v={self.v}")
        if (self.u - self.r) * self.p <= self.d:
            raise ParameterError(f"neuron bounds need (u - r) p > d, got {(self.u - self.r) * self.p}")
        if self.tau == 0.0:
            raise ParameterError("tau must be nonzero")
        if self.ell < 0:
            raise ParameterError(f"ell must be nonnegative, got {self.ell}")


def slice_constant(d: int, up: float) -> float:
    """
    int over R^(d-1) of (1 + |z|^2)^(-up/2) dz.

    Bounds the integral of <x>^(-up) over a hyperplane slice at distance s by
    this constant times (1 + |s|)^(d - 1 - up), since (1 + |x|)^2 >= (1 + |s|)^2 + |y|^2.
    """
    if d == 1:
        return 1.0
    return math.pi ** ((d - 1) / 2.0) * math.exp(special.gammaln((up - d + 1) / 2.0) - special.gammaln(up / 2.0))


def tau_factor(tau: float, ell: int, d: int) -> float:
    """sum over |alpha| <= ell of |tau|^-|alpha|, counted with multiplicity."""
    return sum(math.comb(k + d - 1, d - 1) * abs(tau) ** -k for k in range(ell + 1))


def _frequency_factor(xi: np.ndarray, cfg: NeuronBoundConfig) -> float:
    total = 0.0
    for alpha in multi_indices(cfg.d, cfg.ell):
        mono = float(np.prod(np.abs(xi) ** np.asarray(alpha)))
        total += mono ** cfg.p * abs(cfg.tau) ** (-sum(alpha) * cfg.p)
    return total ** (1.0 / cfg.p)


def _check_xi(xi, cfg: NeuronBoundConfig) -> np.ndarray:
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.size != cfg.d:
        raise ContractViolation(f"frequency has dimension {xi.size}, config has {cfg.d}")
    return xi


def neuron_sobolev_bound(xi, b: float, cfg: NeuronBoundConfig) -> float:
    """
    Explicit bound on the weighted Sobolev norm of one ridge function.

    C_rho * (sum_alpha |xi^alpha|^p |tau|^(-|alpha| p))^(1/p)
          * (K_d * 2 / ((u - r) p - d))^(1/p) * (1 + m |b|)^(-r),
    with m = min(1, |tau|/|xi|), K_d = slice_constant(d, u p) and
    C_rho = activation_sup_norm(rho, ell, v). At xi = 0 only alpha = 0 survives.
    """
    cfg.validate()
    xi = _check_xi(xi, cfg)
    norm_xi = float(np.linalg.norm(xi))
    m = 1.0 if norm_xi == 0.0 else min(1.0, abs(cfg.tau) / norm_xi)
    c_rho = activation_sup_norm(cfg.activation, cfg.ell, cfg.v)
    up = cfg.u * cfg.p
    reduced = slice_constant(cfg.d, up) * 2.0 / ((cfg.u - cfg.r) * cfg.p - cfg.d)
    return (c_rho * _frequency_factor(xi, cfg) * reduced ** (1.0 / cfg.p)
            * (1.0 + m * abs(b)) ** (-cfg.r))


def neuron_profile_bound(xi, b: float, cfg: NeuronBoundConfig) -> float:
    """
    Sharper bound keeping the one-dimensional profile integral
    int (1 + |s|)^(d-1-up) (1 + ||xi| s/tau + b|)^(-vp) ds, evaluated by quad.
    """
    cfg.validate()
    xi = _check_xi(xi, cfg)
    norm_xi = float(np.linalg.norm(xi))
    up, vp = cfg.u * cfg.p, cfg.v * cfg.p
    a = up - cfg.d + 1.0
    if norm_xi == 0.0:
        profile = (1.0 + abs(b)) ** (-vp) * 2.0 / (a - 1.0)
    else:
        c = norm_xi / cfg.tau
        kink = -b / c
        points = sorted({0.0, kink})

        def f(s):
            return (1.0 + abs(s)) ** (-a) * (1.0 + abs(c * s + b)) ** (-vp)

        pieces = [(-math.inf, points[0])] + list(zip(points[:-1], points[1:])) + [(points[-1], math.inf)]
        profile = sum(integrate.quad(f, lo, hi, limit=200)[0] for lo, hi in pieces if hi > lo)
    c_rho = activation_sup_norm(cfg.activation, cfg.ell, cfg.v)
    bound = c_rho * _frequency_factor(xi, cfg) * (slice_constant(cfg.d, up) * profile) ** (1.0 / cfg.p)
    return min(bound, neuron_sobolev_bound(xi, b, cfg))


# ---------------------------------------------------------------------------
# String forms and persistence
# ---------------------------------------------------------------------------

_ACT_NAMES = {
    "gaussian": ActivationKind.GAUSSIAN,
    "sech": ActivationKind.SECH,
    "rational": ActivationKind.RATIONAL,
    "bump": ActivationKind.BUMP,
}


def parse_activation(text: str) -> ActivationSpec:
    """Parse "gaussian[:v=3]", "sech[:v=3]", "rational[:v=2]" or "bump[:band=1:v=2]"."""
    parts = [p.strip() for p in text.strip().split(":") if p.strip()]
    if not parts or parts[0] not in _ACT_NAMES:
        raise ParseError(f"unknown activation {text!r}")
    kind = _ACT_NAMES[parts[0]]
    keys = {"v": _DEFAULT_DECAY[kind], "band": 1.0}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        if key not in ("v", "band") or (key == "band" and kind != ActivationKind.BUMP):
            raise ParseError(f"unknown key {key!r} for activation {parts[0]!r}")
        try:
            keys[key] = float(value)
        except ValueError:
            raise ParseError(f"cannot parse {part!r} in activation {text!r}")
    try:
        return ActivationSpec(kind, keys["v"], keys["band"])
    except ContractViolation as exc:
        raise ParseError(str(exc))


def activation_id(rho: ActivationSpec) -> str:
    name = {v: k for k, v in _ACT_NAMES.items()}[rho.kind]
    if rho.kind == ActivationKind.BUMP:
        return f"{name}:band={rho.band!r}:v={rho.v!r}"
    return f"{name}:v={rho.v!r}"


def save_network(net: ShallowNetwork, path: str):
    """Header line, then one atom per line: xi components, b, prefactor, coefficient."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"d={net.d} N={net.width} M={net.budget:.17e} tau={net.tau:.17e} "
                 f"activation={activation_id(net.activation)}\n")
        for i in range(net.width):
            cols = list(net.xi[i]) + [net.b[i], net.prefactor[i], net.coefficient[i]]
            fh.write(" ".join(f"{v:.17e}" for v in cols) + "\n")
    log.info("wrote network with %d atoms to %s", net.width, path)


def load_network(path: str) -> ShallowNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError(f"{path} is empty")
    try:
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        d, n = int(header["d"]), int(header["N"])
        rows = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=float).reshape(-1, d + 3)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"malformed network file {path}: {exc}")
    if rows.shape[0] != n:
        raise ParseError(f"{path} declares {n} atoms but holds {rows.shape[0]}")
    return ShallowNetwork(rows[:, :d], rows[:, d], float(header["tau"]), rows[:, d + 1], rows[:, d + 2],
                          float(header["M"]), parse_activation(header["activation"]), d)
