"""
Gauss rules shared by the frequency-side and spatial-side integrators.

Everything returns plain (nodes, weights) numpy arrays; tensor grids are
built with an 'ij' meshgrid so node order is deterministic.
"""
import math
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
from scipy import special

from errors import ContractViolation

Rule = Tuple[np.ndarray, np.ndarray]


@lru_cache(maxsize=64)
def _leggauss(n: int) -> Rule:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float, b: float) -> Rule:
    """n-point Gauss-Legendre rule on [a, b]."""
    if n < 1:
        raise ContractViolation(f"need at least one node, got {n}")
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


@lru_cache(maxsize=128)
def _jacobi_unit(n: int, beta: float) -> Rule:
    x, w = special.roots_jacobi(n, 0.0, beta)
    t = 0.5 * (x + 1.0)
    w = w * 2.0 ** (-beta - 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_jacobi_unit(n: int, beta: float) -> Rule:
    """
    Rule for int_0^1 t^beta F(t) dt with the power absorbed into the weights.

    Exact for polynomial F of degree <= 2n-1; beta must exceed -1.
    """
    if beta <= -1.0:
        raise ContractViolation(f"Jacobi exponent must exceed -1, got {beta}")
    if beta == 0.0:
        x, w = gauss_legendre(n, 0.0, 1.0)
        return x, w
    return _jacobi_unit(n, float(beta))


def composite(edges: Sequence[float], n: int) -> Rule:
    """Gauss-Legendre with n nodes on every panel [edges[i], edges[i+1]]."""
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            x, w = gauss_legendre(n, a, b)
            xs.append(x)
            ws.append(w)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def graded_edges(T: float, core: float, start: float = 0.0) -> List[float]:
    """
    Panel edges on [start, T]: unit panels up to `core`, then doubling.

    The last edge is the first doubling point at or beyond T, so the
    covered interval may exceed T.
    """
    edges = [start]
    x = start
    while x < min(core, T) - 1e-12:
        x = min(x + 1.0, core)
        edges.append(x)
    while x < T - 1e-12:
        x = 2.0 * x if x > 0 else 1.0
        edges.append(x)
    return edges


def symmetric_axis(T: float, core: float, n: int) -> Rule:
    """Composite rule on [-T', T'] split at 0, mirrored from graded_edges."""
    x, w = composite(graded_edges(T, core), n)
    return np.concatenate([-x[::-1], x]), np.concatenate([w[::-1], w])


def tensor(rules: Sequence[Rule]) -> Rule:
    """Tensor product of one-dimensional rules; nodes have shape (n, d)."""
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


def sphere_rule(d: int, n: int) -> Rule:
    """
    Directions on S^(d-1) with surface weights summing to |S^(d-1)|.

    d=1 is the two-point set {-1, 1}; d=2 is the equispaced circle rule
    (exact for trigonometric degree < 4n); d=3 is Gauss-Legendre in cos(theta)
    times an equispaced azimuth.
    """
    if d == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if d == 2:
        m = max(4 * n, 8)
        phi = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(m, 2.0 * math.pi / m)
    if d == 3:
        z, wz = gauss_legendre(n, -1.0, 1.0)
        m = max(2 * n, 8)
        phi = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        ww = np.repeat(wz, m) * (2.0 * math.pi / m)
        s = np.sqrt(np.maximum(1.0 - zz ** 2, 0.0))
        dirs = np.stack([(s * np.cos(pp)).ravel(), (s * np.sin(pp)).ravel(), zz.ravel()], axis=-1)
        return dirs, ww
    raise ContractViolation(f"sphere rules are available for d <= 3, got d={d}")
