"""Tensor-product quadrature on products of round spheres.

``S^m`` is sliced by the first ambient coordinate: ``x = (t, sqrt(1-t^2) y)``
with ``y`` on ``S^{m-1}`` and surface measure ``(1-t^2)^((m-2)/2) dt dy``.
The polar variable uses Gauss-Jacobi nodes for that weight (Gauss-Legendre
on ``S^2``) and the recursion bottoms out at a uniform rule on the circle.
With ``P`` polar nodes and ``M`` circle nodes the rule integrates every
polynomial of degree ``<= min(2P - 1, M - 1)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from ..manifold import ProductManifold, SphereFactor

MAX_DIM = 4
DEFAULT_POLAR = 6
DEFAULT_AZIMUTH = 12


@dataclass(frozen=True)
class Rule:
    points: tuple[np.ndarray, ...]  # per factor, shape (N, m_i + 1)
    weights: np.ndarray  # (N,)

    @property
    def size(self) -> int:
        return self.weights.shape[0]


@lru_cache(maxsize=None)
def _unit_sphere_rule(m: int, n_polar: int, n_azimuth: int) -> tuple[np.ndarray, np.ndarray]:
    if m == 1:
        theta = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return pts, np.full(n_azimuth, 2 * np.pi / n_azimuth)
    a = (m - 2) / 2
    t, wt = roots_jacobi(n_polar, a, a)
    sub_pts, sub_w = _unit_sphere_rule(m - 1, n_polar, n_azimuth)
    sin = np.sqrt(1 - t * t)
    pts = np.concatenate(
        [np.repeat(t, len(sub_w))[:, None], (sin[:, None, None] * sub_pts[None, :, :]).reshape(-1, m)],
        axis=1,
    )
    return pts, np.outer(wt, sub_w).ravel()


def sphere_rule(factor: SphereFactor, n_polar: int = DEFAULT_POLAR, n_azimuth: int = DEFAULT_AZIMUTH) -> Rule:
    if n_polar < 1 or n_azimuth < 1:
        raise ValueError("node counts must be positive")
    pts, w = _unit_sphere_rule(factor.dim, n_polar, n_azimuth)
    rho = float(factor.radius_sq) ** 0.5
    return Rule((pts * rho,), w * rho ** factor.dim)


def product_rule(m: ProductManifold, n_polar: int = DEFAULT_POLAR, n_azimuth: int = DEFAULT_AZIMUTH) -> Rule:
    if m.dim > MAX_DIM:
        raise ValueError(f"quadrature is limited to total dimension <= {MAX_DIM}, got {m.dim}")
    rules = [sphere_rule(f, n_polar, n_azimuth) for f in m.factors]
    sizes = [r.size for r in rules]
    grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
    index = [g.ravel() for g in grids]
    points = tuple(r.points[0][idx] for r, idx in zip(rules, index))
    weights = np.ones(index[0].shape[0])
    for r, idx in zip(rules, index):
        weights = weights * r.weights[idx]
    return Rule(points, weights)


def sphere_volume(factor: SphereFactor) -> float:
    m = factor.dim
    return 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2) * float(factor.radius_sq) ** (m / 2)


def volume(m: ProductManifold) -> float:
    return math.prod(sphere_volume(f) for f in m.factors)


def integrate(values: np.ndarray, rule: Rule) -> float:
    """Weighted sum; numpy's pairwise summation keeps it order-stable."""
    return float(np.sum(values * rule.weights))


def quadrature_integral(
    f: Callable[[tuple[np.ndarray, ...]], np.ndarray],
    m: ProductManifold,
    n_polar: int = DEFAULT_POLAR,
    n_azimuth: int = DEFAULT_AZIMUTH,
) -> float:
    rule = product_rule(m, n_polar, n_azimuth)
    return integrate(np.asarray(f(rule.points), dtype=float), rule)
