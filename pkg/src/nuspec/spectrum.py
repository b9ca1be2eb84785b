"""Exact joint Laplace spectrum of a product of round spheres.

Everything here is integer/Fraction arithmetic.  Eigenvalues are reported as
positive numbers (``-Delta`` convention): a mode with eigenvalue ``lam``
satisfies ``Delta phi = -lam phi``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator

from .manifold import ProductManifold, Rational, SphereFactor, as_fraction, format_fraction


@dataclass(frozen=True)
class FactorMode:
    level: int
    eigenvalue: Fraction
    multiplicity: int


@dataclass(frozen=True)
class JointEigenvalue:
    levels: tuple[int, ...]
    components: tuple[Fraction, ...]
    total: Fraction
    multiplicity: int

    def __post_init__(self) -> None:
        if len(self.levels) != len(self.components):
            raise ValueError("levels and components differ in length")
        if self.total != sum(self.components, Fraction(0)):
            raise ValueError("total must equal the sum of components")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def is_constant(self) -> bool:
        return not any(self.levels)

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "components": [format_fraction(c) for c in self.components],
            "total": format_fraction(self.total),
            "total_decimal": float(self.total),
            "multiplicity": self.multiplicity,
        }


def harmonic_dimension(m: int, k: int) -> int:
    """Dimension of degree-``k`` spherical harmonics on ``S^m``.

    ``C(k+m, m) - C(k+m-2, m)`` for ``m >= 2`` (second term absent for k < 2);
    the circle has 1 constant and 2 modes ``cos, sin(k t)`` per level.
    """
    if k < 0:
        raise ValueError("level must be non-negative")
    if m == 1:
        return 1 if k == 0 else 2
    if k < 2:
        return comb(k + m, m)
    return comb(k + m, m) - comb(k + m - 2, m)


def factor_eigenvalue(f: SphereFactor, k: int) -> Fraction:
    if k < 0:
        raise ValueError("level must be non-negative")
    if f.dim == 1:
        return Fraction(k * k) / f.radius_sq
    return Fraction(k * (k + f.dim - 1)) / f.radius_sq


def factor_mode(f: SphereFactor, k: int) -> FactorMode:
    return FactorMode(level=k, eigenvalue=factor_eigenvalue(f, k), multiplicity=harmonic_dimension(f.dim, k))


def _levels_up_to(f: SphereFactor, cutoff: Fraction) -> list[FactorMode]:
    modes = []
    k = 0
    while True:
        mode = factor_mode(f, k)
        if mode.eigenvalue > cutoff:
            return modes
        modes.append(mode)
        k += 1


def joint_mode(m: ProductManifold, levels: tuple[int, ...]) -> JointEigenvalue:
    if len(levels) != len(m.factors):
        raise ValueError(f"expected {len(m.factors)} levels, got {len(levels)}")
    modes = [factor_mode(f, k) for f, k in zip(m.factors, levels)]
    comps = tuple(md.eigenvalue for md in modes)
    mult = 1
    for md in modes:
        mult *= md.multiplicity
    return JointEigenvalue(tuple(levels), comps, sum(comps, Fraction(0)), mult)


def enumerate_joint(m: ProductManifold, cutoff: Rational) -> Iterator[JointEigenvalue]:
    """Yield every joint mode with total eigenvalue ``<= cutoff``.

    Level vectors are generated lexicographically, filtered by total, then
    stably sorted by total, so the order is deterministic and ties keep
    lexicographic level order.
    """
    cutoff = as_fraction(cutoff)
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    per_factor = [_levels_up_to(f, cutoff) for f in m.factors]
    found = []
    for combo in itertools.product(*per_factor):
        comps = tuple(md.eigenvalue for md in combo)
        total = sum(comps, Fraction(0))
        if total > cutoff:
            continue
        mult = 1
        for md in combo:
            mult *= md.multiplicity
        found.append(JointEigenvalue(tuple(md.level for md in combo), comps, total, mult))
    found.sort(key=lambda mode: mode.total)
    yield from found


def first_nonzero_eigenvalue(m: ProductManifold) -> Fraction:
    """``lambda_1`` of the product: the smallest first eigenvalue among factors."""
    return min(factor_eigenvalue(f, 1) for f in m.factors)


def eigenspace_dimensions(m: ProductManifold, cutoff: Rational) -> dict[Fraction, int]:
    """Total multiplicity per distinct eigenvalue up to ``cutoff``."""
    dims: dict[Fraction, int] = {}
    for mode in enumerate_joint(m, cutoff):
        dims[mode.total] = dims.get(mode.total, 0) + mode.multiplicity
    return dims
