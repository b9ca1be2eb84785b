"""Products of round spheres and their constant curvature data.

A manifold is an ordered product of round spheres ``S^m(rho)``; circles are
the ``m = 1`` case.  Radii enter as ``rho**2`` so that every Laplace
eigenvalue ``k(k+m-1)/rho**2`` is an exact :class:`~fractions.Fraction`.

Inline descriptor grammar (whitespace ignored)::

    manifold := factor (("x" | "*" | "×") factor)*
    factor   := "S" dim ["(" rational ")"]      # radius_sq, default 1
    rational := int ["/" int]

so ``S2xS3``, ``S2(1/4) x S2`` and ``S1(4)xS1`` are all valid.  File
descriptors are JSON::

    {"factors": [{"dim": 2, "radius_sq": "1/4"}, {"dim": 3, "radius_sq": "1"}]}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

Rational = Union[int, str, Fraction]


def as_fraction(value: Rational) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"exact rational required, got {value!r}")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    """Render as ``"p/q"`` (denominator always present)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class SphereFactor:
    dim: int
    radius_sq: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if isinstance(self.dim, bool) or not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError(f"factor dimension must be an integer >= 1, got {self.dim!r}")
        object.__setattr__(self, "radius_sq", as_fraction(self.radius_sq))
        if self.radius_sq <= 0:
            raise ValueError(f"radius_sq must be positive, got {self.radius_sq}")

    @property
    def is_circle(self) -> bool:
        return self.dim == 1

    @property
    def ricci(self) -> Fraction:
        """Ricci eigenvalue ``(m-1)/rho^2`` of the factor."""
        return Fraction(self.dim - 1) / self.radius_sq

    def label(self) -> str:
        if self.radius_sq == 1:
            return f"S{self.dim}"
        return f"S{self.dim}({self.radius_sq})"


@dataclass(frozen=True)
class ProductManifold:
    factors: tuple[SphereFactor, ...]

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a product manifold needs at least one factor")
        if not all(isinstance(f, SphereFactor) for f in factors):
            raise TypeError("factors must be SphereFactor instances")
        object.__setattr__(self, "factors", factors)
        if self.dim < 2:
            raise ValueError(f"total dimension must be >= 2, got {self.dim}")

    @classmethod
    def of(cls, *specs: tuple[int, Rational] | int) -> "ProductManifold":
        """``ProductManifold.of(2, (3, "1/4"))`` builds ``S2 x S3(1/4)``."""
        factors = []
        for spec in specs:
            if isinstance(spec, tuple):
                factors.append(SphereFactor(spec[0], as_fraction(spec[1])))
            else:
                factors.append(SphereFactor(spec))
        return cls(tuple(factors))

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def label(self) -> str:
        return "x".join(f.label() for f in self.factors)

    def to_dict(self) -> dict:
        return {
            "factors": [
                {"dim": f.dim, "radius_sq": format_fraction(f.radius_sq)} for f in self.factors
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProductManifold":
        try:
            records = data["factors"]
        except (KeyError, TypeError) as exc:
            raise ValueError("manifold descriptor needs a 'factors' list") from exc
        if not isinstance(records, list):
            raise ValueError("'factors' must be a list")
        factors = []
        for rec in records:
            if not isinstance(rec, dict) or "dim" not in rec:
                raise ValueError(f"bad factor record {rec!r}")
            factors.append(SphereFactor(int(rec["dim"]), as_fraction(str(rec.get("radius_sq", "1")))))
        return cls(tuple(factors))


@dataclass(frozen=True)
class GeometryData:
    n: int
    s: Fraction
    ricci_eigs: tuple[Fraction, ...]
    ricci_norm_sq: Fraction
    ricci_lower: Fraction
    z_norm_sq: Fraction
    is_einstein: bool
    dims: tuple[int, ...]

    @property
    def is_ricci_flat(self) -> bool:
        return self.ricci_norm_sq == 0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "s": format_fraction(self.s),
            "ricci_eigs": [format_fraction(c) for c in self.ricci_eigs],
            "ricci_norm_sq": format_fraction(self.ricci_norm_sq),
            "ricci_lower": format_fraction(self.ricci_lower),
            "z_norm_sq": format_fraction(self.z_norm_sq),
            "is_einstein": self.is_einstein,
            "is_ricci_flat": self.is_ricci_flat,
            "decimal": {
                "s": float(self.s),
                "ricci_norm_sq": float(self.ricci_norm_sq),
                "z_norm_sq": float(self.z_norm_sq),
            },
        }


def geometry(m: ProductManifold) -> GeometryData:
    """Exact curvature constants of a product of round spheres.

    The Ricci tensor is ``c_i g_i`` on factor ``i`` with ``c_i = (m_i-1)/rho_i^2``,
    hence parallel, so ``|r|^2 = sum m_i c_i^2`` is also its maximum over M.
    """
    if not m.factors:
        raise ValueError("empty factor list")
    dims = tuple(f.dim for f in m.factors)
    eigs = tuple(f.ricci for f in m.factors)
    n = sum(dims)
    s = sum((d * c for d, c in zip(dims, eigs)), Fraction(0))
    norm_sq = sum((d * c * c for d, c in zip(dims, eigs)), Fraction(0))
    return GeometryData(
        n=n,
        s=s,
        ricci_eigs=eigs,
        ricci_norm_sq=norm_sq,
        ricci_lower=min(eigs),
        z_norm_sq=norm_sq - s * s / n,
        is_einstein=len(set(eigs)) == 1,
        dims=dims,
    )


def scale(m: ProductManifold, t_sq: Rational) -> ProductManifold:
    """Homothety ``g -> t^2 g``: every ``radius_sq`` is multiplied by ``t_sq``."""
    t_sq = as_fraction(t_sq)
    if t_sq <= 0:
        raise ValueError(f"scale factor must be positive, got {t_sq}")
    return ProductManifold(tuple(SphereFactor(f.dim, f.radius_sq * t_sq) for f in m.factors))


_FACTOR_RE = re.compile(r"S(\d+)(?:\(([^()]*)\))?$")


def parse_manifold(text: str) -> ProductManifold:
    """Parse the inline grammar described in the module docstring."""
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise ValueError("empty manifold descriptor")
    parts = re.split(r"[x*×]", compact)
    factors = []
    for part in parts:
        match = _FACTOR_RE.match(part)
        if match is None:
            raise ValueError(f"cannot parse factor {part!r} in {text!r}")
        dim = int(match.group(1))
        radius_sq = as_fraction(match.group(2)) if match.group(2) else Fraction(1)
        factors.append(SphereFactor(dim, radius_sq))
    return ProductManifold(tuple(factors))


def load_manifold(path: Union[str, Path]) -> ProductManifold:
    with open(path, encoding="utf-8") as fh:
        return ProductManifold.from_dict(json.load(fh))


def resolve_manifold(spec: Union[str, Path, ProductManifold]) -> ProductManifold:
    """Accept a ProductManifold, a descriptor file path, or inline text."""
    if isinstance(spec, ProductManifold):
        return spec
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        return load_manifold(path)
    return parse_manifold(str(spec))


def round_sphere(n: int, radius_sq: Rational = 1) -> ProductManifold:
    return ProductManifold((SphereFactor(n, as_fraction(radius_sq)),))


def product(dims: Iterable[int], radii_sq: Sequence[Rational] | None = None) -> ProductManifold:
    dims = list(dims)
    radii = [Fraction(1)] * len(dims) if radii_sq is None else [as_fraction(r) for r in radii_sq]
    if len(radii) != len(dims):
        raise ValueError("dims and radii_sq differ in length")
    return ProductManifold(tuple(SphereFactor(d, r) for d, r in zip(dims, radii)))
