from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from nuspec.manifold import ProductManifold, SphereFactor

radius_sq = st.builds(Fraction, st.integers(1, 12), st.integers(1, 6))


@st.composite
def manifolds(draw, max_factors: int = 3, max_dim: int = 4) -> ProductManifold:
    factors = draw(
        st.lists(st.builds(SphereFactor, st.integers(1, max_dim), radius_sq), min_size=1, max_size=max_factors)
    )
    if sum(f.dim for f in factors) < 2:
        factors.append(SphereFactor(2, Fraction(1)))
    return ProductManifold(tuple(factors))
