"""Exact spectral invariants of the scalar-curvature stability operator on
products of round spheres, with closed-form bound checks and an independent
finite-difference oracle."""

__version__ = "0.1.0"
