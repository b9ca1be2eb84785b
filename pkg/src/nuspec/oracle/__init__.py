"""Independent finite-difference and quadrature oracle for dimension <= 4."""

from .checks import (
    convergence_order,
    identity_checks,
    oracle_apply_A,
    pointwise_check,
    verify_bochner,
    verify_lstar_identity,
)
from .fd import fd_gradient, fd_hessian, fd_laplacian, fd_partial_laplacian, geodesic
from .harmonics import HarmonicPolynomial, SeparatedEigenfunction, harmonic_basis
from .quadrature import product_rule, quadrature_integral, sphere_rule, volume

__all__ = [
    "HarmonicPolynomial",
    "SeparatedEigenfunction",
    "convergence_order",
    "identity_checks",
    "fd_gradient",
    "fd_hessian",
    "fd_laplacian",
    "fd_partial_laplacian",
    "geodesic",
    "harmonic_basis",
    "oracle_apply_A",
    "pointwise_check",
    "product_rule",
    "quadrature_integral",
    "sphere_rule",
    "verify_bochner",
    "verify_lstar_identity",
    "volume",
]
