"""Finite-difference and quadrature checks of the exact symbol formulas.

Nothing here reads the symbol through anything other than
:func:`nuspec.operators.symbol` (the quantity under test) and
:func:`nuspec.operators.bochner_identity_terms`; the oracle side is built
from ambient polynomials, geodesic second differences and quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..manifold import GeometryData, ProductManifold, geometry
from ..operators import A, bochner_identity_terms, symbol
from ..spectrum import joint_mode
from . import fd
from .harmonics import SeparatedEigenfunction
from .quadrature import DEFAULT_AZIMUTH, DEFAULT_POLAR, integrate, product_rule

POINTWISE_TOL = 1e-3
INTEGRAL_REL_TOL = 1e-4
SAMPLE_FLOOR = 0.2  # keep points with |phi| >= SAMPLE_FLOOR * max|phi|
CONVERGENCE_EPSILONS = (1e-2, 5e-3, 2.5e-3)


def _ricci_diagonal(m: ProductManifold, geom: GeometryData) -> np.ndarray:
    return np.array([float(c) for c, f in zip(geom.ricci_eigs, m.factors) for _ in range(f.dim)])


def oracle_apply_A(
    geom: GeometryData,
    phi: SeparatedEigenfunction,
    points: fd.Points,
    eps: float = fd.DEFAULT_EPSILON,
    richardson: bool = True,
) -> np.ndarray:
    """``(n-1) lam^2 phi + 2 s Delta phi - sum_i c_i Delta_i phi + |r|^2 phi``.

    Only the bilaplacian comes from the eigenvalue; ``Delta`` and the partial
    Laplacians are second differences along geodesics.
    """
    m = phi.manifold
    lam = float(phi.eigenvalue)
    values = phi(points)
    lap = fd.fd_laplacian(phi, m, points, eps, richardson=richardson)
    contraction = sum(
        float(c) * fd.fd_partial_laplacian(phi, m, points, i, eps, richardson=richardson)
        for i, c in enumerate(geom.ricci_eigs)
        if c != 0
    )
    return (
        (geom.n - 1) * lam * lam * values
        + 2 * float(geom.s) * lap
        - contraction
        + float(geom.ricci_norm_sq) * values
    )


def sample_points(
    phi: SeparatedEigenfunction, count: int, rng: np.random.Generator, floor: float = SAMPLE_FLOOR
) -> fd.Points:
    """``count`` random points where ``|phi|`` is not small, so ratios are stable."""
    m = phi.manifold
    pool = fd.random_points(m, max(50 * count, 2000), rng)
    values = np.abs(phi(pool))
    keep = np.flatnonzero(values >= floor * values.max())[:count]
    if len(keep) < count:
        raise RuntimeError(f"only {len(keep)} of {count} sample points cleared the |phi| floor")
    return tuple(p[keep] for p in pool)


@dataclass(frozen=True)
class PointwiseReport:
    manifold: str
    levels: tuple[int, ...]
    symbol: float
    max_abs_error: float
    points: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "check": "pointwise_A",
            "manifold": self.manifold,
            "levels": list(self.levels),
            "symbol": self.symbol,
            "max_abs_error": self.max_abs_error,
            "points": self.points,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def pointwise_check(
    m: ProductManifold,
    levels: Sequence[int],
    rng: np.random.Generator,
    points: int = 20,
    eps: float = fd.DEFAULT_EPSILON,
    tol: float = POINTWISE_TOL,
) -> PointwiseReport:
    """Compare ``oracle_apply_A / phi`` with the exact symbol at random points."""
    geom = geometry(m)
    phi = SeparatedEigenfunction.from_levels(m, levels, rng)
    pts = sample_points(phi, points, rng)
    ratio = oracle_apply_A(geom, phi, pts, eps) / phi(pts)
    exact = float(symbol(geom, A, joint_mode(m, tuple(levels))))
    return PointwiseReport(m.label(), tuple(levels), exact, float(np.max(np.abs(ratio - exact))), points, tol)


def _node_counts(levels: Sequence[int], n_polar: Optional[int], n_azimuth: Optional[int]) -> tuple[int, int]:
    # integrands are polynomials of degree <= 2k per factor
    k = max(levels) if levels else 0
    polar = n_polar if n_polar is not None else max(DEFAULT_POLAR, k + 2)
    azimuth = n_azimuth if n_azimuth is not None else max(DEFAULT_AZIMUTH, 2 * k + 2)
    return polar, azimuth


@dataclass(frozen=True)
class _Integrals:
    phi_sq: float
    gradient_sq: float
    laplacian_sq: float
    hessian_sq: float
    phi_hessian_ricci: float
    phi_laplacian: float
    lstar_sq: float


def _integrals(m: ProductManifold, phi: SeparatedEigenfunction, eps: float, n_polar: int, n_azimuth: int) -> _Integrals:
    geom = geometry(m)
    rule = product_rule(m, n_polar, n_azimuth)
    pts = rule.points
    values = phi(pts)
    hess = fd.fd_hessian(phi, m, pts, eps)
    grad = fd.fd_gradient(phi, m, pts, eps)
    ric = _ricci_diagonal(m, geom)
    trace = np.trace(hess, axis1=1, axis2=2)
    eye = np.eye(m.dim)
    # s'^* phi = Dd phi - (Delta phi) g - phi r
    lstar = hess - trace[:, None, None] * eye - values[:, None, None] * np.diag(ric)
    return _Integrals(
        phi_sq=integrate(values**2, rule),
        gradient_sq=integrate(np.sum(grad**2, axis=1), rule),
        laplacian_sq=integrate(trace**2, rule),
        hessian_sq=integrate(np.sum(hess**2, axis=(1, 2)), rule),
        phi_hessian_ricci=integrate(values * np.einsum("nii,i->n", hess, ric), rule),
        phi_laplacian=integrate(values * trace, rule),
        lstar_sq=integrate(np.sum(lstar**2, axis=(1, 2)), rule),
    )


def _relative(observed: float, expected: float, scale: float) -> float:
    denom = max(abs(expected), scale)
    return abs(observed - expected) / denom if denom > 0 else abs(observed - expected)


@dataclass(frozen=True)
class IdentityReport:
    check: str
    manifold: str
    levels: tuple[int, ...]
    observed: float
    expected: float
    rel_error: float
    tolerance: float
    breakdown: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "manifold": self.manifold,
            "levels": list(self.levels),
            "observed": self.observed,
            "expected": self.expected,
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "breakdown": self.breakdown,
        }


def _bochner_scale(geom: GeometryData, m: ProductManifold, levels: Sequence[int]) -> float:
    terms = bochner_identity_terms(geom, joint_mode(m, tuple(levels)))
    return sum(abs(float(t)) for t in terms.as_tuple())


def _lstar_report(m, levels, ints: _Integrals, nodes, tol) -> IdentityReport:
    geom = geometry(m)
    expected = float(symbol(geom, A, joint_mode(m, tuple(levels)))) * ints.phi_sq
    scale = _bochner_scale(geom, m, levels) * ints.phi_sq
    breakdown = {
        "phi_sq": ints.phi_sq,
        "hessian_sq": ints.hessian_sq,
        "laplacian_sq": ints.laplacian_sq,
        "phi_hessian_ricci": ints.phi_hessian_ricci,
        "phi_laplacian": ints.phi_laplacian,
        "nodes": list(nodes),
    }
    return IdentityReport(
        "lstar_identity", m.label(), tuple(levels), ints.lstar_sq, expected,
        _relative(ints.lstar_sq, expected, scale), tol, breakdown,
    )


def _prepare(m, levels, rng, eps, n_polar, n_azimuth):
    phi = SeparatedEigenfunction.from_levels(m, levels, rng)
    nodes = _node_counts(levels, n_polar, n_azimuth)
    return _integrals(m, phi, eps, *nodes), nodes


def verify_lstar_identity(
    m: ProductManifold,
    levels: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    eps: float = fd.DEFAULT_EPSILON,
    n_polar: Optional[int] = None,
    n_azimuth: Optional[int] = None,
    tol: float = INTEGRAL_REL_TOL,
) -> IdentityReport:
    """``int |s'^* phi|^2`` (FD Hessian + quadrature) against ``symbol(A) int phi^2``.

    When the symbol vanishes the error is taken relative to the size of the
    Bochner terms, which is the scale of the cancellation being tested.
    """
    ints, nodes = _prepare(m, levels, rng, eps, n_polar, n_azimuth)
    return _lstar_report(m, levels, ints, nodes, tol)


BOCHNER_NAMES = ("n_laplacian_sq", "minus_2s_gradient_sq", "minus_hessian_sq", "ricci_sq_potential")


def _bochner_report(m, levels, ints: _Integrals, nodes, tol) -> IdentityReport:
    geom = geometry(m)
    observed = (
        geom.n * ints.laplacian_sq,
        -2 * float(geom.s) * ints.gradient_sq,
        -ints.hessian_sq,
        float(geom.ricci_norm_sq) * ints.phi_sq,
    )
    analytic = bochner_identity_terms(geom, joint_mode(m, tuple(levels)))
    expected = tuple(float(t) * ints.phi_sq for t in analytic.as_tuple())
    scale = _bochner_scale(geom, m, levels) * ints.phi_sq
    errors = [_relative(o, e, scale) for o, e in zip(observed, expected)]
    total_obs, total_exp = sum(observed), sum(expected)
    errors.append(_relative(total_obs, total_exp, scale))
    breakdown = {
        name: {"observed": o, "expected": e, "rel_error": err}
        for name, o, e, err in zip(BOCHNER_NAMES, observed, expected, errors)
    }
    breakdown["symbol_times_phi_sq"] = float(symbol(geom, A, joint_mode(m, tuple(levels)))) * ints.phi_sq
    breakdown["nodes"] = list(nodes)
    return IdentityReport(
        "bochner", m.label(), tuple(levels), total_obs, total_exp, max(errors), tol, breakdown,
    )


def verify_bochner(
    m: ProductManifold,
    levels: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    eps: float = fd.DEFAULT_EPSILON,
    n_polar: Optional[int] = None,
    n_azimuth: Optional[int] = None,
    tol: float = INTEGRAL_REL_TOL,
) -> IdentityReport:
    """Each of the four Bochner integrals against its analytic value."""
    ints, nodes = _prepare(m, levels, rng, eps, n_polar, n_azimuth)
    return _bochner_report(m, levels, ints, nodes, tol)


def identity_checks(
    m: ProductManifold,
    levels: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    eps: float = fd.DEFAULT_EPSILON,
    n_polar: Optional[int] = None,
    n_azimuth: Optional[int] = None,
    tol: float = INTEGRAL_REL_TOL,
) -> tuple[IdentityReport, IdentityReport]:
    """Both integral checks from one set of quadrature integrals."""
    ints, nodes = _prepare(m, levels, rng, eps, n_polar, n_azimuth)
    return _lstar_report(m, levels, ints, nodes, tol), _bochner_report(m, levels, ints, nodes, tol)


@dataclass(frozen=True)
class ConvergenceReport:
    operator: str
    epsilons: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "epsilons": list(self.epsilons),
            "errors": list(self.errors),
            "slope": self.slope,
        }


def convergence_order(
    m: ProductManifold,
    levels: Sequence[int],
    rng: np.random.Generator,
    operator: str = "laplacian",
    epsilons: Sequence[float] = CONVERGENCE_EPSILONS,
    points: int = 20,
) -> ConvergenceReport:
    """Slope of log max-error against log eps for the plain (unextrapolated) stencil."""
    phi = SeparatedEigenfunction.from_levels(m, levels, rng)
    pts = sample_points(phi, points, rng)
    values = phi(pts)
    frame = fd.product_frame(m, pts)
    if operator == "laplacian":
        exact = -float(phi.eigenvalue) * values
        run = lambda e: fd.fd_laplacian(phi, m, pts, e, richardson=False)
    elif operator == "partial_laplacian":
        exact = -float(phi.factor_eigenvalues()[0]) * values
        run = lambda e: fd.fd_partial_laplacian(phi, m, pts, 0, e, richardson=False)
    elif operator == "hessian":
        n = m.dim
        exact = np.stack(
            [np.stack([phi.exact_hessian(pts, frame[a], frame[b]) for b in range(n)], -1) for a in range(n)], -2
        )
        run = lambda e: fd.fd_hessian(phi, m, pts, e, frame=frame, richardson=False)
    else:
        raise ValueError(f"unknown operator {operator!r}")
    errors = tuple(float(np.max(np.abs(run(e) - exact))) for e in epsilons)
    slope = float(np.polyfit(np.log(epsilons), np.log(errors), 1)[0])
    return ConvergenceReport(operator, tuple(epsilons), errors, slope)
