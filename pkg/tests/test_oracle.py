from __future__ import annotations

import math

import numpy as np
import pytest

from nuspec.manifold import SphereFactor, geometry, parse_manifold, product, round_sphere
from nuspec.operators import A, symbol
from nuspec.oracle import (
    SeparatedEigenfunction,
    convergence_order,
    fd_gradient,
    fd_hessian,
    fd_laplacian,
    fd_partial_laplacian,
    geodesic,
    harmonic_basis,
    identity_checks,
    oracle_apply_A,
    pointwise_check,
    quadrature_integral,
    verify_bochner,
    verify_lstar_identity,
    volume,
)
from nuspec.oracle.checks import sample_points
from nuspec.oracle.fd import check_frame, product_frame, random_points, random_rotation, rotate_frame
from nuspec.oracle.harmonics import harmonic_polynomial
from nuspec.oracle.quadrature import product_rule
from nuspec.spectrum import harmonic_dimension, joint_mode

S2 = round_sphere(2)
S2S2 = product([2, 2])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# geodesics -------------------------------------------------------------------


def test_geodesic_start_and_closure():
    f = SphereFactor(2)
    p = np.array([[1.0, 0.0, 0.0]])
    v = np.array([[0.0, 1.0, 0.0]])
    assert np.allclose(geodesic(f, p, v, 0.0), p)
    assert np.allclose(geodesic(f, p, v, 2 * np.pi), p, atol=1e-14)


def test_geodesic_quarter_turn_to_pole():
    f = SphereFactor(2)
    equator = np.array([[1.0, 0.0, 0.0]])
    polar = np.array([[0.0, 0.0, 1.0]])
    assert np.allclose(geodesic(f, equator, polar, np.pi / 2), [[0.0, 0.0, 1.0]], atol=1e-15)


def test_geodesic_stays_on_scaled_sphere(rng):
    f = SphereFactor(3, 4)
    m = parse_manifold("S3(4)xS1")
    p = random_points(m, 50, rng)[0]
    v = product_frame(m, random_points(m, 50, rng))[0][0]
    v = v - np.sum(v * p, axis=1, keepdims=True) * p / 4
    for t in (0.1, 1.0, 7.3):
        q = geodesic(f, p, v, t)
        assert np.allclose(np.linalg.norm(q, axis=1), 2.0, atol=1e-14)


def test_geodesic_rejects_non_tangent():
    with pytest.raises(ValueError):
        geodesic(SphereFactor(2), np.array([[1.0, 0, 0]]), np.array([[1.0, 1.0, 0]]), 0.1)


# harmonic polynomials --------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("k", range(0, 4))
def test_harmonic_basis_dimension(m, k):
    assert harmonic_basis(m + 1, k).shape[0] == harmonic_dimension(m, k)


@pytest.mark.parametrize("nvars,k", [(3, 2), (3, 3), (4, 2), (4, 3), (2, 3)])
def test_basis_polynomials_are_harmonic(nvars, k):
    basis = harmonic_basis(nvars, k)
    for i in range(basis.shape[0]):
        weights = np.zeros(basis.shape[0])
        weights[i] = 1
        assert harmonic_polynomial(nvars, k, weights).is_harmonic()


def test_non_harmonic_detected():
    from nuspec.oracle.harmonics import HarmonicPolynomial, monomials

    exps = monomials(3, 2)
    coeffs = np.array([1.0 if tuple(e) == (2, 0, 0) else 0.0 for e in exps])
    assert not HarmonicPolynomial(exps, coeffs, 2).is_harmonic()


# finite differences ----------------------------------------------------------


def test_coordinate_function_on_s2(rng):
    pts = random_points(S2, 30, rng)
    x = lambda p: p[0][:, 0]
    assert np.allclose(fd_laplacian(x, S2, pts), -2 * x(pts), atol=1e-8)


def test_level_one_on_s3(rng):
    s3 = round_sphere(3)
    phi = SeparatedEigenfunction.from_levels(s3, (1,), rng)
    pts = random_points(s3, 30, rng)
    assert np.allclose(fd_laplacian(phi, s3, pts), -3 * phi(pts), atol=1e-8)


def test_partial_laplacians(rng):
    phi = SeparatedEigenfunction.from_levels(S2S2, (2, 1), rng)
    pts = random_points(S2S2, 20, rng)
    assert np.allclose(fd_partial_laplacian(phi, S2S2, pts, 0), -6 * phi(pts), atol=1e-7)
    assert np.allclose(fd_partial_laplacian(phi, S2S2, pts, 1), -2 * phi(pts), atol=1e-7)
    with pytest.raises(ValueError):
        fd_partial_laplacian(phi, S2S2, pts, 2)


def test_hessian_and_gradient_against_exact(rng):
    m = parse_manifold("S2(1/2)xS1(3)")
    phi = SeparatedEigenfunction.from_levels(m, (2, 3), rng)
    pts = random_points(m, 15, rng)
    frame = product_frame(m, pts)
    hess = fd_hessian(phi, m, pts)
    for a in range(m.dim):
        for b in range(m.dim):
            assert np.allclose(hess[:, a, b], phi.exact_hessian(pts, frame[a], frame[b]), atol=1e-7)
    grad = fd_gradient(phi, m, pts)
    for a in range(m.dim):
        assert np.allclose(grad[:, a], phi.exact_directional(pts, frame[a]), atol=1e-9)


def test_frame_independence(rng):
    eps = 1e-3
    phi = SeparatedEigenfunction.from_levels(S2S2, (2, 2), rng)
    pts = random_points(S2S2, 5, rng)
    base = fd_laplacian(phi, S2S2, pts, eps)
    frame = product_frame(S2S2, pts)
    for _ in range(10):
        rotated = rotate_frame(frame, random_rotation(4, rng))
        assert np.max(np.abs(fd_laplacian(phi, S2S2, pts, eps, frame=rotated) - base)) <= 10 * eps**2


def test_degenerate_frame_rejected(rng):
    pts = random_points(S2S2, 3, rng)
    frame = product_frame(S2S2, pts)
    with pytest.raises(ValueError):
        check_frame(S2S2, pts, [frame[0], frame[0], frame[2], frame[3]])
    with pytest.raises(ValueError):
        fd_laplacian(lambda p: p[0][:, 0], S2S2, pts, frame=frame[:3])


@pytest.mark.parametrize("eps", [0.0, -1e-3, 1.0])
def test_epsilon_range(eps, rng):
    pts = random_points(S2, 2, rng)
    with pytest.raises(ValueError):
        fd_laplacian(lambda p: p[0][:, 0], S2, pts, eps)


@pytest.mark.parametrize("op", ["laplacian", "partial_laplacian", "hessian"])
@pytest.mark.parametrize("label,levels", [("S2xS2", (2, 1)), ("S3", (2,)), ("S2xS1(1/4)", (1, 2))])
def test_second_order_convergence(op, label, levels, rng):
    rep = convergence_order(parse_manifold(label), levels, rng, op)
    assert abs(rep.slope - 2.0) <= 0.3


def test_richardson_raises_order(rng):
    phi = SeparatedEigenfunction.from_levels(S2S2, (2, 1), rng)
    pts = sample_points(phi, 10, rng)
    exact = -8 * phi(pts)
    eps = np.array([4e-2, 2e-2, 1e-2])
    errs = [np.max(np.abs(fd_laplacian(phi, S2S2, pts, e) - exact)) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert slope > 3.5


# quadrature ------------------------------------------------------------------


def test_volumes():
    assert quadrature_integral(lambda p: np.ones(len(p[0])), S2) == pytest.approx(4 * math.pi, rel=1e-12)
    for label in ("S3", "S4", "S2(1/4)xS2", "S1(9)xS3", "S2xS1xS1"):
        m = parse_manifold(label)
        assert quadrature_integral(lambda p: np.ones(len(p[0])), m) == pytest.approx(volume(m), rel=1e-12)


def test_coordinate_moments():
    assert quadrature_integral(lambda p: p[0][:, 0] ** 2, S2) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    # int_{S^3} x^4 = 2 pi^2 * 3/(4*6)
    assert quadrature_integral(lambda p: p[0][:, 2] ** 4, round_sphere(3)) == pytest.approx(math.pi**2 / 4, rel=1e-12)


def test_polynomial_exactness_up_to_rule_degree(rng):
    # a random polynomial of degree 10 integrates identically under two different exact rules
    m = parse_manifold("S2xS1(2)")
    phi = SeparatedEigenfunction.from_levels(m, (5, 5), rng)
    a = quadrature_integral(lambda p: phi(p) ** 2, m, 6, 12)
    b = quadrature_integral(lambda p: phi(p) ** 2, m, 9, 20)
    assert a == pytest.approx(b, rel=1e-12)


def test_harmonic_normalization(rng):
    # a level-1 harmonic u.x on S^m(rho) has int (u.x)^2 = |u|^2 rho^2 vol/(m+1)
    for label in ("S2", "S3(2)", "S2(1/4)"):
        m = parse_manifold(label)
        phi = SeparatedEigenfunction.from_levels(m, (1,), rng)
        f = m.factors[0]
        norm_sq = float(np.sum(phi.polys[0].coeffs ** 2))
        expected = norm_sq * float(f.radius_sq) * volume(m) / (f.dim + 1)
        assert quadrature_integral(lambda p: phi(p) ** 2, m) == pytest.approx(expected, rel=1e-10)


def test_dimension_cap():
    with pytest.raises(ValueError):
        product_rule(parse_manifold("S2xS3"))


# checks ------------------------------------------------------------------------


def test_oracle_apply_on_kernel_mode(rng):
    m = parse_manifold("S2xS3")
    phi = SeparatedEigenfunction.from_levels(m, (1, 0), rng)
    pts = random_points(m, 50, rng)
    assert np.max(np.abs(oracle_apply_A(geometry(m), phi, pts))) <= 1e-6


def test_oracle_apply_theorem_value(rng):
    rep = pointwise_check(S2S2, (1, 0), rng)
    assert rep.symbol == 2 and rep.passed and rep.max_abs_error < 1e-6


def test_oracle_constant(rng):
    phi = SeparatedEigenfunction.from_levels(S2S2, (0, 0), rng)
    pts = random_points(S2S2, 5, rng)
    assert np.allclose(oracle_apply_A(geometry(S2S2), phi, pts), 4 * phi(pts), atol=1e-9)


def test_oracle_detects_wrong_symbol(rng, monkeypatch):
    from nuspec.operators import inject_ricci_sign_fault

    with inject_ricci_sign_fault():
        rep = pointwise_check(S2S2, (2, 1), rng)
    assert not rep.passed


@pytest.mark.parametrize(
    "label,levels,expected_ratio",
    [("S2xS2", (1, 0), 2), ("S3", (1,), 0), ("S2", (1,), 0), ("S2xS2", (0, 0), 4)],
)
def test_integral_identities(label, levels, expected_ratio, rng):
    m = parse_manifold(label)
    lstar, boch = identity_checks(m, levels, rng)
    assert lstar.passed and boch.passed
    phi_sq = lstar.breakdown["phi_sq"]
    assert lstar.expected == pytest.approx(expected_ratio * phi_sq, rel=1e-12, abs=1e-12)
    # FD error in each Bochner term is ~1e-10 of its size, so scale by the terms, not the total
    scale = sum(abs(v["expected"]) for v in boch.breakdown.values() if isinstance(v, dict))
    for rep in (lstar, boch):
        assert rep.observed == pytest.approx(expected_ratio * phi_sq, abs=1e-8 * max(scale, phi_sq, 1))


def test_constant_mode_identity_is_ricci_norm_times_volume(rng):
    m = parse_manifold("S2(2)xS1xS1(1/3)")
    lstar = verify_lstar_identity(m, (0, 0, 0), rng)
    assert lstar.observed == pytest.approx(float(geometry(m).ricci_norm_sq) * volume(m), rel=1e-12)


def test_identity_breach_reports_breakdown(rng):
    rep = verify_bochner(S2S2, (2, 1), rng, tol=1e-16)
    assert not rep.passed
    assert set(rep.breakdown) >= {"n_laplacian_sq", "minus_2s_gradient_sq", "minus_hessian_sq", "ricci_sq_potential"}


def test_reports_serialize(rng):
    assert pointwise_check(S2S2, (1, 1), rng).to_dict()["check"] == "pointwise_A"
    assert verify_lstar_identity(S2S2, (1, 1), rng).to_dict()["check"] == "lstar_identity"
    assert convergence_order(S2S2, (1, 1), rng).to_dict()["operator"] == "laplacian"
    with pytest.raises(ValueError):
        convergence_order(S2S2, (1, 1), rng, "curl")


def test_symbol_consistency_with_spectrum(rng):
    phi = SeparatedEigenfunction.from_levels(S2S2, (2, 1), rng)
    assert phi.eigenvalue == joint_mode(S2S2, (2, 1)).total
    assert float(symbol(geometry(S2S2), A, joint_mode(S2S2, (2, 1)))) == 140.0
