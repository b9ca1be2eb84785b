from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import manifolds
from nuspec.bounds import (
    HYPOTHESIS_NOT_MET,
    SATISFIED,
    VIOLATED,
    NegativeDiscriminant,
    bound_suite,
    eigenmode_upper_bound,
    k_in_small_nu_range,
    k_in_superharmonic_range,
    lichnerowicz_lower,
    nonneg_ricci_upper_bound,
    superharmonic_upper_bound,
    superharmonic_witness,
    threshold_check,
    threshold_holds,
)
from nuspec.manifold import geometry, parse_manifold, product, round_sphere
from nuspec.spectrum import first_nonzero_eigenvalue
from nuspec.variational import nu


def exact_bound(n, s, k, nu_value=0):
    n, s, k, v = (sympy.Rational(str(x)) for x in (n, s, k, nu_value))
    disc = k**2 - 4 * k * s + 4 * s**2 / n + 4 * (n - 1) * v
    return float(((2 * s - k + sympy.sqrt(disc)) / (2 * (n - 1))).evalf(40))


@pytest.mark.parametrize("n", range(2, 11))
def test_sharp_on_round_spheres(n):
    bound = superharmonic_upper_bound(n, n * (n - 1), n - 1)
    assert abs(bound - n) <= 1e-12 * n
    assert first_nonzero_eigenvalue(round_sphere(n)) == n


def test_hand_value_s2_s3():
    assert superharmonic_upper_bound(5, 8, 1) == pytest.approx(exact_bound(5, 8, 1), rel=1e-14)
    assert superharmonic_upper_bound(5, 8, 1) == pytest.approx((15 + math.sqrt(1 - 32 + 256 / 5)) / 8, rel=1e-14)


@pytest.mark.parametrize("n", range(2, 9))
def test_borderline_k_root_vanishes(n):
    s = 7.0
    k = 2 * s * (1 - math.sqrt(1 - 1 / n))
    # with the root gone the formula reduces to (2s - k)/(2(n-1)) = s/sqrt(n(n-1))
    assert superharmonic_upper_bound(n, s, k) == pytest.approx(s / math.sqrt(n * (n - 1)), rel=1e-12)


def test_negative_discriminant():
    with pytest.raises(NegativeDiscriminant):
        superharmonic_upper_bound(4, 4, 3)


def test_nonneg_ricci_bound():
    assert nonneg_ricci_upper_bound(5, 8) == pytest.approx(2 * (1 + 1 / math.sqrt(5)), rel=1e-15)
    assert nonneg_ricci_upper_bound(5, 8) == pytest.approx(superharmonic_upper_bound(5, 8, 1e-9), abs=1e-6)
    for n in range(2, 9):
        assert nonneg_ricci_upper_bound(n, n * (n - 1)) >= n


def test_eigenmode_bound():
    assert eigenmode_upper_bound(4, 4, 1, 2) == pytest.approx(exact_bound(4, 4, 1, 2), rel=1e-14)
    assert eigenmode_upper_bound(4, 4, 1, 2) >= 2
    # k = 0 form
    n, s, v = 6, 9.0, 1.5
    assert eigenmode_upper_bound(n, s, 0, v) == pytest.approx((s + math.sqrt(s * s / n + (n - 1) * v)) / (n - 1), rel=1e-14)
    with pytest.raises(ValueError):
        eigenmode_upper_bound(4, 4, 1, -1)


@given(st.integers(2, 10), st.floats(0.5, 50), st.floats(0, 1))
def test_eigenmode_reduces_at_zero_nu(n, s, frac):
    k = frac * 2 * s * (1 - math.sqrt(1 - 1 / n))
    assert eigenmode_upper_bound(n, s, k, 0) == pytest.approx(superharmonic_upper_bound(n, s, k), rel=1e-12)


@given(st.integers(2, 10), st.floats(0.5, 50))
def test_superharmonic_bound_decreasing_in_k(n, s):
    top = 2 * s * (1 - math.sqrt(1 - 1 / n))
    values = [superharmonic_upper_bound(n, s, k) for k in np.linspace(0, top, 25)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_lichnerowicz():
    for n in range(2, 8):
        assert lichnerowicz_lower(n, n - 1) == n
    assert lichnerowicz_lower(5, 0) == 0
    assert lichnerowicz_lower(5, 1) == Fraction(5, 4) <= first_nonzero_eigenvalue(parse_manifold("S2xS3"))
    with pytest.raises(ValueError):
        lichnerowicz_lower(3, -1)


def test_exact_predicates():
    n, s = 4, Fraction(4)
    top = 2 * (1 - math.sqrt(1 - 1 / n)) * 4
    assert k_in_superharmonic_range(n, s, Fraction(1))
    assert not k_in_superharmonic_range(n, s, Fraction(0))
    assert not k_in_superharmonic_range(n, s, Fraction(top).limit_denominator(10**6) + Fraction(1, 10**5))
    assert k_in_small_nu_range(n, s, Fraction(0), Fraction(1))
    assert threshold_holds(4, Fraction(2), Fraction(2), Fraction(2))
    assert not threshold_holds(5, Fraction(8), Fraction(14), Fraction(2))


def test_threshold_reports():
    g = geometry(parse_manifold("S2xS3"))
    rep = threshold_check(g, Fraction(2), Fraction(0))
    assert rep.verdict == HYPOTHESIS_NOT_MET and "2s + |r|" in rep.reason
    torus = parse_manifold("S1xS1")
    rep = threshold_check(geometry(torus), first_nonzero_eigenvalue(torus), nu(torus).value)
    assert rep.hypothesis_ok and rep.verdict == SATISFIED
    m = parse_manifold("S2xS1(1/9)xS1(1/9)")
    rep = threshold_check(geometry(m), first_nonzero_eigenvalue(m), nu(m).value)
    assert rep.hypothesis_ok and rep.verdict == SATISFIED
    # an impossible nu is caught exactly
    assert threshold_check(geometry(m), first_nonzero_eigenvalue(m), Fraction(0)).verdict == VIOLATED


def test_witnesses():
    w = superharmonic_witness(round_sphere(3))
    assert w.mode.levels == (1,) and w.laplace_eigenvalue == 3
    assert superharmonic_witness(parse_manifold("S2xS3")).laplace_eigenvalue == 2
    assert superharmonic_witness(product([2, 2])) is None
    assert superharmonic_witness(parse_manifold("S1xS1")) is None


def _by_name(reports):
    return {r.bound_name: r for r in reports}


def test_suite_round_sphere():
    reps = _by_name(bound_suite(round_sphere(3)))
    assert reps["superharmonic_ricci_k"].verdict == SATISFIED
    assert reps["superharmonic_ricci_k"].slack == pytest.approx(0, abs=1e-12)
    assert reps["lichnerowicz"].verdict == SATISFIED and reps["lichnerowicz"].slack == 0
    assert reps["eigenmode_nu_large"].verdict == HYPOTHESIS_NOT_MET
    assert "Einstein" in reps["eigenmode_nu_large"].reason


def test_suite_equal_pair():
    reps = _by_name(bound_suite(product([2, 2])))
    assert reps["superharmonic_ricci_k"].verdict == HYPOTHESIS_NOT_MET
    assert "witness" in reps["superharmonic_ricci_k"].reason
    assert reps["eigenmode_ricci_positive"].verdict == SATISFIED


def test_suite_k_override():
    reps = _by_name(bound_suite(parse_manifold("S2xS3"), k=2))
    assert "r >= 2/1 fails" in reps["superharmonic_ricci_k"].reason
    assert reps["lichnerowicz"].verdict == HYPOTHESIS_NOT_MET


def test_suite_order_and_serialization():
    names = [r.bound_name for r in bound_suite(parse_manifold("S2xS3"))]
    assert names == [
        "superharmonic_ricci_k",
        "superharmonic_ricci_nonneg",
        "eigenmode_nu_large",
        "eigenmode_nu_small",
        "eigenmode_ricci_positive",
        "lichnerowicz",
        "nu_threshold",
    ]
    d = bound_suite(parse_manifold("S2xS3"))[0].to_dict()
    assert set(d) >= {"bound", "hypothesis_ok", "reason", "bound_value", "observed", "verdict", "slack"}


@settings(max_examples=60, deadline=None)
@given(manifolds())
def test_no_violations(m):
    for rep in bound_suite(m):
        assert rep.verdict != VIOLATED, (m.label(), rep)
        if rep.verdict == HYPOTHESIS_NOT_MET:
            assert rep.reason


@pytest.mark.parametrize("tail", ["S2", "S3"])
def test_radius_sweep_no_violations(tail):
    for j in range(3, 53):
        m = parse_manifold(f"S2({j}/12)x{tail}")
        assert all(r.verdict != VIOLATED for r in bound_suite(m)), m.label()


def test_constant_minimizer_is_not_an_eigenmode_witness():
    # nu = |r|^2 = 2 is attained only by constants; lambda_1 = 2 exceeds the formula value ~1.55
    reports = {r.bound_name: r for r in bound_suite(parse_manifold("S2xS1(1/9)xS1(1/9)"))}
    for name in ("eigenmode_nu_large", "eigenmode_nu_small", "eigenmode_ricci_positive"):
        assert not reports[name].hypothesis_ok
        assert reports[name].verdict == HYPOTHESIS_NOT_MET
    assert reports["eigenmode_nu_large"].bound_value < 2
