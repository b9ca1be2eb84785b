from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import manifolds
from nuspec.manifold import SphereFactor, parse_manifold, product, round_sphere
from nuspec.spectrum import (
    eigenspace_dimensions,
    enumerate_joint,
    factor_mode,
    first_nonzero_eigenvalue,
    harmonic_dimension,
    joint_mode,
)


def brute_force_harmonic_dimension(m: int, k: int) -> int:
    """Kernel dimension of the ambient Laplacian on degree-k polynomials in m+1 variables."""
    xs = sympy.symbols(f"x0:{m + 1}")
    monos = sorted(sympy.itermonomials(xs, k, k), key=sympy.default_sort_key)
    lower = sorted(sympy.itermonomials(xs, k - 2, k - 2), key=sympy.default_sort_key) if k >= 2 else []
    if not lower:
        return len(monos)
    index = {mono: i for i, mono in enumerate(lower)}
    mat = sympy.zeros(len(lower), len(monos))
    for j, mono in enumerate(monos):
        lap = sum(sympy.diff(mono, x, 2) for x in xs)
        for term in sympy.Add.make_args(sympy.expand(lap)):
            if term == 0:
                continue
            coeff, rest = term.as_coeff_Mul()
            mat[index[rest], j] += coeff
    return len(monos) - mat.rank()


@pytest.mark.parametrize("m,k", [(m, k) for m in range(2, 5) for k in range(0, 7)])
def test_multiplicity_matches_brute_force(m, k):
    assert harmonic_dimension(m, k) == brute_force_harmonic_dimension(m, k)


@pytest.mark.parametrize("k", range(6))
def test_s2_multiplicity(k):
    assert factor_mode(SphereFactor(2), k).multiplicity == 2 * k + 1


def test_factor_examples():
    assert factor_mode(SphereFactor(2), 1).eigenvalue == 2
    assert factor_mode(SphereFactor(3), 1).eigenvalue == 3
    for m in range(1, 6):
        mode = factor_mode(SphereFactor(m), 0)
        assert (mode.eigenvalue, mode.multiplicity) == (0, 1)


def test_circle_spectrum():
    f = SphereFactor(1, Fraction(1, 4))
    assert [factor_mode(f, k).eigenvalue for k in range(4)] == [0, 4, 16, 36]
    assert [factor_mode(f, k).multiplicity for k in range(4)] == [1, 2, 2, 2]


@given(st.integers(1, 6), st.integers(0, 8))
def test_factor_eigenvalues_increase(m, k):
    f = SphereFactor(m, Fraction(3, 2))
    assert factor_mode(f, k + 1).eigenvalue > factor_mode(f, k).eigenvalue
    assert (factor_mode(f, k).eigenvalue == 0) == (k == 0)


def test_s2_s3_cutoff_two():
    modes = list(enumerate_joint(parse_manifold("S2xS3"), 2))
    assert [(m.levels, m.components, m.total, m.multiplicity) for m in modes] == [
        ((0, 0), (0, 0), 0, 1),
        ((1, 0), (2, 0), 2, 3),
    ]


@given(manifolds())
def test_cutoff_zero_is_constant(m):
    modes = list(enumerate_joint(m, 0))
    assert len(modes) == 1 and modes[0].is_constant and modes[0].multiplicity == 1


@pytest.mark.parametrize("m", range(2, 6))
def test_equal_pair_first_modes(m):
    modes = {mode.components: mode for mode in enumerate_joint(product([m, m]), m)}
    assert modes[(m, 0)].multiplicity == m + 1
    assert modes[(0, m)].multiplicity == m + 1


@settings(max_examples=40)
@given(manifolds(), st.integers(0, 12))
def test_enumeration_sorted_unique_complete(m, cutoff):
    modes = list(enumerate_joint(m, cutoff))
    totals = [mode.total for mode in modes]
    assert totals == sorted(totals)
    assert len({mode.levels for mode in modes}) == len(modes)
    for mode in modes:
        assert mode.total == sum(mode.components) <= cutoff
        assert mode == joint_mode(m, mode.levels)
    # every level vector with total <= cutoff is present
    ranges = []
    for f in m.factors:
        k = 0
        while factor_mode(f, k).eigenvalue <= cutoff:
            k += 1
        ranges.append(range(k))
    expected = {lv for lv in itertools.product(*ranges) if joint_mode(m, lv).total <= cutoff}
    assert {mode.levels for mode in modes} == expected


def _convolve(m, cutoff):
    """Eigenspace dimensions by convolving per-factor (eigenvalue, multiplicity) sequences."""
    table = Counter({Fraction(0): 1})
    for f in m.factors:
        seq = []
        k = 0
        while factor_mode(f, k).eigenvalue <= cutoff:
            seq.append(factor_mode(f, k))
            k += 1
        nxt = Counter()
        for lam, mult in table.items():
            for mode in seq:
                if lam + mode.eigenvalue <= cutoff:
                    nxt[lam + mode.eigenvalue] += mult * mode.multiplicity
        table = nxt
    return dict(table)


@pytest.mark.parametrize("label", ["S2xS2", "S2xS3", "S1xS2(1/2)", "S2xS1(1/9)xS1(1/9)", "S3(2)xS4", "S1xS1"])
def test_eigenspace_dimensions_match_convolution(label):
    m = parse_manifold(label)
    assert eigenspace_dimensions(m, 20) == _convolve(m, 20)


def test_first_nonzero_eigenvalue():
    assert first_nonzero_eigenvalue(parse_manifold("S2xS3")) == 2
    assert first_nonzero_eigenvalue(round_sphere(4)) == 4
    assert first_nonzero_eigenvalue(parse_manifold("S2(4)xS2")) == Fraction(1, 2)
    assert first_nonzero_eigenvalue(parse_manifold("S1(1/9)xS2")) == 2


def test_errors():
    with pytest.raises(ValueError):
        list(enumerate_joint(round_sphere(2), -1))
    with pytest.raises(ValueError):
        joint_mode(round_sphere(2), (1, 0))
    with pytest.raises(ValueError):
        factor_mode(SphereFactor(2), -1)
