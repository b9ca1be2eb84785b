"""Homogeneous harmonic polynomials and separated product eigenfunctions.

A degree-``k`` harmonic polynomial in ``m+1`` ambient variables restricts to
a Laplace eigenfunction on ``S^m(rho)`` with eigenvalue ``k(k+m-1)/rho^2``.
Bases are computed as the null space of the ambient Laplacian acting on the
monomial coefficients; nothing is tabulated by hand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from ..manifold import ProductManifold


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> np.ndarray:
    """Exponent vectors of all degree-``degree`` monomials, shape (M, nvars)."""
    if degree < 0:
        return np.zeros((0, nvars), dtype=int)
    rows = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for var in combo:
            exps[var] += 1
        rows.append(exps)
    out = np.array(rows, dtype=int).reshape(-1, nvars)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def laplacian_matrix(nvars: int, degree: int) -> np.ndarray:
    """Matrix of the ambient Laplacian from degree ``k`` to ``k-2`` coefficients."""
    src = monomials(nvars, degree)
    dst = monomials(nvars, degree - 2)
    index = {tuple(e): i for i, e in enumerate(dst)}
    mat = np.zeros((len(dst), len(src)))
    for col, exps in enumerate(src):
        for var in range(nvars):
            a = exps[var]
            if a >= 2:
                target = list(exps)
                target[var] -= 2
                mat[index[tuple(target)], col] += a * (a - 1)
    return mat


@lru_cache(maxsize=None)
def harmonic_basis(nvars: int, degree: int) -> np.ndarray:
    """Orthonormal (in coefficient space) basis of harmonic polynomials, shape (dim, M)."""
    count = len(monomials(nvars, degree))
    if degree < 2:
        basis = np.eye(count)
    else:
        basis = null_space(laplacian_matrix(nvars, degree)).T
    basis.setflags(write=False)
    return basis


def _reduce(exps: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    table: dict[tuple, float] = {}
    for e, c in zip(map(tuple, exps), coeffs):
        table[e] = table.get(e, 0.0) + float(c)
    keys = sorted(table)
    nvars = exps.shape[1]
    return np.array(keys, dtype=int).reshape(-1, nvars), np.array([table[k] for k in keys])


def _differentiate(exps: np.ndarray, coeffs: np.ndarray, var: int) -> tuple[np.ndarray, np.ndarray]:
    keep = exps[:, var] > 0
    new_exps = exps[keep].copy()
    new_coeffs = coeffs[keep] * new_exps[:, var]
    new_exps[:, var] -= 1
    return new_exps, new_coeffs


@dataclass(frozen=True)
class HarmonicPolynomial:
    exps: np.ndarray  # (M, nvars)
    coeffs: np.ndarray  # (M,)
    degree: int

    @property
    def nvars(self) -> int:
        return self.exps.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.exps.shape[0] == 0:
            return np.zeros(x.shape[0])
        powers = np.prod(x[:, None, :] ** self.exps[None, :, :], axis=2)
        return powers @ self.coeffs

    def derivative(self, var: int) -> "HarmonicPolynomial":
        exps, coeffs = _differentiate(self.exps, self.coeffs, var)
        return HarmonicPolynomial(exps, coeffs, max(self.degree - 1, 0))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.stack([self.derivative(j)(x) for j in range(self.nvars)], axis=-1)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.empty((x.shape[0], self.nvars, self.nvars))
        for i in range(self.nvars):
            di = self.derivative(i)
            for j in range(i, self.nvars):
                out[:, i, j] = out[:, j, i] = di.derivative(j)(x)
        return out

    def laplacian_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Ambient Laplacian as a reduced coefficient table (symbolic, no sampling)."""
        parts_e, parts_c = [], []
        for var in range(self.nvars):
            e, c = _differentiate(*_differentiate(self.exps, self.coeffs, var), var)
            parts_e.append(e)
            parts_c.append(c)
        exps = np.concatenate(parts_e) if parts_e else self.exps[:0]
        coeffs = np.concatenate(parts_c) if parts_c else self.coeffs[:0]
        if len(coeffs) == 0:
            return exps, coeffs
        return _reduce(exps, coeffs)

    def is_harmonic(self, tol: float = 1e-12) -> bool:
        _, coeffs = self.laplacian_table()
        scale = max(1.0, float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 1.0)
        return bool(np.all(np.abs(coeffs) <= tol * scale * max(1, self.degree) ** 2))


def harmonic_polynomial(nvars: int, degree: int, weights: Optional[np.ndarray] = None) -> HarmonicPolynomial:
    """A harmonic polynomial from the basis; ``weights`` mixes basis elements."""
    basis = harmonic_basis(nvars, degree)
    if weights is None:
        weights = np.zeros(basis.shape[0])
        weights[0] = 1.0
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (basis.shape[0],):
        raise ValueError(f"expected {basis.shape[0]} weights, got shape {weights.shape}")
    return HarmonicPolynomial(monomials(nvars, degree), weights @ basis, degree)


@dataclass(frozen=True)
class SeparatedEigenfunction:
    """``phi(x_1, ..., x_F) = prod_i P_i(x_i)`` with ``P_i`` harmonic on factor ``i``."""

    manifold: ProductManifold
    levels: tuple[int, ...]
    polys: tuple[HarmonicPolynomial, ...]

    @classmethod
    def from_levels(
        cls,
        manifold: ProductManifold,
        levels: Sequence[int],
        rng: Optional[np.random.Generator] = None,
    ) -> "SeparatedEigenfunction":
        """First basis element per factor, or a random unit mix when ``rng`` is given."""
        levels = tuple(int(k) for k in levels)
        if len(levels) != len(manifold.factors):
            raise ValueError("one level per factor required")
        polys = []
        for f, k in zip(manifold.factors, levels):
            dim = harmonic_basis(f.dim + 1, k).shape[0]
            weights = None
            if rng is not None and k > 0:
                weights = rng.standard_normal(dim)
                weights /= np.linalg.norm(weights)
            polys.append(harmonic_polynomial(f.dim + 1, k, weights))
        return cls(manifold, levels, tuple(polys))

    def factor_eigenvalues(self) -> tuple[Fraction, ...]:
        out = []
        for f, k in zip(self.manifold.factors, self.levels):
            if f.dim == 1:
                out.append(Fraction(k * k) / f.radius_sq)
            else:
                out.append(Fraction(k * (k + f.dim - 1)) / f.radius_sq)
        return tuple(out)

    @property
    def eigenvalue(self) -> Fraction:
        return sum(self.factor_eigenvalues(), Fraction(0))

    def factor_values(self, points) -> list[np.ndarray]:
        return [p(x) for p, x in zip(self.polys, points)]

    def __call__(self, points) -> np.ndarray:
        values = self.factor_values(points)
        out = values[0].copy()
        for v in values[1:]:
            out = out * v
        return out

    # Exact intrinsic derivatives, used to measure finite-difference error.

    def _tangent_gradients(self, points) -> list[np.ndarray]:
        grads = []
        for f, poly, x in zip(self.manifold.factors, self.polys, points):
            g = poly.gradient(x)
            radial = np.sum(g * x, axis=1, keepdims=True) / float(f.radius_sq)
            grads.append(g - radial * x)
        return grads

    def exact_directional(self, points, v) -> np.ndarray:
        """``dphi(v)`` for a product tangent vector ``v`` (tuple of per-factor arrays)."""
        values = self.factor_values(points)
        grads = self._tangent_gradients(points)
        total = np.zeros(values[0].shape[0])
        for i in range(len(values)):
            term = np.sum(grads[i] * v[i], axis=1)
            for j, val in enumerate(values):
                if j != i:
                    term = term * val
            total += term
        return total

    def exact_hessian(self, points, u, v) -> np.ndarray:
        """``Dd phi(u, v)``; on ``S^m(rho)`` a degree-k polynomial has
        ``Hess P(u, v) = u^T (d^2 P) v - k P (u.v)/rho^2`` for tangent u, v."""
        values = self.factor_values(points)
        grads = self._tangent_gradients(points)
        nf = len(values)
        total = np.zeros(values[0].shape[0])
        for i in range(nf):
            f, poly, x = self.manifold.factors[i], self.polys[i], points[i]
            amb = np.einsum("na,nab,nb->n", u[i], poly.hessian(x), v[i])
            hess_i = amb - poly.degree * values[i] * np.sum(u[i] * v[i], axis=1) / float(f.radius_sq)
            term = hess_i
            for j in range(nf):
                if j != i:
                    term = term * values[j]
            total += term
            for j in range(nf):
                if j == i:
                    continue
                cross = np.sum(grads[i] * u[i], axis=1) * np.sum(grads[j] * v[j], axis=1)
                for l in range(nf):
                    if l not in (i, j):
                        cross = cross * values[l]
                total += cross
        return total
