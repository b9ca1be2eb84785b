"""Diagonal action of the fourth-order stability operator on joint eigenmodes.

For constant scalar curvature the operator ``A = s' o s'^*`` reads::

    A(phi) = (n-1) Delta^2 phi + 2 s Delta phi - <Dd phi, r> + |r|^2 phi

On a product of round spheres the Ricci tensor is ``c_i g_i`` on factor ``i``,
so ``<Dd phi, r> = sum_i c_i tr_{g_i} Dd phi = sum_i c_i Delta_i phi``: the
Hessian restricted to a factor is that factor's Hessian.  Every operator
below is therefore a polynomial in the commuting partial Laplacians and acts
on a joint mode (components ``lam_i``, total ``lam``) by the scalar::

    q_A = (n-1) lam^2 - 2 s lam + sum_i c_i lam_i + |r|^2

with ``q_P = q_A - |r|^2`` and ``q_{A_alpha} = q_A - alpha |r|^2``.

Quadratic forms use the L2-orthonormal eigenbasis: ``int phi^2`` is the sum of
squared coefficients and ``int phi Op(phi)`` is ``sum coef^2 * symbol``.
Rational coefficients give exact results; float coefficients give floats
accurate to about 8 ulps per term.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .manifold import GeometryData, Rational, as_fraction, format_fraction
from .spectrum import JointEigenvalue

Number = Union[Fraction, float]

# Test hook: flips the sign of the Ricci contraction so the verification
# suite can demonstrate that it catches a corrupted symbol.
_fault = {"flip_ricci_sign": False}


@contextlib.contextmanager
def inject_ricci_sign_fault() -> Iterator[None]:
    previous = _fault["flip_ricci_sign"]
    _fault["flip_ricci_sign"] = True
    try:
        yield
    finally:
        _fault["flip_ricci_sign"] = previous


@dataclass(frozen=True)
class OperatorKind:
    """``A_alpha`` for ``0 <= alpha <= 1``; ``alpha = 0`` is A and ``alpha = 1`` is P."""

    alpha: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        alpha = as_fraction(self.alpha)
        if not 0 <= alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def A(cls) -> "OperatorKind":
        return cls(Fraction(0))

    @classmethod
    def P(cls) -> "OperatorKind":
        return cls(Fraction(1))

    @classmethod
    def A_alpha(cls, alpha: Rational) -> "OperatorKind":
        return cls(as_fraction(alpha))

    @property
    def name(self) -> str:
        if self.alpha == 0:
            return "A"
        if self.alpha == 1:
            return "P"
        return f"A_alpha({format_fraction(self.alpha)})"


A = OperatorKind.A()
P = OperatorKind.P()


def _ricci_contraction(geom: GeometryData, mode: JointEigenvalue) -> Fraction:
    if len(mode.components) != len(geom.ricci_eigs):
        raise ValueError(
            f"mode has {len(mode.components)} components but the manifold has "
            f"{len(geom.ricci_eigs)} factors"
        )
    value = sum((c * lam for c, lam in zip(geom.ricci_eigs, mode.components)), Fraction(0))
    return -value if _fault["flip_ricci_sign"] else value


def symbol(geom: GeometryData, kind: OperatorKind, mode: JointEigenvalue) -> Fraction:
    lam = mode.total
    q_a = (geom.n - 1) * lam * lam - 2 * geom.s * lam + _ricci_contraction(geom, mode) + geom.ricci_norm_sq
    return q_a - kind.alpha * geom.ricci_norm_sq


@dataclass(frozen=True)
class CoefficientExpansion:
    """Finite expansion ``phi = sum coef * e_mode`` in the orthonormal eigenbasis.

    Each mode stands for one unit-norm eigenfunction in its eigenspace; since
    every operator here is diagonal, which one is immaterial.
    """

    terms: tuple[tuple[JointEigenvalue, Number], ...]
    normalized: bool = False

    def __post_init__(self) -> None:
        terms = tuple((mode, coef) for mode, coef in self.terms)
        object.__setattr__(self, "terms", terms)
        keys = [mode.levels for mode, _ in terms]
        if len(set(keys)) != len(keys):
            raise ValueError("modes in an expansion must be distinct")
        if self.normalized:
            norm = self.norm_sq()
            if isinstance(norm, Fraction):
                if norm != 1:
                    raise ValueError(f"expansion flagged normalized but sum coef^2 = {norm}")
            elif abs(norm - 1.0) > 8 * 2.220446049250313e-16 * max(1, len(terms)):
                raise ValueError(f"expansion flagged normalized but sum coef^2 = {norm!r}")

    @classmethod
    def single(cls, mode: JointEigenvalue, coef: Number = Fraction(1)) -> "CoefficientExpansion":
        return cls(((mode, coef),), normalized=(coef * coef == 1))

    def norm_sq(self) -> Number:
        return _exact_sum(coef * coef for _, coef in self.terms)


def _exact_sum(values) -> Number:
    values = list(values)
    if all(isinstance(v, (int, Fraction)) for v in values):
        return sum((Fraction(v) for v in values), Fraction(0))
    return math.fsum(float(v) for v in values)


def quadratic_form(geom: GeometryData, kind: OperatorKind, phi: CoefficientExpansion) -> Number:
    """``int phi Op(phi)`` for the expansion (twice the energy when kind is A)."""
    if not phi.terms:
        raise ValueError("empty expansion")
    values = []
    for mode, coef in phi.terms:
        q = symbol(geom, kind, mode)
        if isinstance(coef, (int, Fraction)):
            values.append(Fraction(coef) ** 2 * q)
        else:
            values.append(float(coef) ** 2 * float(q))
    return _exact_sum(values)


def rayleigh(geom: GeometryData, kind: OperatorKind, phi: CoefficientExpansion) -> Number:
    norm = phi.norm_sq()
    if norm == 0:
        raise ValueError("zero-norm expansion has no Rayleigh quotient")
    return quadratic_form(geom, kind, phi) / norm


@dataclass(frozen=True)
class BochnerTerms:
    """Per-unit-norm integrals ``n(Delta phi)^2, -2s|dphi|^2, -|Dd phi|^2, |r|^2 phi^2``."""

    laplacian_sq: Fraction
    gradient: Fraction
    hessian_sq: Fraction
    potential: Fraction

    @property
    def total(self) -> Fraction:
        return self.laplacian_sq + self.gradient + self.hessian_sq + self.potential

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.laplacian_sq, self.gradient, self.hessian_sq, self.potential)

    def to_dict(self) -> dict:
        names = ("n_laplacian_sq", "minus_2s_gradient_sq", "minus_hessian_sq", "ricci_sq_potential")
        return {k: format_fraction(v) for k, v in zip(names, self.as_tuple())} | {
            "total": format_fraction(self.total)
        }


def hessian_norm_sq(geom: GeometryData, mode: JointEigenvalue) -> Fraction:
    """``int |Dd phi|^2`` for a unit-norm eigenfunction.

    Integrating Bochner's formula gives ``int |Dd phi|^2 = int (Delta phi)^2 -
    int r(dphi, dphi)``, and ``int r(dphi, dphi) = sum_i c_i lam_i``.
    """
    return mode.total * mode.total - _ricci_contraction(geom, mode)


def bochner_identity_terms(geom: GeometryData, mode: JointEigenvalue) -> BochnerTerms:
    lam = mode.total
    return BochnerTerms(
        laplacian_sq=geom.n * lam * lam,
        gradient=-2 * geom.s * lam,
        hessian_sq=-hessian_norm_sq(geom, mode),
        potential=geom.ricci_norm_sq,
    )


def expansion(modes: Sequence[JointEigenvalue], coefs: Sequence[Number]) -> CoefficientExpansion:
    if len(modes) != len(coefs):
        raise ValueError("modes and coefficients differ in length")
    return CoefficientExpansion(tuple(zip(modes, coefs)))
