"""Exact spectral minima: nu, mu, alpha* and the kernel of ``s'^*``.

Reduction to the spectrum.  On a product of round spheres the joint eigenfunctions
form an L2-complete orthonormal basis of H^2 and every operator in
:mod:`nuspec.operators` is diagonal in it.  The Rayleigh quotient of any
``phi`` is then a convex combination of symbol values, so the infimum over
H^2 equals the minimum symbol over the joint spectrum.  This uses that
``|r|`` is constant; on a manifold where ``|r|`` varies, ``max_M |r|^2`` and
the potential term no longer coincide and this module does not apply.

Termination.  Since every ``c_i >= 0``, ``q_A >= q_low(lam) := (n-1) lam^2 -
2 s lam + |r|^2``, a convex parabola with vertex ``s/(n-1)``.  Once the
enumeration cutoff ``L`` is past the vertex and ``q_low(L) - alpha|r|^2`` is
at least the running minimum, no mode above ``L`` can do better.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .manifold import ProductManifold, Rational, as_fraction, format_fraction, geometry
from .operators import A, P, OperatorKind, symbol
from .spectrum import JointEigenvalue, enumerate_joint, first_nonzero_eigenvalue


class KernelConsistencyError(RuntimeError):
    """A null mode violated ``Delta phi = -s/(n-1) phi``."""


@dataclass(frozen=True)
class Certificate:
    cutoff: Fraction
    witness: Fraction
    statement: str

    def to_dict(self) -> dict:
        return {
            "cutoff": format_fraction(self.cutoff),
            "cutoff_decimal": float(self.cutoff),
            "witness": format_fraction(self.witness),
            "witness_decimal": float(self.witness),
            "statement": self.statement,
        }


@dataclass(frozen=True)
class VariationalResult:
    kind: str
    value: Fraction
    minimizers: tuple[JointEigenvalue, ...]
    kernel_dim: int
    certificate: Certificate
    modes_examined: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": format_fraction(self.value),
            "value_decimal": float(self.value),
            "minimizers": [m.to_dict() for m in self.minimizers],
            "kernel_dim": self.kernel_dim,
            "certificate": self.certificate.to_dict(),
            "modes_examined": self.modes_examined,
        }


def _lower_envelope(n: int, s: Fraction, norm_sq: Fraction, kind: OperatorKind, lam: Fraction) -> Fraction:
    return (n - 1) * lam * lam - 2 * s * lam + norm_sq - kind.alpha * norm_sq


def minimize_symbol(
    m: ProductManifold, kind: OperatorKind = A, cutoff: Optional[Rational] = None
) -> VariationalResult:
    """Minimum of ``symbol(kind, .)`` over the whole joint spectrum.

    ``cutoff`` only sets the first enumeration window; the window doubles
    until the lower-envelope certificate closes.
    """
    geom = geometry(m)
    n, s, norm_sq = geom.n, geom.s, geom.ricci_norm_sq
    vertex = s / (n - 1)
    window = max(4 * s / (n - 1), first_nonzero_eigenvalue(m))
    if cutoff is not None:
        window = max(as_fraction(cutoff), Fraction(0))
    while True:
        modes = list(enumerate_joint(m, window))
        values = [symbol(geom, kind, mode) for mode in modes]
        best = min(values)
        witness = _lower_envelope(n, s, norm_sq, kind, window)
        if window >= vertex and witness >= best:
            break
        window = window * 2 if window > 0 else first_nonzero_eigenvalue(m)
    minimizers = tuple(mode for mode, q in zip(modes, values) if q == best)
    kernel_dim = sum(mode.multiplicity for mode in minimizers) if best == 0 else 0
    statement = (
        f"every mode with total > {format_fraction(window)} has symbol > "
        f"{format_fraction(witness)} >= {format_fraction(best)}"
    )
    return VariationalResult(
        kind=kind.name,
        value=best,
        minimizers=minimizers,
        kernel_dim=kernel_dim,
        certificate=Certificate(window, witness, statement),
        modes_examined=len(modes),
    )


def nu(m: ProductManifold, cutoff: Optional[Rational] = None) -> VariationalResult:
    return minimize_symbol(m, A, cutoff)


def mu(m: ProductManifold, cutoff: Optional[Rational] = None) -> VariationalResult:
    return minimize_symbol(m, P, cutoff)


def alpha_star(m: ProductManifold) -> Fraction:
    """``nu/|r|^2``: the supremum of alpha with ``ker A_alpha = 0``.

    ``A_alpha = A - alpha |r|^2`` with ``|r|`` constant, so its minimum symbol
    is ``nu - alpha |r|^2`` and vanishes exactly at ``alpha = nu/|r|^2``.
    """
    geom = geometry(m)
    if geom.is_ricci_flat:
        raise ValueError("alpha* is undefined on a Ricci-flat manifold (|r|^2 = 0)")
    value = nu(m).value
    if value == 0:
        return Fraction(0)
    return value / geom.ricci_norm_sq


@dataclass(frozen=True)
class KernelReport:
    nu: Fraction
    kernel_dim: int
    modes: tuple[JointEigenvalue, ...]
    laplace_eigenvalue: Optional[Fraction]
    nu_result: VariationalResult = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "nu": format_fraction(self.nu),
            "kernel_dim": self.kernel_dim,
            "modes": [m.to_dict() for m in self.modes],
            "laplace_eigenvalue": (
                None if self.laplace_eigenvalue is None else format_fraction(self.laplace_eigenvalue)
            ),
        }


def kernel_report(m: ProductManifold) -> KernelReport:
    """Kernel of ``A`` (equivalently of ``s'^*``) with the Obata-type check.

    A nonzero kernel with ``s > 0`` must sit at Laplace eigenvalue
    ``s/(n-1)``: tracing ``s'^* phi = 0`` gives ``(1-n) Delta phi = s phi``.
    """
    geom = geometry(m)
    result = nu(m)
    if result.value != 0:
        return KernelReport(result.value, 0, (), None, result)
    modes = result.minimizers
    if geom.s > 0:
        expected = geom.s / (geom.n - 1)
        bad = [mode for mode in modes if mode.total != expected]
        if bad:
            raise KernelConsistencyError(
                f"{m.label()}: null modes {[b.levels for b in bad]} have Laplace eigenvalues "
                f"{[format_fraction(b.total) for b in bad]}, expected {format_fraction(expected)}"
            )
        eig = expected
    else:
        eig = modes[0].total if len({mode.total for mode in modes}) == 1 else None
    return KernelReport(Fraction(0), result.kernel_dim, modes, eig, result)
