"""Closed-form eigenvalue bounds and hypothesis-checked verdicts.

All bounds concern ``lambda_1``, the first nonzero Laplace eigenvalue, given
a Ricci lower bound ``r >= k g``.  Hypotheses that reduce to comparisons of
rationals with square roots are decided exactly by squaring; only the final
bound values are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .manifold import GeometryData, ProductManifold, Rational, as_fraction, format_fraction, geometry
from .spectrum import JointEigenvalue, first_nonzero_eigenvalue
from .variational import VariationalResult, nu as compute_nu

REL_TOL = 1e-12
DISCRIMINANT_WINDOW = 1e-10

SATISFIED = "satisfied"
VIOLATED = "violated"
HYPOTHESIS_NOT_MET = "hypothesis_not_met"


class NegativeDiscriminant(ValueError):
    """The square root in a bound has a negative argument beyond round-off."""


def _sqrt_clamped(disc: float, scale: float) -> float:
    # round-off at a borderline k leaves |disc| ~ 1e-14 s^2, whose root would be ~1e-7 s
    if abs(disc) <= DISCRIMINANT_WINDOW * max(scale, 1.0):
        return 0.0
    if disc < 0:
        raise NegativeDiscriminant(f"discriminant {disc!r} < 0")
    return math.sqrt(disc)


def superharmonic_upper_bound(n: int, s: float, k: float) -> float:
    """Upper bound on ``lambda_1`` under the A-superharmonic condition and ``r >= k``.

    ``(2s - k + sqrt(k^2 - 4ks + 4s^2/n)) / (2(n-1))``.  Sharp on round spheres
    (``k = n-1`` gives ``n``); at ``k = 2s(1 - sqrt(1-1/n))`` the root vanishes.
    """
    if n < 2 or s <= 0:
        raise ValueError("need n >= 2 and s > 0")
    s, k = float(s), float(k)
    disc = k * k - 4 * k * s + 4 * s * s / n
    return (2 * s - k + _sqrt_clamped(disc, s * s)) / (2 * (n - 1))


def nonneg_ricci_upper_bound(n: int, s: float) -> float:
    """The ``k = 0`` case: ``s/(n-1) * (1 + 1/sqrt(n))``."""
    if n < 2 or s <= 0:
        raise ValueError("need n >= 2 and s > 0")
    return float(s) / (n - 1) * (1 + 1 / math.sqrt(n))


def eigenmode_upper_bound(n: int, s: float, k: float, nu: float) -> float:
    """Bound from an ``A``-eigenfunction with eigenvalue ``nu``.

    ``(2s - k + sqrt(k^2 - 4ks + 4s^2/n + 4(n-1) nu)) / (2(n-1))``; equals
    :func:`superharmonic_upper_bound` at ``nu = 0``.
    """
    if nu < 0:
        raise ValueError("nu must be non-negative")
    s, k, nu = float(s), float(k), float(nu)
    disc = k * k - 4 * k * s + 4 * s * s / n + 4 * (n - 1) * nu
    return (2 * s - k + _sqrt_clamped(disc, s * s)) / (2 * (n - 1))


def lichnerowicz_lower(n: int, k: Rational) -> Fraction:
    """``n k/(n-1)``, exact."""
    k = as_fraction(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    return Fraction(n, n - 1) * k


# Exact hypothesis predicates --------------------------------------------------


def k_in_superharmonic_range(n: int, s: Fraction, k: Fraction) -> bool:
    """``0 < k <= 2 (1 - sqrt(1 - 1/n)) s``, decided in rationals."""
    if s <= 0 or k <= 0:
        return False
    slack = 1 - k / (2 * s)
    return slack >= 0 and slack * slack >= 1 - Fraction(1, n)


def k_in_small_nu_range(n: int, s: Fraction, k: Fraction, nu: Fraction) -> bool:
    """``0 <= k <= 2s (1 - sqrt(1 - 1/n - (n-1) nu/s^2))``."""
    if s <= 0 or k < 0:
        return False
    slack = 1 - k / (2 * s)
    return slack >= 0 and slack * slack >= 1 - Fraction(1, n) - (n - 1) * nu / (s * s)


def threshold_holds(n: int, s: Fraction, norm_sq: Fraction, lam1: Fraction) -> bool:
    """``(n-1) lambda_1 >= 2s + |r|`` with ``|r| = sqrt(norm_sq)``."""
    gap = (n - 1) * lam1 - 2 * s
    return gap >= 0 and gap * gap >= norm_sq


# Reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    direction: str  # "upper": observed <= bound; "lower": observed >= bound
    observed_quantity: str
    hypothesis_ok: bool
    reason: str
    bound_value: Optional[float]
    observed: float
    verdict: str
    slack: Optional[float]

    def to_dict(self) -> dict:
        return {
            "bound": self.bound_name,
            "direction": self.direction,
            "observed_quantity": self.observed_quantity,
            "hypothesis_ok": self.hypothesis_ok,
            "reason": self.reason,
            "bound_value": self.bound_value,
            "observed": self.observed,
            "verdict": self.verdict,
            "slack": self.slack,
        }


def _report(name, direction, quantity, ok, reason, bound, observed) -> BoundReport:
    observed = float(observed)
    slack = None
    if bound is not None:
        slack = bound - observed if direction == "upper" else observed - bound
    if not ok:
        verdict = HYPOTHESIS_NOT_MET
    else:
        tol = REL_TOL * max(1.0, abs(bound))
        verdict = VIOLATED if slack < -tol else SATISFIED
    return BoundReport(name, direction, quantity, ok, reason, bound, observed, verdict, slack)


@dataclass(frozen=True)
class SuperharmonicWitness:
    mode: JointEigenvalue
    symbol: Fraction
    laplace_eigenvalue: Fraction

    def to_dict(self) -> dict:
        return {
            "levels": list(self.mode.levels),
            "symbol": format_fraction(self.symbol),
            "laplace_eigenvalue": format_fraction(self.laplace_eigenvalue),
        }


def superharmonic_witness(m: ProductManifold, nu_result: Optional[VariationalResult] = None):
    """A kernel eigenfunction certifies the A-superharmonic condition.

    With ``A phi = 0`` and ``Delta phi = -s/(n-1) phi`` the positivity set of
    ``phi`` (or of ``-phi``) is nonempty, ``A phi <= 0`` there and ``Delta phi``
    vanishes with ``phi`` on its boundary.  Returns None when the kernel is
    trivial; no search over non-eigenfunctions is attempted.
    """
    result = nu_result if nu_result is not None else compute_nu(m)
    if result.value != 0 or not result.minimizers:
        return None
    mode = next((md for md in result.minimizers if not md.is_constant), None)
    if mode is None:
        return None
    return SuperharmonicWitness(mode, Fraction(0), mode.total)


def threshold_check(geom: GeometryData, lam1: Fraction, nu_value: Fraction) -> BoundReport:
    """If ``(n-1) lambda_1 >= 2s + |r|`` then ``nu >= s^2/n``."""
    ok = threshold_holds(geom.n, geom.s, geom.ricci_norm_sq, lam1)
    reason = (
        "(n-1) lambda_1 >= 2s + |r|"
        if ok
        else f"(n-1) lambda_1 = {float((geom.n - 1) * lam1):.12g} < 2s + |r| = "
        f"{float(2 * geom.s) + math.sqrt(geom.ricci_norm_sq):.12g}"
    )
    bound = float(geom.s * geom.s / geom.n)
    report = _report("nu_threshold", "lower", "nu", ok, reason, bound, nu_value)
    if ok and nu_value < geom.s * geom.s / geom.n:
        # exact comparison overrides float slack
        report = BoundReport(**{**report.__dict__, "verdict": VIOLATED})
    return report


def bound_suite(m: ProductManifold, k: Optional[Rational] = None) -> list[BoundReport]:
    """Every applicable bound evaluated on ``m`` (deterministic order).

    ``k`` defaults to the exact Ricci lower bound ``min c_i``; an override
    larger than that makes ``r >= k`` false and is reported as such.
    """
    geom = geometry(m)
    n, s = geom.n, geom.s
    lam1 = first_nonzero_eigenvalue(m)
    nu_result = compute_nu(m)
    nu_value = nu_result.value
    k = geom.ricci_lower if k is None else as_fraction(k)
    ricci_ok = k <= geom.ricci_lower
    ricci_reason = "" if ricci_ok else f"r >= {format_fraction(k)} fails (min Ricci {format_fraction(geom.ricci_lower)})"
    witness = superharmonic_witness(m, nu_result)
    reports: list[BoundReport] = []

    # A-superharmonic condition with r >= k in the admissible range
    ok, reasons = True, []
    if s <= 0:
        ok = False
        reasons.append("s <= 0")
    if witness is None:
        ok = False
        reasons.append("no non-constant kernel mode to serve as A-superharmonic witness")
    if not ricci_ok:
        ok = False
        reasons.append(ricci_reason)
    if not k_in_superharmonic_range(n, s, k):
        ok = False
        reasons.append("k outside (0, 2(1-sqrt(1-1/n)) s]")
    bound = None
    if s > 0:
        try:
            bound = superharmonic_upper_bound(n, float(s), float(k))
        except NegativeDiscriminant:
            ok = False
            reasons.append("negative discriminant")
    reports.append(
        _report("superharmonic_ricci_k", "upper", "lambda_1", ok, "; ".join(reasons) or "all hypotheses hold", bound, lam1)
    )

    # k = 0 variant: nonnegative Ricci
    ok, reasons = True, []
    if s <= 0:
        ok = False
        reasons.append("s <= 0")
    if witness is None:
        ok = False
        reasons.append("no non-constant kernel mode to serve as A-superharmonic witness")
    if geom.ricci_lower < 0:
        ok = False
        reasons.append("Ricci not nonnegative")
    bound = nonneg_ricci_upper_bound(n, float(s)) if s > 0 else None
    reports.append(
        _report("superharmonic_ricci_nonneg", "upper", "lambda_1", ok, "; ".join(reasons) or "all hypotheses hold", bound, lam1)
    )

    # eigenfunction of A with eigenvalue nu > 0; two ranges of nu.
    # The nodal-domain argument needs u to change sign, so the constant mode does not count.
    sn = s * s / n if s > 0 else Fraction(0)
    sign_changing = any(not md.is_constant for md in nu_result.minimizers)
    no_eigenmode = "nu is attained only by constants, no sign-changing eigenfunction"
    for name, large in (("eigenmode_nu_large", True), ("eigenmode_nu_small", False)):
        ok, reasons = True, []
        if s <= 0:
            ok = False
            reasons.append("s <= 0")
        if geom.is_einstein:
            ok = False
            reasons.append("Einstein metric excluded")
        if not sign_changing:
            ok = False
            reasons.append(no_eigenmode)
        if not ricci_ok:
            ok = False
            reasons.append(ricci_reason)
        if k < 0:
            ok = False
            reasons.append("k < 0")
        if large and not nu_value > sn:
            ok = False
            reasons.append("needs nu > s^2/n")
        if not large:
            if not (0 < nu_value <= sn):
                ok = False
                reasons.append("needs 0 < nu <= s^2/n")
            elif not k_in_small_nu_range(n, s, k, nu_value):
                ok = False
                reasons.append("k outside [0, 2s(1-sqrt(1-1/n-(n-1)nu/s^2))]")
        bound = None
        if s > 0:
            try:
                bound = eigenmode_upper_bound(n, float(s), float(k), float(nu_value))
            except NegativeDiscriminant:
                ok = False
                reasons.append("negative discriminant")
        reports.append(_report(name, "upper", "lambda_1", ok, "; ".join(reasons) or "all hypotheses hold", bound, lam1))

    # k = 0 eigenmode bound under positive Ricci
    reasons = []
    if not (s > 0 and geom.ricci_lower > 0):
        reasons.append("needs positive Ricci curvature and s > 0")
    if not sign_changing:
        reasons.append(no_eigenmode)
    bound = eigenmode_upper_bound(n, float(s), 0.0, float(nu_value)) if s > 0 else None
    reports.append(
        _report(
            "eigenmode_ricci_positive", "upper", "lambda_1", not reasons,
            "; ".join(reasons) or "all hypotheses hold", bound, lam1,
        )
    )

    # Lichnerowicz lower bound
    ok = ricci_ok and k > 0
    bound_exact = lichnerowicz_lower(n, k) if k >= 0 else None
    report = _report(
        "lichnerowicz", "lower", "lambda_1", ok,
        "all hypotheses hold" if ok else "needs r >= k > 0",
        None if bound_exact is None else float(bound_exact), lam1,
    )
    if ok and lam1 < bound_exact:
        report = BoundReport(**{**report.__dict__, "verdict": VIOLATED})
    reports.append(report)

    reports.append(threshold_check(geom, lam1, nu_value))
    return reports
