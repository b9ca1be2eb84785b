"""Reproduction suite and one-parameter sweeps.

Each suite row is a pure function of the run configuration, so rows can be
evaluated on a thread pool and still produce identical output: randomness is
seeded per row from ``(seed, row index)`` and results are collected in row
order.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .bounds import VIOLATED, bound_suite, superharmonic_upper_bound, threshold_check
from .manifold import (
    ProductManifold,
    as_fraction,
    format_fraction,
    geometry,
    parse_manifold,
    product,
    round_sphere,
    scale,
)
from .operators import OperatorKind
from .spectrum import enumerate_joint, first_nonzero_eigenvalue
from .variational import alpha_star, kernel_report, minimize_symbol, mu, nu

ORACLE_MANIFOLDS = ("S2xS2", "S3")
ORACLE_CUTOFF = 8


@dataclass(frozen=True)
class SuiteSettings:
    seed: int = 0
    epsilon: float = 1e-3
    points: int = 20
    nodes: tuple[int, int] = (6, 12)
    pointwise_tol: float = 1e-3
    integral_tol: float = 1e-4
    slope_tol: float = 0.3


@dataclass(frozen=True)
class RowResult:
    name: str
    claim: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"check": self.name, "claim": self.claim, "passed": self.passed, "detail": self.detail}


Check = Callable[[SuiteSettings, np.random.Generator], tuple[bool, str]]


def _kernel_spaces() -> list[tuple[ProductManifold, int]]:
    """Manifolds whose kernel is the level-1 space of the smaller sphere, with that dimension."""
    cases = [(parse_manifold("S2xS3"), 3)]
    cases += [(round_sphere(n), n + 1) for n in range(2, 7)]
    cases += [(product([n, n + 1]), n + 1) for n in range(2, 5)]
    return cases


def _check_kernel_s2s3(_: SuiteSettings, __) -> tuple[bool, str]:
    m = parse_manifold("S2xS3")
    rep = kernel_report(m)
    geom = geometry(m)
    ok = rep.nu == 0 and rep.kernel_dim == 3 and rep.laplace_eigenvalue == geom.s / (geom.n - 1)
    return ok, f"nu={format_fraction(rep.nu)} kernel_dim={rep.kernel_dim} lambda={rep.laplace_eigenvalue}"


def _check_kernels(_: SuiteSettings, __) -> tuple[bool, str]:
    bad = []
    for m, dim in _kernel_spaces():
        rep = kernel_report(m)
        geom = geometry(m)
        if not (rep.nu == 0 and rep.kernel_dim == dim and rep.laplace_eigenvalue == geom.s / (geom.n - 1)):
            bad.append(m.label())
    return not bad, "all kernels at s/(n-1)" if not bad else f"failed: {', '.join(bad)}"


def _check_equal_spheres(_: SuiteSettings, __) -> tuple[bool, str]:
    values = []
    ok = True
    for k in range(2, 6):
        value = nu(product([k, k])).value
        values.append(format_fraction(value))
        ok &= value == k
    return ok, "nu = " + ", ".join(values)


def _check_mu_bracket(_: SuiteSettings, __) -> tuple[bool, str]:
    bad = []
    for m, _dim in _kernel_spaces():
        geom = geometry(m)
        value = mu(m).value
        upper = -geom.s * geom.s / geom.n
        ok = -geom.ricci_norm_sq <= value <= upper
        if geom.is_einstein:
            ok &= value == upper
        if not ok:
            bad.append(m.label())
    return not bad, "bracket holds, equality on Einstein members" if not bad else f"failed: {', '.join(bad)}"


def _check_superharmonic_optimal(_: SuiteSettings, __) -> tuple[bool, str]:
    worst = 0.0
    ok = True
    for n in range(2, 11):
        bound = superharmonic_upper_bound(n, float(n * (n - 1)), float(n - 1))
        lam1 = first_nonzero_eigenvalue(round_sphere(n))
        err = abs(bound - n) / n
        worst = max(worst, err)
        ok &= err <= 1e-12 and lam1 == n
    return ok, f"max relative deviation {worst:.3e}"


def _sweep_manifolds() -> list[ProductManifold]:
    radii = [Fraction(j, 12) for j in range(3, 53)]
    return [parse_manifold(f"S2({format_fraction(r)})x{tail}") for tail in ("S2", "S3") for r in radii]


def _check_bound_sweep(_: SuiteSettings, __) -> tuple[bool, str]:
    violations = []
    applicable = 0
    manifolds = _sweep_manifolds()
    for m in manifolds:
        for rep in bound_suite(m):
            applicable += rep.hypothesis_ok
            if rep.verdict == VIOLATED:
                violations.append(f"{m.label()}:{rep.bound_name}")
    detail = f"{len(manifolds)} manifolds, {applicable} applicable bounds, {len(violations)} violations"
    return not violations, detail if not violations else detail + ": " + ", ".join(violations[:3])


def _check_unequal_spheres(_: SuiteSettings, __) -> tuple[bool, str]:
    parts = []
    ok = True
    for mm, k in ((2, 2), (2, 3), (3, 2)):
        value = nu(product([mm, mm + k])).value
        cap = min((mm + k) * (k - 1) ** 2, mm * (k + 1) ** 2)
        ok &= value <= cap
        parts.append(f"({mm},{k}): {format_fraction(value)} <= {cap}")
    return ok, "; ".join(parts)


def _check_scaling(_: SuiteSettings, __) -> tuple[bool, str]:
    ok = True
    for label in ("S2xS2", "S2xS3", "S2(1/2)xS3"):
        m = parse_manifold(label)
        base = nu(m).value
        for t_sq in (Fraction(1, 4), Fraction(1), Fraction(9)):
            ok &= nu(scale(m, t_sq)).value * t_sq * t_sq == base
    return ok, "nu(t^2 g) t^4 = nu(g) for t^2 in {1/4, 1, 9}"


def _check_alpha_star(_: SuiteSettings, __) -> tuple[bool, str]:
    m = parse_manifold("S2xS2")
    a = alpha_star(m)
    at = minimize_symbol(m, OperatorKind.A_alpha(a)).value
    geom = geometry(m)
    ratio = nu(m).value / geom.ricci_norm_sq
    ok = a == Fraction(1, 2) and at == 0 and ratio <= a
    return ok, f"alpha*={format_fraction(a)} min symbol at alpha*={format_fraction(at)} nu/|r|^2={format_fraction(ratio)}"


def _check_lichnerowicz(_: SuiteSettings, __) -> tuple[bool, str]:
    bad = []
    for m in [round_sphere(n) for n in range(2, 7)] + [parse_manifold(x) for x in ("S2xS2", "S2xS3", "S3xS4")]:
        rep = next(r for r in bound_suite(m) if r.bound_name == "lichnerowicz")
        if rep.verdict != "satisfied":
            bad.append(m.label())
    return not bad, "lambda_1 >= n k/(n-1) everywhere tested" if not bad else f"failed: {', '.join(bad)}"


def _check_threshold(_: SuiteSettings, __) -> tuple[bool, str]:
    m = parse_manifold("S2xS1(1/9)xS1(1/9)")
    geom = geometry(m)
    rep = threshold_check(geom, first_nonzero_eigenvalue(m), nu(m).value)
    return rep.hypothesis_ok and rep.verdict == "satisfied", f"{m.label()}: nu={rep.observed} >= {rep.bound_value}"


def _oracle_modes() -> list[tuple[ProductManifold, tuple[int, ...]]]:
    out = []
    for label in ORACLE_MANIFOLDS:
        m = parse_manifold(label)
        out.extend((m, mode.levels) for mode in enumerate_joint(m, ORACLE_CUTOFF))
    return out


def _check_oracle_pointwise(cfg: SuiteSettings, rng) -> tuple[bool, str]:
    from .oracle import pointwise_check

    worst, ok, count = 0.0, True, 0
    for m, levels in _oracle_modes():
        rep = pointwise_check(m, levels, rng, cfg.points, cfg.epsilon, cfg.pointwise_tol)
        worst = max(worst, rep.max_abs_error)
        ok &= rep.passed
        count += 1
    return ok, f"{count} modes, max |A phi/phi - symbol| = {worst:.3e}"


def _check_oracle_integrals(cfg: SuiteSettings, rng) -> tuple[bool, str]:
    from .oracle import identity_checks

    worst_l, worst_b, ok = 0.0, 0.0, True
    for m, levels in _oracle_modes():
        lstar, boch = identity_checks(m, levels, rng, cfg.epsilon, *cfg.nodes, tol=cfg.integral_tol)
        worst_l = max(worst_l, lstar.rel_error)
        worst_b = max(worst_b, boch.rel_error)
        ok &= lstar.passed and boch.passed
    return ok, f"s'* identity rel err {worst_l:.3e}, Bochner rel err {worst_b:.3e}"


def _check_convergence(cfg: SuiteSettings, rng) -> tuple[bool, str]:
    from .oracle import convergence_order

    slopes = []
    for label, levels in (("S2xS2", (2, 1)), ("S3", (2,))):
        m = parse_manifold(label)
        for op in ("laplacian", "partial_laplacian", "hessian"):
            slopes.append(convergence_order(m, levels, rng, op, points=cfg.points).slope)
    ok = all(abs(s - 2.0) <= cfg.slope_tol for s in slopes)
    return ok, "slopes " + " ".join(f"{s:.3f}" for s in slopes)


SUITE: tuple[tuple[str, str, Check], ...] = (
    ("kernel_S2xS3", "nu(S2xS3) = 0 with a 3-dimensional kernel at Laplace eigenvalue s/(n-1)", _check_kernel_s2s3),
    ("equal_sphere_products", "nu(S^m x S^m) = m for m = 2..5", _check_equal_spheres),
    ("kernel_examples", "round S^n (n=2..6) and S^n x S^(n+1) (n=2..4) have kernel at s/(n-1)", _check_kernels),
    ("mu_bracket", "-|r|^2 <= mu <= -s^2/n, equality for Einstein metrics", _check_mu_bracket),
    ("superharmonic_bound_sharp", "Ricci-k superharmonic bound equals lambda_1(S^n) = n, n=2..10", _check_superharmonic_optimal),
    ("bound_sweep", "no bound violated on S2(rho)xS2 and S2(rho)xS3, rho^2 = j/12, j=3..52", _check_bound_sweep),
    ("unequal_sphere_cap", "nu(S^m x S^(m+k)) <= min{(m+k)(k-1)^2, m(k+1)^2}", _check_unequal_spheres),
    ("scaling", "nu scales as t^-4 under g -> t^2 g", _check_scaling),
    ("alpha_star", "alpha*(S2xS2) = 1/2 and A_alpha* has a kernel", _check_alpha_star),
    ("lichnerowicz", "lambda_1 >= n k/(n-1) when Ricci >= k > 0", _check_lichnerowicz),
    ("nu_threshold", "(n-1) lambda_1 >= 2s + |r| implies nu >= s^2/n", _check_threshold),
    ("oracle_pointwise", "finite-difference A phi / phi matches the symbol on S2xS2 and S3, total <= 8", _check_oracle_pointwise),
    ("oracle_integrals", "quadrature |s'* phi|^2 and Bochner terms match the symbol", _check_oracle_integrals),
    ("oracle_convergence", "finite-difference error decays as eps^2", _check_convergence),
)


def run_row(index: int, settings: SuiteSettings) -> RowResult:
    name, claim, check = SUITE[index]
    rng = np.random.default_rng([settings.seed, index])
    try:
        passed, detail = check(settings, rng)
    except Exception as exc:  # a crashing row is a failing row
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return RowResult(name, claim, bool(passed), detail)


def run_suite(settings: SuiteSettings, threads: int = 1, select: Optional[Iterable[str]] = None) -> list[RowResult]:
    indices = list(range(len(SUITE)))
    if select is not None:
        wanted = set(select)
        indices = [i for i in indices if SUITE[i][0] in wanted]
    if threads <= 1:
        return [run_row(i, settings) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: run_row(i, settings), indices))


# Sweeps ---------------------------------------------------------------------

PLACEHOLDER = re.compile(r"\(t\)")


class GridError(ValueError):
    pass


def parse_grid(text: str) -> list[Fraction]:
    """``"a:b:step"`` (inclusive when ``b`` is hit) or a comma list; empty means no points."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise GridError("range grid must be start:stop:step")
            start, stop, step = (as_fraction(p) for p in parts)
            if step <= 0:
                raise GridError("grid step must be positive")
            if stop < start:
                raise GridError("grid stop is below start")
            count = int((stop - start) / step)
            values = [start + i * step for i in range(count + 1)]
        else:
            values = [as_fraction(p) for p in text.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, GridError):
            raise
        raise GridError(f"invalid grid {text!r}: {exc}") from exc
    if any(v <= 0 for v in values):
        raise GridError("grid values are squared radii and must be positive")
    return values


def family_member(template: str, t: Fraction) -> ProductManifold:
    if not PLACEHOLDER.search(template):
        raise GridError("family template needs a '(t)' placeholder, e.g. S2(t)xS3")
    return parse_manifold(PLACEHOLDER.sub(f"({format_fraction(t)})", template))


@dataclass(frozen=True)
class SweepPoint:
    t: Fraction
    manifold: ProductManifold
    nu_result: object
    mu_value: Fraction
    lambda_1: Fraction
    bounds: list

    def to_dict(self) -> dict:
        return {
            "t": format_fraction(self.t),
            "manifold": self.manifold.label(),
            "nu": self.nu_result.to_dict(),
            "mu": format_fraction(self.mu_value),
            "lambda_1": format_fraction(self.lambda_1),
            "bounds": [b.to_dict() for b in self.bounds],
        }

    def row(self) -> dict:
        out = {
            "t": format_fraction(self.t),
            "t_decimal": float(self.t),
            "manifold": self.manifold.label(),
            "nu": format_fraction(self.nu_result.value),
            "nu_decimal": float(self.nu_result.value),
            "kernel_dim": self.nu_result.kernel_dim,
            "mu": format_fraction(self.mu_value),
            "lambda_1": format_fraction(self.lambda_1),
            "violations": sum(b.verdict == VIOLATED for b in self.bounds),
        }
        out.update({b.bound_name: b.verdict for b in self.bounds})
        return out


def sweep_point(template: str, t: Fraction, k: Optional[Fraction] = None) -> SweepPoint:
    m = family_member(template, t)
    return SweepPoint(t, m, nu(m), mu(m).value, first_nonzero_eigenvalue(m), bound_suite(m, k))


def run_sweep(template: str, grid: Sequence[Fraction], threads: int = 1, k=None) -> list[SweepPoint]:
    if grid:
        family_member(template, grid[0])  # validate before fanning out
    if threads <= 1:
        return [sweep_point(template, t, k) for t in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: sweep_point(template, t, k), grid))
