"""Command-line entry point ``nuspec``.

Exit codes: 0 success, 1 a verification or oracle check failed, 2 usage
error (bad flags, descriptor, grid or config), 3 internal consistency error.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import VIOLATED, bound_suite
from .manifold import as_fraction, format_fraction, geometry, resolve_manifold
from .operators import A, OperatorKind, inject_ricci_sign_fault, symbol
from .report import ConfigError, Report, RunConfig, load_config, override, render
from .spectrum import enumerate_joint, first_nonzero_eigenvalue
from .suite import GridError, SuiteSettings, parse_grid, run_suite, run_sweep
from .variational import KernelConsistencyError, alpha_star, kernel_report, minimize_symbol, mu

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

COMMANDS = ("describe", "spectrum", "nu", "mu", "alpha-star", "kernel", "bounds", "oracle", "sweep", "verify")
DEFAULT_FORMAT = {"verify": "table"}


class UsageError(ValueError):
    pass


def _levels_str(levels) -> str:
    return ";".join(str(x) for x in levels)


def _fractions_str(values) -> str:
    return ";".join(format_fraction(v) for v in values)


def _manifold(cfg: RunConfig):
    if cfg.manifold is None:
        raise UsageError("--manifold is required for this command")
    try:
        return resolve_manifold(cfg.manifold)
    except (ValueError, TypeError, OSError, KeyError) as exc:
        raise UsageError(f"bad manifold descriptor {cfg.manifold!r}: {exc}") from exc


def _fraction(name: str, value: Optional[str]) -> Optional[Fraction]:
    if value is None:
        return None
    try:
        return as_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"--{name} must be a rational such as 1/2, got {value!r}") from exc


def _variational_row(result) -> dict:
    return {
        "kind": result.kind,
        "value": format_fraction(result.value),
        "value_decimal": float(result.value),
        "kernel_dim": result.kernel_dim,
        "minimizers": "|".join(_levels_str(m.levels) for m in result.minimizers),
        "cutoff": format_fraction(result.certificate.cutoff),
        "witness": format_fraction(result.certificate.witness),
        "modes_examined": result.modes_examined,
    }


# Commands ---------------------------------------------------------------


def cmd_describe(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    geom = geometry(m)
    lam1 = first_nonzero_eigenvalue(m)
    result = {"label": m.label(), "manifold": m.to_dict(), "geometry": geom.to_dict(), "lambda_1": format_fraction(lam1)}
    row = {
        "label": m.label(),
        "n": geom.n,
        "s": format_fraction(geom.s),
        "ricci_eigs": _fractions_str(geom.ricci_eigs),
        "ricci_norm_sq": format_fraction(geom.ricci_norm_sq),
        "ricci_lower": format_fraction(geom.ricci_lower),
        "z_norm_sq": format_fraction(geom.z_norm_sq),
        "is_einstein": geom.is_einstein,
        "lambda_1": format_fraction(lam1),
    }
    return Report("describe", cfg, result, [row])


def cmd_spectrum(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    geom = geometry(m)
    cutoff = _fraction("cutoff", cfg.cutoff)
    if cutoff is None:
        cutoff = max(4 * geom.s / (geom.n - 1), first_nonzero_eigenvalue(m))
    rows = []
    for mode in enumerate_joint(m, cutoff):
        rows.append(
            {
                "levels": _levels_str(mode.levels),
                "components": _fractions_str(mode.components),
                "total": format_fraction(mode.total),
                "total_decimal": float(mode.total),
                "multiplicity": mode.multiplicity,
                "symbol_A": format_fraction(symbol(geom, A, mode)),
            }
        )
    result = {"label": m.label(), "cutoff": format_fraction(cutoff), "modes": rows}
    return Report("spectrum", cfg, result, rows)


def cmd_nu(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    alpha = _fraction("alpha", cfg.alpha) or Fraction(0)
    try:
        kind = OperatorKind.A_alpha(alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = minimize_symbol(m, kind, _fraction("cutoff", cfg.cutoff))
    return Report("nu", cfg, result.to_dict() | {"label": m.label()}, [_variational_row(result)])


def cmd_mu(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    result = mu(m, _fraction("cutoff", cfg.cutoff))
    geom = geometry(m)
    extra = {
        "label": m.label(),
        "lower": format_fraction(-geom.ricci_norm_sq),
        "upper": format_fraction(-geom.s * geom.s / geom.n),
    }
    return Report("mu", cfg, result.to_dict() | extra, [_variational_row(result) | extra])


def cmd_alpha_star(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    geom = geometry(m)
    try:
        a = alpha_star(m)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    nu_value = minimize_symbol(m, A).value
    at = minimize_symbol(m, OperatorKind.A_alpha(min(a, Fraction(1)))).value
    ratio = nu_value / geom.ricci_norm_sq
    row = {
        "label": m.label(),
        "alpha_star": format_fraction(a),
        "alpha_star_decimal": float(a),
        "nu": format_fraction(nu_value),
        "ricci_norm_sq": format_fraction(geom.ricci_norm_sq),
        "min_symbol_at_alpha_star": format_fraction(at),
        "nu_over_ricci_norm_sq": format_fraction(ratio),
        "ratio_le_alpha_star": ratio <= a,
        "equality": ratio == a,
    }
    return Report("alpha-star", cfg, row, [row])


def cmd_kernel(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    rep = kernel_report(m)
    rows = [
        {
            "levels": _levels_str(mode.levels),
            "total": format_fraction(mode.total),
            "multiplicity": mode.multiplicity,
        }
        for mode in rep.modes
    ]
    return Report("kernel", cfg, rep.to_dict() | {"label": m.label()}, rows or [{"nu": format_fraction(rep.nu), "kernel_dim": 0}])


def cmd_bounds(cfg: RunConfig, threads: int) -> Report:
    m = _manifold(cfg)
    reports = bound_suite(m, _fraction("k", cfg.k))
    rows = [r.to_dict() for r in reports]
    ok = not any(r.verdict == VIOLATED for r in reports)
    return Report("bounds", cfg, {"label": m.label(), "bounds": rows}, rows, ok)


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(";", ",").split(","))
    except ValueError as exc:
        raise UsageError(f"--levels must be comma-separated integers, got {text!r}") from exc


def cmd_oracle(cfg: RunConfig, threads: int) -> Report:
    from .oracle import identity_checks, pointwise_check
    from .oracle.quadrature import MAX_DIM

    m = _manifold(cfg)
    # pointwise checks work in any dimension; quadrature is capped
    integrals = m.dim <= MAX_DIM
    if cfg.levels is not None:
        levels_list = [_parse_levels(cfg.levels)]
        if len(levels_list[0]) != len(m.factors):
            raise UsageError("--levels needs one entry per factor")
        if min(levels_list[0]) < 0:
            raise UsageError("--levels must be non-negative")
    else:
        cutoff = _fraction("cutoff", cfg.cutoff)
        levels_list = [mode.levels for mode in enumerate_joint(m, 8 if cutoff is None else cutoff)]
    tol = cfg.tolerances

    def run(index_levels):
        index, levels = index_levels
        rng = np.random.default_rng([cfg.seed, index])
        point = pointwise_check(m, levels, rng, cfg.points, cfg.epsilon, tol.pointwise)
        if not integrals:
            return [point.to_dict()]
        lstar, boch = identity_checks(m, levels, rng, cfg.epsilon, *cfg.nodes, tol=tol.integral)
        return [point.to_dict(), lstar.to_dict(), boch.to_dict()]

    jobs = list(enumerate(levels_list))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            groups = list(pool.map(run, jobs))
    else:
        groups = [run(j) for j in jobs]
    checks = [c for g in groups for c in g]
    rows = [
        {
            "check": c["check"],
            "levels": _levels_str(c["levels"]),
            "error": c.get("max_abs_error", c.get("rel_error")),
            "tolerance": c["tolerance"],
            "passed": c["passed"],
        }
        for c in checks
    ]
    ok = all(c["passed"] for c in checks)
    result = {"label": m.label(), "integral_checks": integrals, "checks": checks}
    return Report("oracle", cfg, result, rows, ok)


def cmd_sweep(cfg: RunConfig, threads: int) -> Report:
    if cfg.family is None:
        raise UsageError("sweep needs --family, e.g. 'S2(t)xS3'")
    try:
        grid = parse_grid(cfg.grid or "")
        points = run_sweep(cfg.family, grid, threads, _fraction("k", cfg.k))
    except GridError as exc:
        raise UsageError(str(exc)) from exc
    ok = not any(p.row()["violations"] for p in points)
    return Report("sweep", cfg, [p.to_dict() for p in points], [p.row() for p in points], ok)


def cmd_verify(cfg: RunConfig, threads: int) -> Report:
    tol = cfg.tolerances
    settings = SuiteSettings(
        seed=cfg.seed,
        epsilon=cfg.epsilon,
        points=cfg.points,
        nodes=cfg.nodes,
        pointwise_tol=tol.pointwise,
        integral_tol=tol.integral,
        slope_tol=tol.convergence_slope,
    )
    rows = run_suite(settings, threads)
    failing = next((r.name for r in rows if not r.passed), None)
    result = {"rows": [r.to_dict() for r in rows], "first_failure": failing}
    return Report("verify", cfg, result, [{"status": "PASS" if r.passed else "FAIL"} | r.to_dict() for r in rows], failing is None)


HANDLERS = {
    "describe": cmd_describe,
    "spectrum": cmd_spectrum,
    "nu": cmd_nu,
    "mu": cmd_mu,
    "alpha-star": cmd_alpha_star,
    "kernel": cmd_kernel,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


# Argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifold", help="inline descriptor like 'S2(1/4)xS3' or a JSON descriptor file")
    common.add_argument("--config", help="JSON config file; command-line flags override it")
    common.add_argument("--cutoff", help="enumeration cutoff on the total Laplace eigenvalue (rational)")
    common.add_argument("--alpha", help="alpha in [0, 1] for A_alpha (nu command)")
    common.add_argument("--k", help="Ricci lower bound to use in bound checks (rational)")
    common.add_argument("--epsilon", type=float, help="finite-difference step (default 1e-3)")
    common.add_argument("--nodes", type=int, nargs=2, metavar=("POLAR", "AZIMUTH"), help="quadrature node counts")
    common.add_argument("--points", type=int, help="random points per oracle mode (default 20)")
    common.add_argument("--levels", help="oracle mode as comma-separated factor levels, e.g. 2,0")
    common.add_argument("--family", help="sweep template with a (t) placeholder for radius^2, e.g. 'S2(t)xS3'")
    common.add_argument("--grid", help="sweep grid: start:stop:step or a comma list of rationals")
    common.add_argument("--tol-pointwise", type=float, help="oracle pointwise tolerance (default 1e-3)")
    common.add_argument("--tol-integral", type=float, help="oracle integral relative tolerance (default 1e-4)")
    common.add_argument("--format", choices=("json", "csv", "table"), help="output format")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default 0)")
    common.add_argument("--threads", type=int, help="worker threads (output does not depend on it)")
    common.add_argument("--inject-fault", choices=("ricci-sign",), help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="nuspec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nuspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "describe": "curvature data of a product of round spheres",
        "spectrum": "joint Laplace eigenvalues up to a cutoff",
        "nu": "minimum of the A (or A_alpha) symbol with termination certificate",
        "mu": "minimum of the P symbol",
        "alpha-star": "nu/|r|^2, the threshold where A_alpha acquires a kernel",
        "kernel": "kernel of s'* with the Laplace-eigenvalue consistency check",
        "bounds": "closed-form eigenvalue bounds with hypotheses and verdicts",
        "oracle": "finite-difference checks; quadrature checks for dimension <= 4",
        "sweep": "nu, mu and bounds along a one-parameter family of radii",
        "verify": "full reproduction suite; exit 0 iff every row passes",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> tuple[RunConfig, dict]:
    base, runtime = load_config(args.config)
    tolerances = None
    if args.tol_pointwise is not None or args.tol_integral is not None:
        t = base.tolerances
        tolerances = {
            "pointwise": args.tol_pointwise if args.tol_pointwise is not None else t.pointwise,
            "integral": args.tol_integral if args.tol_integral is not None else t.integral,
            "convergence_slope": t.convergence_slope,
        }
    cfg = override(
        base,
        manifold=args.manifold,
        family=args.family,
        grid=args.grid,
        levels=args.levels,
        cutoff=args.cutoff,
        alpha=args.alpha,
        k=args.k,
        epsilon=args.epsilon,
        nodes=args.nodes,
        points=args.points,
        seed=args.seed,
        format=args.format,
        tolerances=tolerances,
    )
    if cfg.format is None:
        cfg = override(cfg, format=DEFAULT_FORMAT.get(args.command, "json"))
    threads = args.threads if args.threads is not None else int(runtime.get("threads", 1))
    out = args.out if args.out is not None else runtime.get("out")
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    if cfg.points < 1:
        raise ConfigError("--points must be >= 1")
    return cfg, {"threads": threads, "out": out}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg, runtime = resolve_config(args)
        fault = inject_ricci_sign_fault() if args.inject_fault == "ricci-sign" else nullcontext()
        with fault:
            report = HANDLERS[args.command](cfg, runtime["threads"])
        text = render(report, cfg.format)
    except KernelConsistencyError as exc:
        print(f"nuspec: internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        # UsageError, ConfigError, GridError and argument-range errors from the library
        print(f"nuspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if runtime["out"]:
        Path(runtime["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if not report.ok:
        if args.command == "verify":
            print(f"nuspec: verification failed at row {report.result['first_failure']}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
