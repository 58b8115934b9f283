"""Command-line interface: ``pscone <command> [options]``.

Structured results go to stdout as JSON (or to ``--out``); per-node and
per-iteration data are CSV. Failures print a JSON error record on stderr and
exit with the code of the error class:

    2  usage error (argparse)
    3  invalid input (cone, facets, measure)
    4  operation outside its domain
    5  grid construction failed
    6  unreadable or malformed input file
    7  a requested check failed (derivative, convergence, residual)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import PseudoConeError, ValidationError
from .fixtures import half_plane, quadrant, random_pseudocone, translated_cone
from .geometry import cone_from_dict, dual_cone, omega_area, sphere_grid
from .measures import dual_curvature, dual_volume, exponential_pair, power_pair, radial_measure
from .pseudocone import distance_from_origin, inactive_facets, support, support_exact
from .solver import SolverOptions, lemma41_bounds, solve_dual_minkowski
from .variational import DEFAULT_T_VALUES, jg_derivative_fd

GRID_ENV = "PSCONE_GRID_N"
FALLBACK_GRID_N = 100_000
CHECK_FAILED = 7


def default_grid_n() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None:
        return FALLBACK_GRID_N
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{GRID_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValidationError(f"{GRID_ENV} must be positive, got {value}")
    return value


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(payload: dict, meta: dict | None, out: str | None) -> None:
    text = io.dumps(payload, meta)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_cone(path: str | None):
    if path is None:
        return quadrant()
    doc = io.read_json(path)
    doc = doc.get("cone", doc) if "kind" not in doc else doc
    try:
        return cone_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: cone JSON is missing or mistypes a field: {exc}") from exc


def _load_body(args):
    """Pseudo-cone from ``--body`` or from a named fixture."""
    if args.body:
        return io.pseudocone_from_dict(io.read_json(args.body))
    C = _load_cone(args.cone)
    if args.fixture == "half-plane":
        return half_plane(C, args.depth)
    if args.fixture == "translated":
        return translated_cone(C, args.z or [1.0] * C.n)
    if args.fixture == "random":
        if args.seed is None:
            raise ValidationError("--seed is required for the random fixture")
        return random_pseudocone(C, args.facets, np.random.default_rng(args.seed))
    raise ValidationError("give --body or --fixture")


def _grid(C, args):
    n = args.grid_n if args.grid_n is not None else default_grid_n()
    return sphere_grid(C, n, scheme=getattr(args, "scheme", "auto"), seed=args.seed)


def _add_body(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--body", help="pseudo-cone JSON file")
    src.add_argument("--fixture", choices=["half-plane", "translated", "random"])
    p.add_argument("--cone", help="cone JSON for fixtures (default: the planar quadrant)")
    p.add_argument("--z", type=_floats, help="translation for the translated fixture (default: all ones)")
    p.add_argument("--depth", type=float, default=1.0, help="depth for the half-plane fixture")
    p.add_argument("--facets", type=int, default=4, help="facet count for the random fixture")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-n", type=int, default=None, help=f"grid resolution (default: ${GRID_ENV} or {FALLBACK_GRID_N})")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scheme", default="auto", choices=["auto", "midpoint", "fibonacci", "random"])


def cmd_cone_info(args) -> int:
    C = _load_cone(args.cone)
    payload = {
        "cone": io.cone_to_dict(C),
        "n": C.n,
        "omega_area": omega_area(C),
        "dual": io.cone_to_dict(dual_cone(C)),
    }
    if C.kind == "polyhedral":
        payload["facet_normals"] = C.facet_normals.tolist()
    if args.q is not None:
        payload["c2"] = lemma41_bounds(C, args.q)
    _emit(payload, None, args.out)
    return 0


def cmd_grid(args) -> int:
    grid = _grid(_load_cone(args.cone), args)
    _write_text(io.grid_csv(grid), args.out)
    return 0


def cmd_make(args) -> int:
    K = _load_body(args)
    _emit(io.pseudocone_to_dict(K), {"fixture": args.fixture, "seed": args.seed}, args.out)
    return 0


def cmd_eval(args) -> int:
    K = _load_body(args)
    grid = _grid(K.cone, args)
    if args.csv:
        Path(args.csv).write_text(io.radial_csv(K, grid), encoding="utf-8")
    facets = []
    for i, u in enumerate(K.normals):
        row = {"index": i, "hbar": float(K.depths[i]), "support_grid": support(K, u, grid)}
        if K.cone.kind == "polyhedral":
            row["support_exact"] = support_exact(K, u)
        facets.append(row)
    payload = {
        "distance_from_origin": distance_from_origin(K, grid),
        "inactive_facets": inactive_facets(K, grid),
        "facets": facets,
    }
    status = 0
    if args.check_derivative:
        report = _derivative_report(K, grid, args)
        payload["variational"] = report.to_dict()
        status = 0 if report.converged else CHECK_FAILED
    _emit(payload, io.grid_meta(grid), args.out)
    return status


def cmd_measure(args) -> int:
    K = _load_body(args)
    grid = _grid(K.cone, args)
    if args.decay == "exponential":
        mu = radial_measure(K, exponential_pair(), grid)
        kind = {"measure": "radial", "decay": "exponential"}
    else:
        mu = dual_curvature(K, args.q, grid)
        kind = {"measure": "dual_curvature", "q": args.q}
    meta = {**io.grid_meta(grid), **kind}
    if args.csv:
        Path(args.csv).write_text(io.measure_csv(mu, meta), encoding="utf-8")
    _emit(io.measure_to_dict(mu), meta, args.out)
    return 0


def cmd_dual_volume(args) -> int:
    K = _load_body(args)
    grid = _grid(K.cone, args)
    _emit({"dual_volume": dual_volume(K, args.q, grid), "q": args.q}, io.grid_meta(grid), args.out)
    return 0


def _derivative_report(K, grid, args):
    D = exponential_pair() if args.decay == "exponential" else power_pair(args.q)
    if args.g is not None:
        g = np.asarray(args.g, dtype=float)
    else:
        # Same-sign values keep the exact derivative away from zero.
        g = np.random.default_rng(args.seed).uniform(0.5, 1.5, K.m)
    return jg_derivative_fd(K, g, D, grid, t_values=args.t, rtol=args.rtol)


def cmd_check_derivative(args) -> int:
    K = _load_body(args)
    grid = _grid(K.cone, args)
    report = _derivative_report(K, grid, args)
    _emit(io.report_to_dict(report), io.grid_meta(grid), args.out)
    return 0 if report.converged else CHECK_FAILED


def _solver_opts(args) -> SolverOptions:
    n = args.grid_n if args.grid_n is not None else default_grid_n()
    return SolverOptions(grad_tol=args.tol, max_iter=args.max_iter, grid_n=n, seed=args.seed)


def _write_solution(res, out: str | None, meta: dict) -> None:
    if out is None:
        sys.stdout.write(io.dumps(io.result_to_dict(res), meta))
        return
    out = Path(out)
    stem = out.with_suffix("")
    io.write_json(out, io.pseudocone_to_dict(res.solution), meta)
    io.write_json(f"{stem}.result.json", io.result_to_dict(res), meta)
    Path(f"{stem}.trace.csv").write_text(io.trace_csv(res, meta), encoding="utf-8")


def cmd_solve(args) -> int:
    C = _load_cone(args.cone)
    phi = io.measure_from_dict(io.read_json(args.measure))
    res = solve_dual_minkowski(C, phi, args.q, _solver_opts(args))
    _write_solution(res, args.out, {**io.grid_meta(res.grid), "q": args.q})
    return 0 if res.converged else CHECK_FAILED


def cmd_roundtrip(args) -> int:
    if args.seed is None:
        raise ValidationError("--seed is required: roundtrip draws a random pseudo-cone")
    C = _load_cone(args.cone)
    opts = _solver_opts(args)
    grid = sphere_grid(C, opts.grid_n, seed=args.seed)
    K = random_pseudocone(C, args.facets, np.random.default_rng(args.seed), grid=grid, min_share=args.min_share)
    phi = dual_curvature(K, args.q, grid)
    res = solve_dual_minkowski(C, phi, args.q, opts, grid=grid)
    meta = {**io.grid_meta(grid), "q": args.q}
    payload = {
        "target": io.pseudocone_to_dict(K),
        "measure": io.measure_to_dict(phi),
        "result": io.result_to_dict(res),
        "depth_error": float(np.max(np.abs(res.solution.depths - K.depths))),
        "max_residual": args.max_residual,
    }
    _emit(payload, meta, args.out)
    if args.trace:
        Path(args.trace).write_text(io.trace_csv(res, meta), encoding="utf-8")
    ok = res.converged and res.residual <= args.max_residual
    return 0 if ok else CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pscone", description="C-pseudo-cones, dual curvature measures and the dual Minkowski problem.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cone-info", help="area, dual cone and bounds for a cone")
    p.add_argument("--cone", help="cone JSON (default: the planar quadrant)")
    p.add_argument("--q", type=float, help="also report the distance bound c2 for this q < 0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cone_info)

    p = sub.add_parser("grid", help="export a quadrature grid as CSV")
    p.add_argument("--cone")
    _add_grid(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("make", help="write a fixture pseudo-cone as JSON")
    _add_body(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_make)

    p = sub.add_parser("eval", help="radial dump, supports, b(K) and inactive facets")
    _add_body(p)
    _add_grid(p)
    p.add_argument("--csv", help="radial dump CSV path")
    p.add_argument("--check-derivative", action="store_true", help="include a first-variation report")
    _add_derivative_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("measure", help="dual curvature (power) or radial (exponential) measure")
    _add_body(p)
    _add_grid(p)
    p.add_argument("--q", type=float, default=-1.0)
    p.add_argument("--decay", choices=["power", "exponential"], default="power")
    p.add_argument("--csv", help="measure CSV path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("dual-volume", help="q-th dual volume")
    _add_body(p)
    _add_grid(p)
    p.add_argument("--q", type=float, default=-1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dual_volume)

    p = sub.add_parser("check-derivative", help="finite-difference check of the first variation of J_G")
    _add_body(p)
    _add_grid(p)
    _add_derivative_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_derivative)

    for name, func, helptext in (
        ("solve", cmd_solve, "solve the dual Minkowski problem for a discrete measure"),
        ("roundtrip", cmd_roundtrip, "random K -> measure -> solve -> compare"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--cone")
        p.add_argument("--q", type=float, default=-1.0)
        p.add_argument("--grid-n", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-6, help="gradient tolerance")
        p.add_argument("--max-iter", type=int, default=10_000)
        p.add_argument("--out")
        p.set_defaults(func=func)
        if name == "solve":
            p.add_argument("--measure", required=True, help="target measure JSON")
        else:
            p.add_argument("--facets", type=int, default=4)
            p.add_argument("--min-share", type=float, default=0.0, help="smallest facet share of the target mass (default: any active facet)")
            p.add_argument("--max-residual", type=float, default=1e-2)
            p.add_argument("--trace", help="trace CSV path")
    return parser


def _add_derivative_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--decay", choices=["power", "exponential"], default="power")
    p.add_argument("--q", type=float, default=-1.0)
    p.add_argument("--g", type=_floats, help="per-facet perturbation (default: seeded draw in [0.5, 1.5])")
    p.add_argument("--t", type=_floats, default=list(DEFAULT_T_VALUES), help="finite-difference steps")
    p.add_argument("--rtol", type=float, default=1e-3)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PseudoConeError as exc:
        record = {"schema": io.SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
