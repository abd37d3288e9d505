"""Command-line front end.

Subcommands: ``check-pr``, ``reduce``, ``analyze``, ``select-points``,
``freqresp``, ``example``.  Exit codes: 0 on success (and on passing
checks), 1 on domain failures (constraint violations, infeasible data,
instability, failed reference checks), 2 on usage or parse errors.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, cases, selection, serialization
from .errors import QmorError, SchemaError
from .reduction import InterpolationData, reduce_left, reduce_passive, reduce_right
from .systems import AnnihilationSystem, QuadratureSystem, check_realizability


def _load_json_arg(value, what):
    """Accept either a path or an inline JSON document."""
    text = value.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"inline {what} is not valid JSON: {exc}") from exc
    path = Path(value)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {what} from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid_override(args, *state_matrices):
    spec = analysis.default_grid(*state_matrices)
    wmin = args.wmin if args.wmin is not None else spec.wmin
    wmax = args.wmax if args.wmax is not None else spec.wmax
    count = args.wpts if args.wpts is not None else spec.count
    if not (0 < wmin < wmax):
        raise SchemaError("need 0 < wmin < wmax")
    return analysis.GridSpec(
        wmin=wmin, wmax=wmax, count=count, two_sided=spec.two_sided
    )


def cmd_check_pr(args):
    system = serialization.load_system(args.input)
    report = check_realizability(system, tol=args.tol)
    form = "quadrature" if isinstance(system, QuadratureSystem) else "annihilation"
    print(f"form: {form}  (n={system.n_modes}, m={system.n_inputs}, ell={system.n_outputs})")
    for k, value in enumerate(report.residuals, start=1):
        print(f"constraint {k} residual: {value:.6e}")
    print(f"tolerance: {report.tol:.1e}  ->  {'pass' if report.passes else 'FAIL'}")
    return 0 if report.passes else 1


def _interpolation_data_from_args(args):
    points_doc = _load_json_arg(args.points, "points")
    if isinstance(points_doc, dict):
        # Combined {"points": ..., "directions": ...} document.
        if args.dirs is not None:
            points_doc = dict(points_doc)
            points_doc["directions"] = _load_json_arg(args.dirs, "directions")
    else:
        if args.dirs is None:
            raise SchemaError("--dirs is required when --points is a bare array")
        points_doc = {
            "points": points_doc,
            "directions": _load_json_arg(args.dirs, "directions"),
        }
    points, directions = serialization.points_from_dict(points_doc)
    side = "right" if args.method == "right" else "left"
    data = InterpolationData(side=side, points=points, directions=directions)
    if args.r is not None:
        expected = args.r if args.method == "passive" else 2 * args.r
        if len(data) != expected:
            raise SchemaError(
                f"--r {args.r} needs {expected} data items for method "
                f"{args.method}, got {len(data)}"
            )
    return data


def cmd_reduce(args):
    system = serialization.load_system(args.input)
    data = _interpolation_data_from_args(args)
    if args.method == "passive":
        if not isinstance(system, AnnihilationSystem):
            raise SchemaError("--method passive requires an annihilation-form system")
        result = reduce_passive(system, data, pr_tol=args.tol if args.tol is not None else 1e-10)
    else:
        if not isinstance(system, QuadratureSystem):
            raise SchemaError(f"--method {args.method} requires a quadrature-form system")
        reducer = reduce_left if args.method == "left" else reduce_right
        result = reducer(system, data, pr_tol=args.tol if args.tol is not None else 1e-8)
    out = _out_dir(args)
    serialization.save_system(result.reduced, out / "reduced.json")
    with open(out / "reduction.json", "w", encoding="utf-8") as fh:
        json.dump(serialization.reduction_to_dict(result, args.method), fh, indent=1)
        fh.write("\n")
    diag = result.diagnostics
    print(f"wrote {out / 'reduced.json'} and {out / 'reduction.json'}")
    print(f"reduced poles: {np.array2string(diag.poles, precision=6)}")
    print(f"realizability residuals: {[f'{r:.3e}' for r in diag.realizability.residuals]}")
    print(f"biorthogonality residual: {diag.biorthogonality:.3e}")
    worst = max(
        (
            r / ref if ref > 1e-6 else r
            for r, ref in zip(diag.interpolation_residuals, diag.interpolation_references)
        ),
        default=0.0,
    )
    print(f"worst interpolation residual: {worst:.3e}")
    return 0


def cmd_analyze(args):
    system = serialization.load_system(args.original)
    _, result = serialization.load_reduction(args.reduction)
    full_state = system.A if isinstance(system, QuadratureSystem) else system.F
    red_state = (
        result.reduced.A
        if isinstance(result.reduced, QuadratureSystem)
        else result.reduced.F
    )
    grid = _grid_override(args, full_state, red_state)
    report = analysis.error_report(system, result, grid=grid)
    out = _out_dir(args)
    serialization.write_error_curve_csv(out / "error_curve.csv", report.pointwise)
    doc = {
        "hinf_error_estimate": report.hinf_error_estimate,
        "hinf_bound_left": report.hinf_bound_left,
        "hinf_bound_right": report.hinf_bound_right,
        "peak_frequency": report.peak_frequency,
        "stable": report.stable,
        "grid": {
            "wmin": report.grid.wmin,
            "wmax": report.grid.wmax,
            "count": report.grid.count,
            "spacing": "log",
            "two_sided": report.grid.two_sided,
        },
        "notes": list(report.notes),
    }
    if not report.stable:
        doc["bounds_omitted_reason"] = "state matrices are not Hurwitz"
    with open(out / "error_report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    if args.surface:
        re_pts, im_pts, values = analysis.error_surface(system, result)
        serialization.write_error_surface_csv(
            out / "error_surface.csv", re_pts, im_pts, values
        )
        print(f"wrote {out / 'error_surface.csv'}")
    print(f"wrote {out / 'error_report.json'} and {out / 'error_curve.csv'}")
    print(f"worst-case error estimate: {report.hinf_error_estimate:.6g} "
          f"at omega = {report.peak_frequency:.6g}")
    if report.stable:
        print(f"bounds: left {report.hinf_bound_left:.6g}, right {report.hinf_bound_right:.6g}")
    else:
        print("bounds omitted: " + "; ".join(report.notes))
    return 0


def _default_directions(method, r, system):
    if method == "passive":
        # Indicator pattern (e1, e1, e2, e2, ...) truncated to r rows.
        ell = system.n_outputs
        rows = np.zeros((r, ell), dtype=complex)
        for k in range(r):
            rows[k, (k // 2) % ell] = 1.0
        return rows
    dim_pairs = system.n_outputs if method == "left" else system.n_inputs
    return selection.tangent_directions(r, dim_pairs)


def cmd_select_points(args):
    system = serialization.load_system(args.input)
    if args.dirs is not None:
        directions = serialization.complex_matrix_from_json(
            _load_json_arg(args.dirs, "directions"), "directions"
        )
    else:
        directions = _default_directions(args.method, args.r, system)
    bounds = None
    if args.wmin is not None or args.wmax is not None:
        if args.wmin is None or args.wmax is None:
            raise SchemaError("provide both --wmin and --wmax, or neither")
        bounds = (args.wmin, args.wmax)
    problem = selection.SelectionProblem(
        system=system,
        side=args.method,
        r=args.r,
        directions=directions,
        omega_bounds=bounds,
        cost=args.cost,
        tie_omegas=args.tie_omega,
        template=args.template,
    )
    chosen = selection.optimize_points(problem)
    out = _out_dir(args)
    doc = {
        "omegas": [float(w) for w in chosen.omegas],
        "cost": chosen.cost,
        "cost_kind": args.cost,
        "points": [[float(p.real), float(p.imag)] for p in chosen.points],
    }
    with open(out / "selected_points.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    serialization.write_scan_trace_csv(out / "scan_trace.csv", chosen.trace)
    print(f"wrote {out / 'selected_points.json'} and {out / 'scan_trace.csv'}")
    print(f"selected omegas: {np.array2string(chosen.omegas, precision=6)}")
    print(f"cost ({args.cost}): {chosen.cost:.6g}")
    return 0


def cmd_freqresp(args):
    system = serialization.load_system(args.input)
    state = system.A if isinstance(system, QuadratureSystem) else system.F
    grid = _grid_override(args, state)
    response = analysis.frequency_response(system, grid.frequencies())
    out = _out_dir(args)
    serialization.write_frequency_response_csv(out / "freqresp.csv", response)
    print(f"wrote {out / 'freqresp.csv'} ({len(response.omegas)} rows, "
          f"{len(response.skipped)} skipped)")
    return 0


def _write_example_artifacts(outcome, out):
    artifacts = outcome.artifacts
    serialization.save_system(artifacts["system"], out / "system.json")
    result = artifacts["result"]
    serialization.save_system(result.reduced, out / "reduced.json")
    with open(out / "reduction.json", "w", encoding="utf-8") as fh:
        json.dump(serialization.reduction_to_dict(result, artifacts["method"]), fh, indent=1)
        fh.write("\n")
    if "error_report" in artifacts:
        report = artifacts["error_report"]
        serialization.write_error_curve_csv(out / "error_curve.csv", report.pointwise)
    if "selection" in artifacts:
        chosen = artifacts["selection"]
        with open(out / "selected_points.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "omegas": [float(w) for w in chosen.omegas],
                    "cost": chosen.cost,
                    "points": [[float(p.real), float(p.imag)] for p in chosen.points],
                },
                fh,
                indent=1,
            )
            fh.write("\n")
        serialization.write_scan_trace_csv(out / "scan_trace.csv", chosen.trace)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(outcome.to_dict(), fh, indent=1)
        fh.write("\n")


def cmd_example(args):
    outcome = cases.run_example(args.name)
    out = _out_dir(args)
    _write_example_artifacts(outcome, out)
    print(outcome.table())
    print(f"artifacts in {out}")
    return 0 if outcome.all_passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qmor",
        description=(
            "Structure-preserving interpolatory model reduction for linear "
            "quantum stochastic systems."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-pr", help="check the physical-realizability constraints")
    p.add_argument("input", help="system JSON file")
    p.add_argument("--tol", type=float, default=1e-8, help="residual tolerance")
    p.set_defaults(func=cmd_check_pr)

    p = sub.add_parser("reduce", help="build a reduced-order model")
    p.add_argument("input", help="system JSON file")
    p.add_argument("--method", required=True, choices=("left", "right", "passive"))
    p.add_argument(
        "--points",
        required=True,
        help="points JSON (file or inline): bare [[re,im],...] array or a "
        "combined {'points':..., 'directions':...} document",
    )
    p.add_argument(
        "--dirs",
        default=None,
        help="directions JSON (file or inline); optional when --points "
        "carries a combined document",
    )
    p.add_argument("--r", type=int, default=None, help="expected reduced mode count")
    p.add_argument("--tol", type=float, default=None, help="realizability tolerance")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("analyze", help="error curve, estimate, and bounds")
    p.add_argument("original", help="original system JSON")
    p.add_argument("reduction", help="reduction bundle JSON written by 'reduce'")
    p.add_argument("--wmin", type=float, default=None)
    p.add_argument("--wmax", type=float, default=None)
    p.add_argument("--wpts", type=int, default=None)
    p.add_argument(
        "--surface",
        action="store_true",
        help="also export the error norm over a complex-plane rectangle",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("select-points", help="search for interpolation frequencies")
    p.add_argument("input", help="system JSON file")
    p.add_argument("--method", required=True, choices=("left", "right", "passive"))
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--cost", choices=("hinf", "h2"), default="hinf")
    p.add_argument("--dirs", default=None, help="directions JSON (file or inline)")
    p.add_argument("--wmin", type=float, default=None, help="search interval lower edge")
    p.add_argument("--wmax", type=float, default=None, help="search interval upper edge")
    p.add_argument("--tie-omega", action="store_true", help="force all frequencies equal")
    p.add_argument(
        "--template",
        choices=("conjugate_pairs", "symmetric_with_dc"),
        default="conjugate_pairs",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select_points)

    p = sub.add_parser("freqresp", help="frequency-response CSV export")
    p.add_argument("input", help="system JSON file")
    p.add_argument("--wmin", type=float, default=None)
    p.add_argument("--wmax", type=float, default=None)
    p.add_argument("--wpts", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_freqresp)

    p = sub.add_parser("example", help="run a bundled demonstration case")
    p.add_argument("name", choices=cases.EXAMPLE_NAMES)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_example)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QmorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
