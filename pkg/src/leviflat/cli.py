"""Command line front end.

Subcommands: ``analyze``, ``orbits``, ``fill``, ``glue``, ``export-mesh``.
Exit codes: 0 success (all checks pass), 1 a paper-anchored check failed
(report still emitted), 2 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .polychart import DomainError, SpecError
from .fixtures import FIXTURE_NAMES, resolve_spec
from .glue import (
    GLUE_EXPRESSIONS,
    GlueParseError,
    GlueStructureError,
    euler_characteristic,
    parse_glue_expr,
    validate,
)
from .orbits import DEFAULT_RESOLUTION, build_grids, census, label_level
from .filling import boundary_check, fill_slice
from .report import (
    coordinate_names,
    default_levels,
    export_mesh_obj,
    report_to_json,
    run_analysis,
    write_cells_csv,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecError(f"cannot parse {what} list {text!r}") from None


def _default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def _add_common(p: argparse.ArgumentParser, levels: bool = True) -> None:
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION,
                   help="grid cells per axis (default %(default)s)")
    if levels:
        p.add_argument("--levels", type=str, default=None,
                       help="comma-separated slice levels")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker parallelism bound (default: available cores)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="output format (default %(default)s)")
    p.add_argument("--output", "-o", type=str, default=None,
                   help="write the summary to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leviflat",
        description="Analyze complex points, orbit foliations, and slice "
        "fillings of polynomial graph submanifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline with pass/fail checks")
    p.add_argument("spec", help=f"spec file or fixture name ({', '.join(FIXTURE_NAMES)})")
    _add_common(p)
    p.add_argument("--grid-density", type=int, default=5,
                   help="Newton seeds per axis (default %(default)s)")
    p.add_argument("--with-timings", action="store_true",
                   help="include wall-clock timings (breaks byte-identical reports)")

    p = sub.add_parser("orbits", help="orbit foliation census")
    p.add_argument("spec")
    _add_common(p)
    p.add_argument("--outdir", type=str, default="leviflat_out",
                   help="directory for per-level CSV exports (csv format)")

    p = sub.add_parser("fill", help="slice fillings with CSV export")
    p.add_argument("spec")
    _add_common(p)
    p.add_argument("--seed", type=str, default=None,
                   help="comma-separated base coordinates of an interior seed")
    p.add_argument("--outdir", type=str, default="leviflat_out",
                   help="directory for per-slice CSV exports (csv format)")

    p = sub.add_parser("glue", help="validate a gluing expression and compute chi")
    p.add_argument("expr", help=f"expression or name ({', '.join(sorted(GLUE_EXPRESSIONS))})")

    p = sub.add_parser("export-mesh", help="OBJ mesh of a 3D slice of one level set")
    p.add_argument("spec")
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--fix", type=str, default=None,
                   help="freeze one coordinate, e.g. y2=0 (default: last axis midpoint)")
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--output", "-o", type=str, default="slice.obj")
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_analyze(args) -> int:
    spec = resolve_spec(args.spec)
    levels = _parse_floats(args.levels, "levels") if args.levels else None
    outcome = run_analysis(
        spec,
        spec_id=args.spec if args.spec in FIXTURE_NAMES else Path(args.spec).stem,
        resolution=args.resolution,
        levels=levels,
        grid_density=args.grid_density,
        threads=args.threads,
        with_timings=args.with_timings,
    )
    if args.format == "csv":
        lines = ["location;value;lambda;class;index"]
        for p in outcome.report["complex_points"]:
            lam = "" if p["lambda"] is None else ",".join(repr(v) for v in p["lambda"])
            loc = ",".join(repr(v) for v in p["location"])
            lines.append(f"{loc};{p['value']!r};{lam};{p['class']};{p['index']}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(report_to_json(outcome.report), args.output)
    return EXIT_OK if outcome.all_pass else EXIT_CHECK_FAILED


def _cmd_orbits(args) -> int:
    spec = resolve_spec(args.spec)
    levels = _parse_floats(args.levels, "levels") if args.levels else default_levels(spec)
    grids = build_grids(spec, resolution=args.resolution)
    cens = census(spec, levels, resolution=args.resolution, grids=grids, threads=args.threads)
    payload = {"spec_id": spec.name, "census": cens.to_dict()}
    if args.format == "csv":
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        files = []
        for k, c in enumerate(cens.levels):
            for ci in spec.charts_valid_at(c):
                labels, count = label_level(grids[ci], c)
                path = outdir / f"orbits_level{k:03d}_chart{ci}.csv"
                rows = write_cells_csv(path, grids[ci], labels)
                files.append({"path": str(path), "level": c, "rows": rows, "components": count})
        payload["csv_files"] = files
    _emit(report_to_json(payload), args.output)
    return EXIT_OK


def _cmd_fill(args) -> int:
    spec = resolve_spec(args.spec)
    levels = _parse_floats(args.levels, "levels") if args.levels else default_levels(spec)
    seed = np.array(_parse_floats(args.seed, "seed")) if args.seed else None
    grids = build_grids(spec, resolution=args.resolution)
    outdir = Path(args.outdir)
    slices = []
    files = []
    for k, c in enumerate(sorted(levels)):
        fill = fill_slice(spec, c, seed=seed, resolution=args.resolution, grids=grids)
        if fill.empty:
            sys.stderr.write(f"warning: level {c} has no filled cells\n")
        entry = fill.to_summary()
        entry["boundary"] = boundary_check(fill).to_dict()
        slices.append(entry)
        if args.format == "csv" and not fill.empty:
            outdir.mkdir(parents=True, exist_ok=True)
            for cf in fill.chart_fills:
                path = outdir / f"fill_level{k:03d}_chart{cf.chart_index}.csv"
                rows = write_cells_csv(path, cf.grid, cf.labels)
                files.append({"path": str(path), "level": c, "rows": rows})
    from .filling import fill_family

    fam = fill_family(spec, sorted(levels), resolution=args.resolution, grids=grids,
                      threads=args.threads)
    payload = {"spec_id": spec.name, "slices": slices, "consistency": fam.to_dict()}
    if files:
        payload["csv_files"] = files
    _emit(report_to_json(payload), args.output)
    return EXIT_OK if fam.counts_match else EXIT_CHECK_FAILED


def _cmd_glue(args) -> int:
    expr = GLUE_EXPRESSIONS.get(args.expr, args.expr)
    graph = parse_glue_expr(expr)
    v = validate(graph)
    print(f"expression: {expr}")
    print(f"models: {len(graph.models)} ({', '.join(graph.models)})")
    print(f"junctions: {len(graph.junctions)}")
    counts = v.endpoint_counts
    print("endpoints: " + ", ".join(f"{k}={counts[k]}" for k in sorted(counts)))
    free = v.free_counts
    print("free endpoints: " + ", ".join(f"{k}={free[k]}" for k in sorted(free)))
    print(f"valid: {'yes' if v.ok else 'no'}")
    if v.violations:
        for viol in v.violations:
            print(f"violation: {viol}")
        return EXIT_CHECK_FAILED
    print(f"closed: {'yes' if v.closed else 'no'}")
    if v.closed:
        print(f"euler_characteristic: {euler_characteristic(graph)}")
    else:
        print("euler_characteristic: undefined (open gluing)")
    return EXIT_OK


def _cmd_export_mesh(args) -> int:
    spec = resolve_spec(args.spec)
    fix_axis = None
    fix_value = None
    if args.fix:
        name, _, value = args.fix.partition("=")
        names = coordinate_names(spec.nvars)
        if name not in names or not value:
            raise SpecError(f"--fix must look like {names[-1]}=0, got {args.fix!r}")
        fix_axis = names.index(name)
        fix_value = float(value)
    info = export_mesh_obj(
        spec, args.level, args.output,
        fix_axis=fix_axis, fix_value=fix_value, resolution=args.resolution,
    )
    print(f"wrote {info['path']}: {info['vertices']} vertices, {info['faces']} faces")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "orbits": _cmd_orbits,
        "fill": _cmd_fill,
        "glue": _cmd_glue,
        "export-mesh": _cmd_export_mesh,
    }
    try:
        return handlers[args.command](args)
    except (SpecError, DomainError, GlueParseError, GlueStructureError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
