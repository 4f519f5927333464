"""Analysis pipeline orchestration, deterministic JSON reports, exports."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .polychart import ManifoldSpec, SpecError
from .singular import ComplexPoint, analyze_complex_points, euler_check
from .orbits import (
    DEFAULT_RESOLUTION,
    LevelGrid,
    build_grids,
    build_transversal_function,
    census,
    singular_match,
)
from .filling import fill_family

__all__ = [
    "REPORT_VERSION",
    "default_levels",
    "AnalysisOutcome",
    "run_analysis",
    "report_to_json",
    "coordinate_names",
    "write_cells_csv",
    "export_mesh_obj",
]

REPORT_VERSION = 1
_DEFAULT_LEVEL_COUNT = 8
_DEFAULT_INSET = 0.15

_NUMBER_OR_NULL = {"type": ["number", "null"]}
_NUMBER_ARRAY = {"type": "array", "items": {"type": "number"}}
_INT_ARRAY = {"type": "array", "items": {"type": "integer"}}

REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "report_version", "spec_id", "options", "complex_points", "euler",
        "census", "census_match", "transversal", "fill", "checks", "timings",
    ],
    "properties": {
        "report_version": {"const": REPORT_VERSION},
        "spec_id": {"type": "string"},
        "options": {
            "type": "object",
            "required": ["resolution", "grid_density", "levels"],
            "properties": {
                "resolution": {"type": "integer", "minimum": 8},
                "grid_density": {"type": "integer", "minimum": 2},
                "levels": _NUMBER_ARRAY,
            },
        },
        "complex_points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["location", "value", "chart", "lambda", "class", "index"],
                "properties": {
                    "location": _NUMBER_ARRAY,
                    "value": {"type": "number"},
                    "chart": {"type": "integer"},
                    "grad_norm": {"type": "number"},
                    "verified": {"type": "boolean"},
                    "flat": {"type": ["boolean", "null"]},
                    "lambda": {"type": ["array", "null"], "items": {"type": "number"}},
                    "class": {"type": ["string", "null"]},
                    "index": {"type": ["integer", "null"]},
                },
            },
        },
        "euler": {
            "type": "object",
            "required": ["index_sum", "chi_expected", "matches"],
            "properties": {
                "index_sum": {"type": ["integer", "null"]},
                "chi_expected": {"type": ["integer", "null"]},
                "matches": {"type": ["boolean", "null"]},
            },
        },
        "census": {
            "type": "object",
            "required": ["levels", "counts", "singular_levels", "hyperbolic_values",
                         "cell_size", "resolution"],
            "properties": {
                "levels": _NUMBER_ARRAY,
                "counts": _INT_ARRAY,
                "singular_levels": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2},
                },
                "hyperbolic_values": _NUMBER_ARRAY,
                "cell_size": {"type": "number"},
                "resolution": {"type": "integer"},
            },
        },
        "census_match": {"type": "boolean"},
        "transversal": {
            "type": "object",
            "required": ["lo", "hi", "breakpoints"],
            "properties": {
                "lo": {"type": "number"},
                "hi": {"type": "number"},
                "breakpoints": _NUMBER_ARRAY,
            },
        },
        "fill": {
            "type": "object",
            "required": ["levels", "leaf_counts", "census_counts", "counts_match",
                         "max_boundary_distance", "cell_diagonal", "semicontinuity"],
            "properties": {
                "levels": _NUMBER_ARRAY,
                "leaf_counts": _INT_ARRAY,
                "census_counts": _INT_ARRAY,
                "counts_match": {"type": "boolean"},
                "max_boundary_distance": {"type": "number"},
                "cell_diagonal": {"type": "number"},
                "semicontinuity": {"type": "array"},
            },
        },
        "checks": {
            "type": "object",
            "required": ["euler_matches", "singular_match", "fill_counts_match", "all_pass"],
            "properties": {
                "euler_matches": {"type": ["boolean", "null"]},
                "singular_match": {"type": "boolean"},
                "fill_counts_match": {"type": "boolean"},
                "all_pass": {"type": "boolean"},
            },
        },
        "timings": {"type": ["object", "null"]},
    },
}


def default_levels(spec: ManifoldSpec, count: int = _DEFAULT_LEVEL_COUNT) -> list[float]:
    """Uniform levels inside the spec's validity range, inset from the ends.

    The inset keeps the levels away from the extremes of the graph value
    range, where level sets degenerate to points and are not resolved by the
    default grid.
    """
    lo, hi = spec.value_range()
    if math.isinf(lo) or math.isinf(hi):
        raise SpecError(
            "spec has an unbounded validity range; pass explicit levels (--levels)"
        )
    span = hi - lo
    a = lo + _DEFAULT_INSET * span
    b = hi - _DEFAULT_INSET * span
    return [float(v) for v in np.linspace(a, b, count)]


def _check_finite(obj, path="report"):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ArithmeticError(f"non-finite value in {path}")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


@dataclass
class AnalysisOutcome:
    report: dict
    all_pass: bool
    points: list[ComplexPoint]


def run_analysis(
    spec: ManifoldSpec,
    spec_id: str = "",
    resolution: int = DEFAULT_RESOLUTION,
    levels: Sequence[float] | None = None,
    grid_density: int = 5,
    threads: int = 1,
    with_timings: bool = False,
) -> AnalysisOutcome:
    """Full pipeline: points, normal forms, index sum, census, match, filling.

    ``all_pass`` aggregates the paper-anchored checks: the index sum matches
    the declared Euler characteristic (when declared), every singular level
    matches a special 1-hyperbolic value and conversely, and filling leaf
    counts agree with the census counts.
    """
    spec.require_real_graph("analyze")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    points = analyze_complex_points(spec, grid_density=grid_density)
    timings["complex_points"] = time.perf_counter() - t0

    euler_entry: dict
    euler_matches: bool | None
    all_special = all(p.classification is not None and p.classification.is_special for p in points)
    if all_special:
        er = euler_check(points, spec.expected_chi)
        euler_entry = er.to_dict()
        euler_matches = er.matches
    else:
        euler_entry = {
            "index_sum": None,
            "chi_expected": spec.expected_chi,
            "matches": None,
            "error": "index formula inapplicable: non-special point present",
        }
        euler_matches = False if spec.expected_chi is not None else None

    t1 = time.perf_counter()
    lv = list(levels) if levels is not None else default_levels(spec)
    grids = build_grids(spec, resolution=resolution)
    cens = census(spec, lv, resolution=resolution, grids=grids, points=points, threads=threads)
    sm = singular_match(cens, points)
    nu = build_transversal_function(spec, cens, grids=grids)
    timings["census"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    fam = fill_family(spec, lv, resolution=resolution, grids=grids, threads=threads)
    timings["filling"] = time.perf_counter() - t2

    checks = {
        "euler_matches": euler_matches,
        "singular_match": sm,
        "fill_counts_match": fam.counts_match,
    }
    all_pass = all(v is not False for v in checks.values())
    checks["all_pass"] = all_pass

    report = {
        "report_version": REPORT_VERSION,
        "spec_id": spec_id or spec.name,
        "options": {
            "resolution": resolution,
            "grid_density": grid_density,
            "levels": [float(v) for v in lv],
        },
        "complex_points": [p.report_dict() for p in points],
        "euler": euler_entry,
        "census": cens.to_dict(),
        "census_match": sm,
        "transversal": {"lo": nu.lo, "hi": nu.hi, "breakpoints": list(nu.breakpoints)},
        "fill": fam.to_dict(),
        "checks": checks,
        "timings": timings if with_timings else None,
    }
    _check_finite({k: v for k, v in report.items() if k != "timings"})
    return AnalysisOutcome(report=report, all_pass=all_pass, points=points)


def report_to_json(report: dict) -> str:
    import json

    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def coordinate_names(nvars: int) -> list[str]:
    return [f"{'xy'[i % 2]}{i // 2 + 1}" for i in range(nvars)]


def write_cells_csv(path: str | Path, grid: LevelGrid, labels: np.ndarray) -> int:
    """Write labeled cell centers (label > 0) as CSV; returns the row count."""
    names = coordinate_names(grid.ndim)
    centers = grid.center_axes()
    idx = np.argwhere(labels > 0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["label"])
        for cell in idx:
            row = [repr(float(centers[j][cell[j]])) for j in range(grid.ndim)]
            row.append(int(labels[tuple(cell)]))
            writer.writerow(row)
    return len(idx)


def export_mesh_obj(
    spec: ManifoldSpec,
    c: float,
    path: str | Path,
    fix_axis: int | None = None,
    fix_value: float | None = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> dict:
    """Export a 3D slice of the level surface ``{phi = c}`` as an OBJ mesh.

    One base coordinate is frozen (default: the last one, at the middle of its
    domain interval) and marching cubes runs on the remaining three.
    """
    from skimage import measure

    chart_ids = spec.charts_valid_at(c)
    if not chart_ids:
        raise SpecError(f"level {c} lies outside every chart validity band")
    chart = spec.charts[chart_ids[0]]
    d = chart.nvars
    if d < 4:
        raise SpecError("mesh export requires at least four base coordinates")
    if fix_axis is None:
        fix_axis = d - 1
    if not 0 <= fix_axis < d:
        raise SpecError(f"fixed axis {fix_axis} out of range")
    lo, hi = chart.domain[fix_axis]
    if fix_value is None:
        fix_value = 0.5 * (lo + hi)
    if not lo <= fix_value <= hi:
        raise SpecError(f"fixed value {fix_value} outside domain axis ({lo}, {hi})")

    free = [i for i in range(d) if i != fix_axis][:3]
    axes = []
    for i in range(d):
        if i == fix_axis:
            axes.append(np.array([fix_value]))
        elif i in free:
            axes.append(np.linspace(*chart.domain[i], resolution + 1))
        else:
            axes.append(np.array([0.5 * sum(chart.domain[i])]))
    values = chart.phi.evaluate_grid(axes)
    volume = np.squeeze(values)
    if volume.ndim != 3:
        raise SpecError("could not reduce the grid to three free axes")
    if not volume.min() < c < volume.max():
        raise SpecError(f"level {c} is not crossed in the selected slice")

    spacing = tuple(
        (chart.domain[i][1] - chart.domain[i][0]) / resolution for i in free
    )
    verts, faces, _, _ = measure.marching_cubes(volume, level=c, spacing=spacing)
    origin = np.array([chart.domain[i][0] for i in free])
    verts = verts + origin

    names = coordinate_names(d)
    with open(path, "w") as fh:
        fh.write(f"# level surface slice c={c!r}\n")
        fh.write(f"# free axes: {', '.join(names[i] for i in free)}; ")
        fh.write(f"fixed {names[fix_axis]}={fix_value!r}\n")
        for v in verts:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for f in faces:
            fh.write(f"f {int(f[0]) + 1} {int(f[1]) + 1} {int(f[2]) + 1}\n")
    return {"vertices": int(len(verts)), "faces": int(len(faces)), "path": str(path)}
