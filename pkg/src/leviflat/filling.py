"""Slice-wise Levi-flat filling of graph submanifolds.

Per slice value ``c`` the filling leaf regions are extracted as the cells on
which ``phi - c`` keeps one strict sign at all corners, labeled by face
adjacency; the bounding surface cells are exactly the census surface cells at
the same level, which realizes the discrete boundary condition dM = S.  The
default interior sign is negative (fixtures orient their lower defining
polynomials accordingly); when a seed is supplied the sign is chosen so the
seed cell is interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage, spatial

from .polychart import DomainError, ManifoldSpec, SpecError
from .orbits import (
    DEFAULT_RESOLUTION,
    LevelGrid,
    build_grids,
    census,
    surface_cells,
    _corner_any,
    _face_structure,
)

__all__ = [
    "ChartFill",
    "SliceFill",
    "BoundaryCheck",
    "FillFamilyResult",
    "fill_slice",
    "fill_family",
    "boundary_check",
]


@dataclass
class ChartFill:
    """Interior/boundary cell data of one chart at one slice value."""

    chart_index: int
    grid: LevelGrid
    labels: np.ndarray
    leaf_count: int
    boundary: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.labels > 0


@dataclass
class SliceFill:
    """Filled leaf regions of one slice ``{graph value = c}``."""

    c: float
    sign: int
    chart_fills: list[ChartFill]
    seed_leaf: int | None = None

    @property
    def leaf_count(self) -> int:
        return sum(cf.leaf_count for cf in self.chart_fills)

    @property
    def leaf_sizes(self) -> list[int]:
        sizes: list[int] = []
        for cf in self.chart_fills:
            sizes.extend(
                int(np.count_nonzero(cf.labels == k)) for k in range(1, cf.leaf_count + 1)
            )
        return sizes

    @property
    def empty(self) -> bool:
        return self.leaf_count == 0

    def to_summary(self) -> dict:
        return {
            "c": self.c,
            "sign": self.sign,
            "leaf_count": self.leaf_count,
            "leaf_sizes": self.leaf_sizes,
            "seed_leaf": self.seed_leaf,
        }


def _interior_mask(grid: LevelGrid, c: float, sign: int) -> np.ndarray:
    diff = grid.values - c
    if sign < 0:
        return ~_corner_any(diff >= 0)
    return ~_corner_any(diff <= 0)


def _seed_cell(grid: LevelGrid, seed: np.ndarray) -> tuple[int, ...]:
    idx = []
    for v, (lo, hi), h in zip(seed, grid.box, grid.cell_sizes):
        k = int(math.floor((v - lo) / h))
        idx.append(min(max(k, 0), grid.resolution - 1))
    return tuple(idx)


def fill_slice(
    spec: ManifoldSpec,
    c: float,
    seed: Sequence[float] | None = None,
    resolution: int = DEFAULT_RESOLUTION,
    grids: dict[int, LevelGrid] | None = None,
    sign: int | None = None,
) -> SliceFill:
    """Extract the filled leaf regions of the slice at level ``c``.

    Multi-chart specs are accepted for the real-graph model; a v-graph spec is
    handled only in the single-chart regime where the interior is determined
    by the sign of ``phi - c``.
    """
    if spec.graph_model.value != "real_graph" and len(spec.charts) != 1:
        raise SpecError("unsupported geometry: v-graph filling needs a single chart")
    chart_ids = spec.charts_valid_at(c)
    if grids is None:
        grids = {
            i: LevelGrid.from_chart(spec.charts[i], resolution=resolution) for i in chart_ids
        }

    c = float(c)
    if sign is None:
        sign = -1
    if seed is not None:
        seed = np.asarray(seed, dtype=float)
        seed_val = None
        for i in chart_ids:
            if spec.charts[i].contains(seed):
                seed_val = spec.charts[i].phi.evaluate(seed)
                break
        if seed_val is None:
            raise DomainError("seed outside filling: no valid chart contains the seed")
        if abs(seed_val - c) < 1e-12:
            raise DomainError("seed outside filling: seed lies on the slice surface")
        sign = 1 if seed_val > c else -1

    fills: list[ChartFill] = []
    for i in chart_ids:
        grid = grids[i]
        interior = _interior_mask(grid, c, sign)
        labels, count = ndimage.label(interior, structure=_face_structure(grid.ndim))
        boundary = surface_cells(grid, c)
        fills.append(
            ChartFill(
                chart_index=i, grid=grid, labels=labels, leaf_count=int(count), boundary=boundary
            )
        )

    result = SliceFill(c=c, sign=sign, chart_fills=fills)
    if seed is not None:
        offset = 0
        seed_leaf = None
        for cf in fills:
            if spec.charts[cf.chart_index].contains(seed):
                cell = _seed_cell(cf.grid, seed)
                label = int(cf.labels[cell])
                if label > 0:
                    seed_leaf = offset + label
                    break
            offset += cf.leaf_count
        if seed_leaf is None:
            raise DomainError("seed outside filling: seed cell is not interior")
        result.seed_leaf = seed_leaf
    return result


@dataclass(frozen=True)
class BoundaryCheck:
    max_distance: float
    cell_diagonal: float
    boundary_cells: int

    def to_dict(self) -> dict:
        return {
            "max_distance": self.max_distance,
            "cell_diagonal": self.cell_diagonal,
            "boundary_cells": self.boundary_cells,
        }


def _edge_zeros(grid: LevelGrid, c: float) -> np.ndarray:
    """Linear-interpolation zeros of ``phi - c`` along all grid edges."""
    diff = grid.values - c
    d = grid.ndim
    points = []
    for ax in range(d):
        lower = [slice(None)] * d
        upper = [slice(None)] * d
        lower[ax] = slice(0, -1)
        upper[ax] = slice(1, None)
        a = diff[tuple(lower)]
        b = diff[tuple(upper)]
        crossing = (a < 0) != (b < 0)
        crossing &= (a != 0) & (b != 0)
        idx = np.argwhere(crossing)
        if len(idx) == 0:
            continue
        t = a[crossing] / (a[crossing] - b[crossing])
        coords = np.empty((len(idx), d))
        for j in range(d):
            coords[:, j] = grid.axes[j][idx[:, j]]
        coords[:, ax] += t * (grid.axes[ax][1] - grid.axes[ax][0])
        points.append(coords)
    if not points:
        return np.zeros((0, d))
    return np.concatenate(points, axis=0)


def boundary_check(fill: SliceFill, chart_index: int | None = None) -> BoundaryCheck:
    """Maximum distance from boundary cell centers to sampled zeros of phi - c.

    The zeros are linear interpolations along grid edges with a sign change; a
    boundary cell always contains such an edge, so the bound scales with the
    cell size and must stay below two cell diagonals.
    """
    max_dist = 0.0
    diag = 0.0
    total = 0
    for cf in fill.chart_fills:
        if chart_index is not None and cf.chart_index != chart_index:
            continue
        diag = max(diag, cf.grid.cell_diagonal)
        n_cells = int(np.count_nonzero(cf.boundary))
        total += n_cells
        if n_cells == 0:
            continue
        zeros = _edge_zeros(cf.grid, fill.c)
        if len(zeros) == 0:
            max_dist = math.inf
            continue
        centers_axes = cf.grid.center_axes()
        idx = np.argwhere(cf.boundary)
        centers = np.stack([centers_axes[j][idx[:, j]] for j in range(cf.grid.ndim)], axis=1)
        tree = spatial.cKDTree(zeros)
        dist, _ = tree.query(centers, k=1)
        max_dist = max(max_dist, float(dist.max()))
    return BoundaryCheck(max_distance=max_dist, cell_diagonal=diag, boundary_cells=total)


@dataclass
class FillFamilyResult:
    levels: tuple[float, ...]
    slices: list[SliceFill]
    leaf_counts: tuple[int, ...]
    census_counts: tuple[int, ...]
    counts_match: bool
    max_boundary_distance: float
    cell_diagonal: float
    semicontinuity: list[dict]

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "leaf_counts": list(self.leaf_counts),
            "census_counts": list(self.census_counts),
            "counts_match": self.counts_match,
            "max_boundary_distance": self.max_boundary_distance,
            "cell_diagonal": self.cell_diagonal,
            "semicontinuity": self.semicontinuity,
        }


_SEMI_STEP = 0.05
_SEMI_FRACTION = 0.10


def fill_family(
    spec: ManifoldSpec,
    levels: Sequence[float],
    resolution: int = DEFAULT_RESOLUTION,
    grids: dict[int, LevelGrid] | None = None,
    retain: bool = False,
    threads: int = 1,
) -> FillFamilyResult:
    """Fill a family of slices and cross-check against the orbit census.

    Leaf counts per slice must equal the census component counts at the same
    levels.  For consecutive levels closer than 0.05 that lie in the same
    single chart with no singular level between them, the leaf regions must
    move upper-semicontinuously: symmetric difference at most 10% of cells.
    """
    spec.require_real_graph("fill_family")
    if grids is None:
        grids = build_grids(spec, resolution=resolution)
    lv = sorted(dict.fromkeys(float(c) for c in levels))
    if not lv:
        raise SpecError("fill_family requires at least one level")

    cens = census(spec, lv, resolution=resolution, grids=grids, threads=threads)

    def _one(c: float) -> SliceFill:
        return fill_slice(spec, c, resolution=resolution, grids=grids)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            slices = list(pool.map(_one, lv))
    else:
        slices = [_one(c) for c in lv]
    leaf_counts = tuple(s.leaf_count for s in slices)

    max_dist = 0.0
    diag = 0.0
    for s in slices:
        bc = boundary_check(s)
        if s.leaf_count or bc.boundary_cells:
            max_dist = max(max_dist, bc.max_distance)
        diag = max(diag, bc.cell_diagonal)

    semicontinuity: list[dict] = []
    for (c0, s0), (c1, s1) in zip(zip(lv, slices), zip(lv[1:], slices[1:])):
        step = c1 - c0
        if step > _SEMI_STEP:
            continue
        ids0 = {cf.chart_index for cf in s0.chart_fills}
        ids1 = {cf.chart_index for cf in s1.chart_fills}
        if len(ids0) != 1 or ids0 != ids1:
            continue
        if any(lo >= c0 and hi <= c1 for lo, hi in cens.singular_levels):
            continue
        m0 = s0.chart_fills[0].interior
        m1 = s1.chart_fills[0].interior
        frac = float(np.count_nonzero(m0 ^ m1)) / m0.size
        semicontinuity.append(
            {"pair": [c0, c1], "sym_diff_fraction": frac, "ok": frac <= _SEMI_FRACTION}
        )

    if not retain:
        for s in slices:
            for cf in s.chart_fills:
                cf.labels = np.zeros((0,), dtype=np.int32)
                cf.boundary = np.zeros((0,), dtype=bool)

    return FillFamilyResult(
        levels=tuple(lv),
        slices=slices,
        leaf_counts=leaf_counts,
        census_counts=cens.counts,
        counts_match=leaf_counts == cens.counts,
        max_boundary_distance=max_dist,
        cell_diagonal=diag,
        semicontinuity=semicontinuity,
    )
