"""Grid census of the CR-orbit foliation of graph submanifolds.

For a real-graph spec the orbits are the connected components of the level
sets of the graph polynomial, so the foliation is censused by counting
components of ``{phi = c}`` on a corner-sampled grid: a cell is a surface cell
when ``phi - c`` changes sign among its corners, and components are joined by
face adjacency.  Levels where the component count changes are bracketed by
bisection down to one grid cell; at a separatrix through a special
1-hyperbolic point the count drops (two spheres below, one above), which is
what ``singular_match`` cross-checks against the classified points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .polychart import Chart, ManifoldSpec, SpecError
from .singular import ComplexPoint

__all__ = [
    "DEFAULT_RESOLUTION",
    "LevelGrid",
    "LevelComponents",
    "OrbitCensus",
    "build_grids",
    "surface_cells",
    "label_level",
    "level_components",
    "census",
    "singular_match",
    "cone_components",
    "normal_cone_components",
    "TransversalMap",
    "build_transversal_function",
]

DEFAULT_RESOLUTION = 33
_MIN_RESOLUTION = 8


@dataclass(frozen=True)
class LevelGrid:
    """Corner-sampled values of a chart polynomial over a box."""

    box: tuple[tuple[float, float], ...]
    resolution: int
    axes: tuple[np.ndarray, ...]
    values: np.ndarray

    @classmethod
    def from_chart(
        cls,
        chart: Chart,
        box: Sequence[tuple[float, float]] | None = None,
        resolution: int = DEFAULT_RESOLUTION,
    ) -> "LevelGrid":
        if resolution < _MIN_RESOLUTION:
            raise SpecError(f"resolution must be >= {_MIN_RESOLUTION}, got {resolution}")
        box = tuple(tuple(map(float, ax)) for ax in (box if box is not None else chart.domain))
        if len(box) != chart.nvars:
            raise SpecError(f"box has {len(box)} axes, chart has {chart.nvars} variables")
        axes = tuple(np.linspace(lo, hi, resolution + 1) for lo, hi in box)
        values = chart.phi.evaluate_grid(axes)
        return cls(box=box, resolution=resolution, axes=axes, values=values)

    @property
    def ndim(self) -> int:
        return len(self.box)

    @property
    def cell_sizes(self) -> np.ndarray:
        return np.array([(hi - lo) / self.resolution for lo, hi in self.box])

    @property
    def max_cell_size(self) -> float:
        return float(self.cell_sizes.max())

    @property
    def cell_diagonal(self) -> float:
        return float(np.linalg.norm(self.cell_sizes))

    def center_axes(self) -> tuple[np.ndarray, ...]:
        return tuple(0.5 * (a[:-1] + a[1:]) for a in self.axes)

    def value_range(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())


def _corner_any(mask: np.ndarray) -> np.ndarray:
    """Reduce a corner mask to cells: True if any corner of the cell is True."""
    out = mask
    for ax in range(mask.ndim):
        lower = [slice(None)] * mask.ndim
        upper = [slice(None)] * mask.ndim
        lower[ax] = slice(0, -1)
        upper[ax] = slice(1, None)
        out = out[tuple(lower)] | out[tuple(upper)]
    return out


def surface_cells(grid: LevelGrid, c: float) -> np.ndarray:
    """Cells where ``phi - c`` changes sign strictly among the corners."""
    diff = grid.values - c
    return _corner_any(diff < 0) & _corner_any(diff > 0)


_FACE_STRUCTURE: dict[int, np.ndarray] = {}


def _face_structure(ndim: int) -> np.ndarray:
    if ndim not in _FACE_STRUCTURE:
        _FACE_STRUCTURE[ndim] = ndimage.generate_binary_structure(ndim, 1)
    return _FACE_STRUCTURE[ndim]


def label_level(grid: LevelGrid, c: float) -> tuple[np.ndarray, int]:
    """Face-adjacency labeling of the surface cells of ``{phi = c}``.

    Labels follow raster-scan order, so the component containing the lowest
    cell index is always label 1.
    """
    mask = surface_cells(grid, c)
    labels, count = ndimage.label(mask, structure=_face_structure(grid.ndim))
    return labels, int(count)


@dataclass(frozen=True)
class LevelComponents:
    count: int
    labels: np.ndarray
    grid: LevelGrid


def level_components(
    chart: Chart,
    c: float,
    box: Sequence[tuple[float, float]] | None = None,
    resolution: int = DEFAULT_RESOLUTION,
    grid: LevelGrid | None = None,
) -> LevelComponents:
    """Connected components of one chart level set; empty level gives count 0."""
    if grid is None:
        grid = LevelGrid.from_chart(chart, box=box, resolution=resolution)
    labels, count = label_level(grid, c)
    return LevelComponents(count=count, labels=labels, grid=grid)


def build_grids(
    spec: ManifoldSpec, resolution: int = DEFAULT_RESOLUTION
) -> dict[int, LevelGrid]:
    """One grid per chart over its own domain box."""
    return {
        i: LevelGrid.from_chart(ch, resolution=resolution) for i, ch in enumerate(spec.charts)
    }


@dataclass
class OrbitCensus:
    """Per-level component counts with detected singular levels.

    ``singular_levels`` are (lo, hi) brackets of width at most one grid cell
    around each level where the component count changes; ``hyperbolic_values``
    are the graph values of the classified special 1-hyperbolic points, when
    supplied.
    """

    levels: tuple[float, ...]
    counts: tuple[int, ...]
    singular_levels: tuple[tuple[float, float], ...]
    cell_size: float
    resolution: int
    hyperbolic_values: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "counts": list(self.counts),
            "singular_levels": [list(iv) for iv in self.singular_levels],
            "hyperbolic_values": list(self.hyperbolic_values),
            "cell_size": self.cell_size,
            "resolution": self.resolution,
        }


class _CountCache:
    def __init__(self, spec: ManifoldSpec, grids: dict[int, LevelGrid]):
        self.spec = spec
        self.grids = grids
        self._cache: dict[float, int] = {}

    def __call__(self, c: float) -> int:
        c = float(c)
        if c not in self._cache:
            total = 0
            for ci in self.spec.charts_valid_at(c):
                total += label_level(self.grids[ci], c)[1]
            self._cache[c] = total
        return self._cache[c]


def census(
    spec: ManifoldSpec,
    levels: Sequence[float],
    resolution: int = DEFAULT_RESOLUTION,
    grids: dict[int, LevelGrid] | None = None,
    points: Sequence[ComplexPoint] | None = None,
    threads: int = 1,
) -> OrbitCensus:
    """Census the orbit foliation at the given levels.

    Per level, the count sums the components over every chart whose validity
    band contains the level.  Consecutive levels with differing non-zero
    counts bracket a singular level, refined by bisection to one cell width
    (count changes to zero happen at the ends of the graph value range, not at
    separatrices, and are not treated as singular).
    """
    spec.require_real_graph("census")
    if grids is None:
        grids = build_grids(spec, resolution=resolution)
    lv = sorted(dict.fromkeys(float(c) for c in levels))
    if not lv:
        raise SpecError("census requires at least one level")
    count_at = _CountCache(spec, grids)
    cell = max(g.max_cell_size for g in grids.values())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(count_at, lv))
    else:
        counts = [count_at(c) for c in lv]

    singular: list[tuple[float, float]] = []
    for (c_lo, n_lo), (c_hi, n_hi) in zip(zip(lv, counts), zip(lv[1:], counts[1:])):
        if n_lo == n_hi or n_lo == 0 or n_hi == 0:
            continue
        lo, hi = c_lo, c_hi
        while hi - lo > cell:
            mid = 0.5 * (lo + hi)
            if count_at(mid) == n_lo:
                lo = mid
            else:
                hi = mid
        singular.append((lo, hi))

    hyp = ()
    if points is not None:
        hyp = tuple(float(p.value) for p in points if p.is_special_hyperbolic_1)

    return OrbitCensus(
        levels=tuple(lv),
        counts=tuple(counts),
        singular_levels=tuple(singular),
        cell_size=cell,
        resolution=resolution,
        hyperbolic_values=hyp,
    )


def _interval_distance(value: float, interval: tuple[float, float]) -> float:
    lo, hi = interval
    return max(lo - value, value - hi, 0.0)


def singular_match(census_result: OrbitCensus, points: Sequence[ComplexPoint]) -> bool:
    """Check that singular levels and 1-hyperbolic values identify each other.

    True iff every detected singular bracket is within one cell width of the
    graph value of some special 1-hyperbolic point, and conversely every such
    point value is within one cell width of some bracket.  Vacuously true when
    both sides are empty.
    """
    cell = census_result.cell_size
    hyp_values = [float(p.value) for p in points if p.is_special_hyperbolic_1]
    for iv in census_result.singular_levels:
        if not any(_interval_distance(v, iv) <= cell for v in hyp_values):
            return False
    for v in hyp_values:
        if not any(_interval_distance(v, iv) <= cell for iv in census_result.singular_levels):
            return False
    return True


# ---------------------------------------------------------------------------
# punctured null cone of the normal-form quadratic


def normal_cone_components(
    lambdas: Sequence[float], radius: float, resolution: int = DEFAULT_RESOLUTION
) -> int:
    """Components of ``{Q = 0}`` in the annulus ``radius/10 <= |xi| <= radius``
    for ``Q = sum_j (1+lambda_j) x_j^2 + (1-lambda_j) y_j^2``."""
    lam = np.asarray(lambdas, dtype=float)
    if radius <= 0:
        raise ValueError("radius must be positive")
    coeffs = np.empty(2 * len(lam))
    coeffs[0::2] = 1.0 + lam
    coeffs[1::2] = 1.0 - lam
    d = len(coeffs)
    axes = [np.linspace(-radius, radius, resolution + 1) for _ in range(d)]

    values = np.zeros(tuple(resolution + 1 for _ in range(d)))
    rad2_centers = np.zeros(tuple(resolution for _ in range(d)))
    for i in range(d):
        shape = [1] * d
        shape[i] = -1
        values = values + (coeffs[i] * axes[i] ** 2).reshape(shape)
        centers = 0.5 * (axes[i][:-1] + axes[i][1:])
        rad2_centers = rad2_centers + (centers**2).reshape(shape)

    surf = _corner_any(values < 0) & _corner_any(values > 0)
    rad = np.sqrt(rad2_centers)
    mask = surf & (rad >= radius / 10.0) & (rad <= radius)
    _, count = ndimage.label(mask, structure=_face_structure(d))
    return int(count)


def cone_components(
    point: ComplexPoint, radius: float, resolution: int = DEFAULT_RESOLUTION
) -> int:
    """Component count of the punctured null cone at a special 1-hyperbolic point.

    Expected to be 2, the two halves split by the sign of the coordinate with
    the unique negative normal-form coefficient.
    """
    if not point.is_special_hyperbolic_1:
        label = "unclassified" if point.classification is None else point.classification.label
        raise ValueError(f"cone test requires a special 1-hyperbolic point, got {label}")
    assert point.normal_form is not None
    return normal_cone_components(point.normal_form.lambdas, radius, resolution=resolution)


# ---------------------------------------------------------------------------
# transversal function


@dataclass(frozen=True)
class TransversalMap:
    """Monotone map of graph values onto [0, 1], constant on orbits.

    The rescale is affine with breakpoints recorded at the detected singular
    levels; allocating parameter length proportionally to level width makes
    the map a single affine function of the graph value, continuous across
    the whole surface.
    """

    lo: float
    hi: float
    breakpoints: tuple[float, ...] = ()

    def value(self, graph_value: float | np.ndarray) -> float | np.ndarray:
        t = (np.asarray(graph_value, dtype=float) - self.lo) / (self.hi - self.lo)
        t = np.clip(t, 0.0, 1.0)
        return float(t) if np.ndim(graph_value) == 0 else t

    def at_points(self, chart: Chart, points: np.ndarray) -> np.ndarray:
        return self.value(chart.phi.evaluate_many(np.atleast_2d(points)))


def build_transversal_function(
    spec: ManifoldSpec,
    census_result: OrbitCensus,
    grids: dict[int, LevelGrid] | None = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> TransversalMap:
    """Normalize the graph value range of S to [0, 1].

    Infinite validity ends are clamped to the sampled value range of the
    corresponding charts.
    """
    lo, hi = spec.value_range()
    if math.isinf(lo) or math.isinf(hi):
        if grids is None:
            grids = build_grids(spec, resolution=resolution)
        smin = min(g.value_range()[0] for g in grids.values())
        smax = max(g.value_range()[1] for g in grids.values())
        if math.isinf(lo):
            lo = smin
        if math.isinf(hi):
            hi = smax
    if not lo < hi:
        raise SpecError(f"degenerate graph value range ({lo}, {hi})")
    breaks = tuple(0.5 * (a + b) for a, b in census_result.singular_levels)
    return TransversalMap(lo=float(lo), hi=float(hi), breakpoints=breaks)
