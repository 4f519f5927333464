import numpy as np
import pytest

from leviflat import (
    Chart,
    DomainError,
    GraphModel,
    ManifoldSpec,
    PolyExpr,
    SpecError,
    boundary_check,
    build_grids,
    census,
    fill_family,
    fill_slice,
)
from leviflat.orbits import surface_cells


# ---------------------------------------------------------------------------
# single slices


def test_fill_upper_slice_with_seed(horned):
    fill = fill_slice(horned, 0.5, seed=np.zeros(4))
    assert fill.leaf_count == 1
    assert fill.seed_leaf == 1
    assert fill.sign == 1  # seed above the slice flips the interior side


def test_fill_lower_slice_two_leaves(horned):
    fill = fill_slice(horned, -0.5)
    assert fill.sign == -1
    assert fill.leaf_count == 2


def test_fill_above_range_is_empty(horned):
    fill = fill_slice(horned, 2.0)
    assert fill.empty
    assert fill.chart_fills == []


def test_seed_on_surface_rejected(horned):
    with pytest.raises(DomainError, match="seed outside filling"):
        fill_slice(horned, 0.0, seed=np.zeros(4))  # graph value at seed equals level


def test_seed_in_boundary_cell_rejected(horned):
    fill = fill_slice(horned, -0.5)
    cf = fill.chart_fills[0]
    cell = tuple(np.argwhere(cf.boundary)[0])
    centers = cf.grid.center_axes()
    seed = np.array([centers[j][cell[j]] for j in range(4)])
    with pytest.raises(DomainError, match="seed outside filling"):
        fill_slice(horned, -0.5, seed=seed)


def test_seed_leaf_contains_origin(horned):
    fill = fill_slice(horned, 0.5, seed=np.zeros(4))
    cf = fill.chart_fills[0]
    centers = cf.grid.center_axes()
    origin_cell = tuple(int(np.argmin(np.abs(centers[j]))) for j in range(4))
    assert cf.labels[origin_cell] == fill.seed_leaf


def test_boundary_cells_equal_census_surface_cells(horned):
    grids = build_grids(horned)
    for c, ci in ((-0.5, 0), (0.5, 1)):
        fill = fill_slice(horned, c, grids=grids)
        cf = [f for f in fill.chart_fills if f.chart_index == ci][0]
        assert np.array_equal(cf.boundary, surface_cells(grids[ci], c))


def test_boundary_cells_unambiguous_and_leaves_enclosed(horned):
    # The mixed-sign shell can be two cells thick, so not every surface cell
    # has an interior face-neighbor; the discrete invariants are that no
    # boundary cell is adjacent to two different leaves and that every leaf
    # is enclosed by boundary cells.
    from scipy import ndimage

    fill = fill_slice(horned, -0.5)
    cf = fill.chart_fills[0]
    structure = ndimage.generate_binary_structure(4, 1)
    touched = np.zeros(cf.boundary.shape, dtype=np.int32)
    for leaf in range(1, cf.leaf_count + 1):
        grown = ndimage.binary_dilation(cf.labels == leaf, structure=structure)
        touched += (grown & cf.boundary).astype(np.int32)
        shell = grown & ~(cf.labels == leaf)
        assert np.all(cf.boundary[shell])  # every cell hugging a leaf is a surface cell
    assert touched.max() == 1  # no boundary cell is shared between leaves


# ---------------------------------------------------------------------------
# boundary distance


def test_boundary_within_two_cell_diagonals(horned):
    for c in (-0.5, 0.5):
        fill = fill_slice(horned, c)
        bc = boundary_check(fill)
        assert bc.boundary_cells > 0
        assert bc.max_distance <= 2 * bc.cell_diagonal


def test_quadric_boundary_near_unit_sphere(quadric):
    fill = fill_slice(quadric, 1.0)
    cf = fill.chart_fills[0]
    centers = cf.grid.center_axes()
    cells = np.argwhere(cf.boundary)
    pts = np.stack([centers[j][cells[:, j]] for j in range(4)], axis=1)
    dist_to_sphere = np.abs(np.linalg.norm(pts, axis=1) - 1.0)
    assert dist_to_sphere.max() <= cf.grid.cell_diagonal


def test_boundary_bound_improves_with_refinement(horned, quadric):
    for spec, c in ((horned, 0.5), (quadric, 1.0)):
        coarse = boundary_check(fill_slice(spec, c, resolution=17)).max_distance
        fine = boundary_check(fill_slice(spec, c, resolution=34)).max_distance
        ratio = coarse / fine
        assert ratio >= 1.33
        assert ratio <= 3.0  # halving the cells roughly halves the bound


# ---------------------------------------------------------------------------
# families and cross-module consistency


def test_family_counts_match_census_horned(horned):
    levels = np.linspace(-0.7, 0.7, 8)
    fam = fill_family(horned, levels)
    assert fam.counts_match
    assert fam.leaf_counts == (2, 2, 2, 2, 1, 1, 1, 1)
    assert fam.max_boundary_distance <= 2 * fam.cell_diagonal


@pytest.mark.parametrize("name, levels", [
    ("quadric_elliptic", [0.34, 0.9, 1.4, 1.9]),
    ("quadric_saddle", [-1.4, -0.8, 0.8, 1.4]),
])
def test_family_counts_match_census_quadrics(name, levels):
    from leviflat import fixture

    spec = fixture(name)
    fam = fill_family(spec, levels)
    assert fam.counts_match


def test_family_transition_two_to_one(horned):
    levels = [c for c in np.linspace(-0.95, 0.95, 21) if c != 0.0]
    fam = fill_family(horned, levels)
    counts = list(fam.leaf_counts)
    # a single transition from two leaves to one as the level crosses 0
    first_one = counts.index(1)
    assert first_one == 10
    assert all(c == 2 for c in counts[:first_one])
    assert all(c == 1 for c in counts[first_one:])


def test_family_interface_level_counts_both_charts(horned):
    # at the shared interface value both charts are valid, and the leaf count
    # is the sum over both; census counts the same way, so they still agree
    fam = fill_family(horned, [0.0])
    assert fam.leaf_counts == fam.census_counts == (3,)


def test_family_nested_quadric_slices(quadric):
    fam = fill_family(quadric, [0.4, 0.9, 1.6], retain=True)
    masks = [s.chart_fills[0].interior for s in fam.slices]
    # sublevel regions of a positive definite form are nested by containment
    assert np.all(masks[0] <= masks[1])
    assert np.all(masks[1] <= masks[2])


def test_family_semicontinuity_within_chart(horned):
    levels = [-0.45, -0.42, -0.39]
    fam = fill_family(horned, levels)
    assert len(fam.semicontinuity) == 2
    assert all(entry["ok"] for entry in fam.semicontinuity)
    assert all(entry["sym_diff_fraction"] <= 0.10 for entry in fam.semicontinuity)


def test_family_threads_match_serial(horned):
    levels = [-0.5, -0.2, 0.2, 0.5]
    serial = fill_family(horned, levels, threads=1)
    parallel = fill_family(horned, levels, threads=2)
    assert serial.leaf_counts == parallel.leaf_counts
    assert serial.census_counts == parallel.census_counts


def test_family_requires_real_graph(quadric):
    vspec = ManifoldSpec(n=3, charts=quadric.charts, graph_model=GraphModel.V_GRAPH)
    with pytest.raises(SpecError, match="real-graph"):
        fill_family(vspec, [0.5])


def test_v_graph_single_chart_slice_allowed(quadric):
    vspec = ManifoldSpec(n=3, charts=quadric.charts, graph_model=GraphModel.V_GRAPH)
    fill = fill_slice(vspec, 1.0)
    assert fill.leaf_count == 1


def test_v_graph_multi_chart_slice_rejected(horned):
    vspec = ManifoldSpec(n=3, charts=horned.charts, graph_model=GraphModel.V_GRAPH)
    with pytest.raises(SpecError, match="unsupported geometry"):
        fill_slice(vspec, 0.5)
