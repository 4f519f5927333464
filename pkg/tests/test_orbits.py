import numpy as np
import pytest

from leviflat import (
    Chart,
    GraphModel,
    LevelGrid,
    ManifoldSpec,
    PolyExpr,
    SpecError,
    analyze_complex_points,
    build_grids,
    build_transversal_function,
    census,
    cone_components,
    level_components,
    normal_cone_components,
    singular_match,
)
from leviflat.orbits import label_level, surface_cells


# ---------------------------------------------------------------------------
# level components


def test_quadric_positive_level_is_connected(quadric):
    lc = level_components(quadric.charts[0], 1.0)
    assert lc.count == 1


def test_quadric_negative_level_is_empty(quadric):
    lc = level_components(quadric.charts[0], -0.5)
    assert lc.count == 0


def test_horned_lower_level_two_spheres(lower_chart):
    assert level_components(lower_chart, -0.25).count == 2


def test_horned_upper_level_one_sphere(upper_chart):
    assert level_components(upper_chart, 0.25).count == 1


def test_resolution_too_small(lower_chart):
    with pytest.raises(SpecError):
        LevelGrid.from_chart(lower_chart, resolution=4)


@pytest.mark.parametrize("resolution", [17, 33, 65])
def test_counts_stable_under_refinement(horned, resolution):
    lower, upper = horned.charts
    assert level_components(lower, -0.5, resolution=resolution).count == 2
    assert level_components(lower, -0.25, resolution=resolution).count == 2
    assert level_components(upper, 0.25, resolution=resolution).count == 1
    assert level_components(upper, 0.5, resolution=resolution).count == 1


def test_labels_deterministic(lower_chart):
    a = level_components(lower_chart, -0.3)
    b = level_components(lower_chart, -0.3)
    assert np.array_equal(a.labels, b.labels)


# ---------------------------------------------------------------------------
# census


def test_census_horned(horned):
    cens = census(horned, [-0.5, -0.25, 0.25, 0.5])
    assert cens.counts == (2, 2, 1, 1)
    assert len(cens.singular_levels) == 1
    lo, hi = cens.singular_levels[0]
    assert lo <= 0.0 <= hi
    assert hi - lo <= cens.cell_size


def test_census_quadric_no_singular(quadric):
    cens = census(quadric, [0.3, 0.8, 1.2, 1.9])
    assert cens.counts == (1, 1, 1, 1)
    assert cens.singular_levels == ()


def test_census_quadric_oracle(quadric):
    # level sets of a positive definite form: one sphere above 0, empty below
    cens = census(quadric, [-0.4, 0.5, 1.0, 2.0])
    assert cens.counts == (0, 1, 1, 1)
    assert cens.singular_levels == ()  # count changes to/from zero are range ends


def test_census_saddle_two_to_one(saddle):
    cens = census(saddle, [-1.0, -0.5, 0.5, 1.0])
    assert cens.counts == (2, 2, 1, 1)
    assert len(cens.singular_levels) == 1
    lo, hi = cens.singular_levels[0]
    assert lo <= 0.0 <= hi


def test_census_perturbed_quadric_counts(quadric):
    # adding 0.1 x1^3 does not change counts at moderate levels
    terms = list(quadric.charts[0].phi.terms) + [(0.1, (3, 0, 0, 0))]
    chart = Chart(PolyExpr.from_terms(4, terms), quadric.charts[0].domain, (0.0, 2.25))
    spec = ManifoldSpec(n=3, charts=(chart,), name="perturbed")
    levels = [0.05, 0.1, 0.2]
    base = census(quadric, levels)
    pert = census(spec, levels)
    assert pert.counts == base.counts == (1, 1, 1)
    assert census(spec, [-0.2, -0.05]).counts == (0, 0)


def test_census_requires_real_graph(quadric):
    vspec = ManifoldSpec(
        n=3, charts=quadric.charts, graph_model=GraphModel.V_GRAPH, name="vg"
    )
    with pytest.raises(SpecError, match="real-graph"):
        census(vspec, [0.5])


def test_census_resolution_33_vs_65_same_counts(horned):
    levels = [-0.5, -0.25, 0.25, 0.5]
    c33 = census(horned, levels, resolution=33)
    c65 = census(horned, levels, resolution=65)
    assert c33.counts == c65.counts


def test_census_threads_match_serial(horned):
    levels = [-0.5, -0.2, 0.2, 0.5]
    serial = census(horned, levels, threads=1)
    parallel = census(horned, levels, threads=2)
    assert serial.counts == parallel.counts
    assert serial.singular_levels == parallel.singular_levels


# ---------------------------------------------------------------------------
# singular level / separatrix matching


def test_singular_match_horned(horned):
    points = analyze_complex_points(horned)
    cens = census(horned, [-0.5, -0.25, 0.25, 0.5], points=points)
    assert cens.hyperbolic_values == (0.0,)
    assert singular_match(cens, points)


def test_singular_match_quadric_vacuous(quadric):
    points = analyze_complex_points(quadric)
    cens = census(quadric, [0.3, 0.9, 1.8], points=points)
    assert cens.singular_levels == ()
    assert singular_match(cens, points)


def test_singular_match_two_saddle(two_saddle):
    points = analyze_complex_points(two_saddle)
    cens = census(two_saddle, [-1.2, -0.8, -0.3], points=points)
    assert len(cens.singular_levels) == 2
    values = sorted(cens.hyperbolic_values)
    assert values == [-1.0, -1.0, -0.55, -0.55]
    assert singular_match(cens, points)


def test_singular_match_saddle_fixture(saddle):
    points = analyze_complex_points(saddle)
    cens = census(saddle, [-1.0, -0.5, 0.5, 1.0], points=points)
    assert cens.hyperbolic_values == (0.0,)
    assert singular_match(cens, points)


def test_singular_match_fails_on_shifted_point(horned):
    points = analyze_complex_points(horned)
    cens = census(horned, [-0.5, -0.25, 0.25, 0.5])
    hyp = [p for p in points if p.is_special_hyperbolic_1]
    hyp[0].value = 0.7  # pretend the separatrix sits elsewhere
    try:
        assert not singular_match(cens, points)
    finally:
        hyp[0].value = 0.0


# ---------------------------------------------------------------------------
# punctured null cone


def test_cone_components_at_saddle_point(horned):
    points = analyze_complex_points(horned)
    h = [p for p in points if p.is_special_hyperbolic_1][0]
    assert cone_components(h, radius=0.3) == 2


def test_cone_components_quadratic_example():
    # 3x^2 - y^2 + u^2 + v^2 corresponds to lambdas (2, 0)
    assert normal_cone_components([2.0, 0.0], radius=1.0) == 2


def test_cone_split_by_negative_coordinate():
    from scipy import ndimage

    lam = np.array([3.0, 0.0])
    coeffs = np.empty(4)
    coeffs[0::2] = 1 + lam
    coeffs[1::2] = 1 - lam
    radius = 0.5
    axes = [np.linspace(-radius, radius, 34) for _ in range(4)]
    values = np.zeros((34,) * 4)
    for i in range(4):
        shape = [1] * 4
        shape[i] = -1
        values = values + (coeffs[i] * axes[i] ** 2).reshape(shape)
    grid_box = ((-radius, radius),) * 4
    grid = LevelGrid(box=grid_box, resolution=33, axes=tuple(axes), values=values)
    mask = surface_cells(grid, 0.0)
    centers = grid.center_axes()
    rad = np.sqrt(sum((centers[i] ** 2).reshape([1 if j != i else -1 for j in range(4)])
                      for i in range(4)))
    mask &= (rad >= radius / 10) & (rad <= radius)
    labels, count = ndimage.label(mask, structure=ndimage.generate_binary_structure(4, 1))
    assert count == 2
    # each component lies on one side of the negative-coefficient coordinate y1
    for lab in (1, 2):
        cells = np.argwhere(labels == lab)
        y1 = centers[1][cells[:, 1]]
        assert np.all(y1 > 0) or np.all(y1 < 0)


def test_cone_rejects_elliptic(quadric):
    points = analyze_complex_points(quadric)
    with pytest.raises(ValueError, match="1-hyperbolic"):
        cone_components(points[0], radius=0.5)


# ---------------------------------------------------------------------------
# transversal function


def test_transversal_horned(horned):
    points = analyze_complex_points(horned)
    cens = census(horned, [-0.5, -0.25, 0.25, 0.5], points=points)
    nu = build_transversal_function(horned, cens)
    assert nu.value(-1.0) == 0.0
    assert nu.value(0.0) == 0.5
    assert nu.value(1.0) == 1.0
    # (graph value + 1) / 2 on the full range
    for v in np.linspace(-1, 1, 9):
        assert nu.value(v) == pytest.approx((v + 1) / 2)
    elliptic = sorted(nu.value(p.value) for p in points if p.classification.k == 0)
    assert elliptic == [0.0, 0.0, 1.0]


def test_transversal_quadric(quadric):
    cens = census(quadric, [0.3, 0.9, 1.8])
    nu = build_transversal_function(quadric, cens)
    assert nu.value(0.0) == 0.0
    assert nu.value(2.25) == 1.0
    assert nu.value(1.125) == pytest.approx(0.5)


def test_transversal_monotone_and_constant_on_components(horned):
    cens = census(horned, [-0.5, 0.5])
    nu = build_transversal_function(horned, cens)
    vals = [nu.value(v) for v in np.linspace(-1, 1, 33)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    # constant on a labeled component: evaluate at interpolated points of the
    # level set itself (exact up to the linear interpolation error)
    from leviflat.filling import _edge_zeros

    lc = level_components(horned.charts[0], -0.25)
    zeros = _edge_zeros(lc.grid, -0.25)
    nu_vals = nu.at_points(horned.charts[0], zeros)
    assert np.max(np.abs(nu_vals - nu.value(-0.25))) < 0.02


def test_transversal_clamps_unbounded_validity():
    phi = PolyExpr.from_terms(
        4, [(1.0, (2, 0, 0, 0)), (1.0, (0, 2, 0, 0)), (1.0, (0, 0, 2, 0)), (1.0, (0, 0, 0, 2))]
    )
    spec = ManifoldSpec(
        n=3, charts=(Chart(phi, ((-1.0, 1.0),) * 4),), name="halfline"
    )  # validity unbounded
    cens = census(spec, [0.5, 1.0])
    nu = build_transversal_function(spec, cens)
    assert nu.lo == pytest.approx(0.0, abs=0.01)  # sampled minimum near the origin
    assert nu.hi == pytest.approx(4.0)  # sampled maximum at the box corners
