import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leviflat import (
    Chart,
    DomainError,
    ManifoldSpec,
    PolyExpr,
    SpecError,
    blended_graph_value,
    load_manifold_spec,
    save_manifold_spec,
)
from leviflat.polychart import manifold_spec_from_dict, manifold_spec_to_dict, quintic_smoothstep


# ---------------------------------------------------------------------------
# PolyExpr canonical form


def test_terms_merge_and_order():
    p = PolyExpr.from_terms(2, [(1.0, (1, 0)), (2.0, (0, 1)), (3.0, (1, 0)), (0.0, (2, 2))])
    assert p.terms == ((2.0, (0, 1)), (4.0, (1, 0)))  # graded lex, merged, zero dropped


def test_bad_terms_rejected():
    with pytest.raises(SpecError):
        PolyExpr.from_terms(2, [(1.0, (1, 0, 0))])
    with pytest.raises(SpecError):
        PolyExpr.from_terms(2, [(1.0, (-1, 0))])


def test_diff_monomial_rule():
    p = PolyExpr.from_terms(2, [(1.0, (2, 0))])
    assert p.diff(0).terms == ((2.0, (1, 0)),)
    assert p.diff(1).terms == ()


# ---------------------------------------------------------------------------
# chart evaluation examples


def test_lower_chart_values(lower_chart):
    assert lower_chart.eval(np.array([0.0, 1.0, 0.0, 0.0])) == -1.0
    assert lower_chart.eval(np.zeros(4)) == 0.0
    assert lower_chart.eval(np.array([0.5, 0.0, 0.0, 0.0])) == pytest.approx(1.0625, abs=0)


def test_grad_examples(lower_chart):
    assert np.allclose(lower_chart.grad(np.zeros(4)), 0.0)
    assert np.allclose(lower_chart.grad(np.array([0.0, 1.0, 0.0, 0.0])), 0.0)
    p = Chart(PolyExpr.from_terms(4, [(1.0, (2, 0, 0, 0))]), ((-2, 2),) * 4)
    assert np.allclose(p.grad(np.array([1.0, 0, 0, 0])), [2.0, 0, 0, 0])


def test_hessian_examples(lower_chart):
    H = lower_chart.hessian(np.zeros(4))
    assert np.allclose(H, np.diag([8.0, -4.0, 2.0, 2.0]))
    linear = Chart(PolyExpr.from_terms(4, [(3.0, (1, 0, 0, 0))]), ((-1, 1),) * 4)
    assert np.allclose(linear.hessian(np.zeros(4)), 0.0)


def test_domain_error(lower_chart):
    with pytest.raises(DomainError):
        lower_chart.eval(np.array([5.0, 0.0, 0.0, 0.0]))


def _fd_grad(chart, p, h=1e-4):
    g = np.zeros(len(p))
    for i in range(len(p)):
        e = np.zeros(len(p))
        e[i] = h
        g[i] = (chart.phi.evaluate(p + e) - chart.phi.evaluate(p - e)) / (2 * h)
    return g


def _fd_hessian(chart, p, h=1e-4):
    d = len(p)
    H = np.zeros((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        H[:, i] = (chart.grad(p + e) - chart.grad(p - e)) / (2 * h)
    return 0.5 * (H + H.T)


@pytest.mark.parametrize("point", [
    (0.1, -0.3, 0.7, 0.2),
    (0.9, 0.9, -0.9, 0.4),
    (-0.5, 0.25, 0.0, -1.0),
])
def test_grad_hessian_match_finite_differences(lower_chart, point):
    p = np.array(point)
    g = lower_chart.grad(p)
    gf = _fd_grad(lower_chart, p)
    assert np.linalg.norm(g - gf) <= 1e-6 * max(1.0, np.linalg.norm(g))
    H = lower_chart.hessian(p)
    Hf = _fd_hessian(lower_chart, p)
    assert np.linalg.norm(H - Hf) <= 1e-6 * max(1.0, np.linalg.norm(H))


@settings(max_examples=50, deadline=None)
@given(
    coeffs=st.lists(st.floats(-4, 4).map(lambda v: round(v, 3)), min_size=1, max_size=6),
    exps=st.lists(st.tuples(*[st.integers(0, 3)] * 4), min_size=1, max_size=6),
    point=st.tuples(*[st.floats(-1, 1).map(lambda v: round(v, 3))] * 4),
)
def test_grad_matches_fd_random_polys(coeffs, exps, point):
    n = min(len(coeffs), len(exps))
    poly = PolyExpr.from_terms(4, list(zip(coeffs[:n], exps[:n])))
    chart = Chart(poly, ((-2.0, 2.0),) * 4)
    p = np.array(point)
    g = chart.grad(p)
    gf = _fd_grad(chart, p)
    scale = max(1.0, float(np.linalg.norm(g)))
    assert np.linalg.norm(g - gf) <= 1e-5 * scale


def test_eval_grid_matches_pointwise(lower_chart):
    axes = [np.linspace(-1.2, 1.2, 7)] * 4
    grid = lower_chart.phi.evaluate_grid(axes)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    flat = lower_chart.phi.evaluate_many(mesh)
    # different summation orders, so agreement is to round-off, not bitwise
    assert np.allclose(grid.ravel(), flat, rtol=1e-12, atol=1e-12)
    assert np.array_equal(grid, lower_chart.phi.evaluate_grid(axes))  # per-path determinism


def test_determinism_bit_identical(lower_chart):
    p = np.array([0.3, -0.7, 0.11, 0.97])
    assert lower_chart.eval(p) == lower_chart.eval(p)
    assert np.array_equal(lower_chart.grad(p), lower_chart.grad(p))
    assert np.array_equal(lower_chart.hessian(p), lower_chart.hessian(p))


# ---------------------------------------------------------------------------
# tangent frames


def test_tangent_frame_at_complex_point(lower_chart):
    F = lower_chart.tangent_frame(np.zeros(4))
    assert F.shape == (4, 6)
    assert np.array_equal(F[:, :4], np.eye(4))
    assert np.allclose(F[:, 4:], 0.0)


def test_tangent_frame_along_axis(lower_chart):
    t = 0.12
    F = lower_chart.tangent_frame(np.array([t, 0.0, 0.0, 0.0]))
    assert F[0, 4] == pytest.approx(8 * t + 4 * t**3, rel=1e-12)
    assert np.allclose(F[1:, 4], [0, 0, 0])


def test_tangent_frame_gram_rank_one(lower_chart):
    p = np.array([0.3, 0.5, -0.2, 0.4])
    F = lower_chart.tangent_frame(p)
    g = lower_chart.grad(p)
    gram = F @ F.T
    assert np.allclose(gram, np.eye(4) + np.outer(g, g))


# ---------------------------------------------------------------------------
# piecewise structure and spec files


def test_horned_interface_values(horned):
    lo, hi = horned.charts[0].validity, horned.charts[1].validity
    assert lo[1] == hi[0] == 0.0  # siblings meet only at the interface value
    assert horned.value_range() == (-1.0, 1.0)
    assert horned.charts_valid_at(0.0) == [0, 1]
    assert horned.charts_valid_at(-0.5) == [0]
    assert horned.charts_valid_at(0.5) == [1]


def test_spec_roundtrip_json(tmp_path, horned):
    path = tmp_path / "horned.json"
    save_manifold_spec(horned, path)
    back = load_manifold_spec(path)
    assert back.n == horned.n
    assert back.expected_chi == horned.expected_chi
    for a, b in zip(back.charts, horned.charts):
        assert a.phi.terms == b.phi.terms
        assert a.domain == b.domain
        assert a.validity == b.validity


def test_spec_roundtrip_dict(quadric):
    data = manifold_spec_to_dict(quadric)
    back = manifold_spec_from_dict(data)
    assert back.charts[0].phi.terms == quadric.charts[0].phi.terms


def test_spec_toml(tmp_path):
    toml_text = """
n = 3
graph_model = "real_graph"
expected_chi = 2
[[charts]]
terms = [[1.0, [2, 0, 0, 0]], [1.0, [0, 2, 0, 0]], [1.0, [0, 0, 2, 0]], [1.0, [0, 0, 0, 2]]]
domain = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]
validity = [0.0, 1.0]
"""
    path = tmp_path / "spec.toml"
    path.write_text(toml_text)
    spec = load_manifold_spec(path)
    assert spec.n == 3 and len(spec.charts) == 1
    assert spec.charts[0].eval(np.array([0.5, 0, 0, 0])) == 0.25


def test_spec_invalid(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SpecError):
        load_manifold_spec(path)
    with pytest.raises(SpecError):
        manifold_spec_from_dict({"n": 2, "charts": []})


def test_spec_validation_errors():
    phi = PolyExpr.from_terms(2, [(1.0, (2, 0))])
    with pytest.raises(SpecError):
        ManifoldSpec(n=3, charts=(Chart(phi, ((-1, 1),) * 2),))  # wrong variable count
    with pytest.raises(SpecError):
        Chart(phi, ((-1, -1), (0, 1)))  # degenerate box


# ---------------------------------------------------------------------------
# interface blend (regularization helper, not used by the analyses)


def test_blend_matches_charts_outside_band(horned):
    lower, upper = horned.charts
    p_low = np.array([0.0, 0.9, 0.0, 0.0])  # phi_lower well below -eps
    assert blended_graph_value(lower, upper, p_low) == lower.eval(p_low)
    p_high = np.array([0.7, 0.0, 0.0, 0.0])  # phi_lower well above +eps
    assert blended_graph_value(lower, upper, p_high) == upper.eval(p_high)


def test_blend_is_continuous_across_band(horned):
    lower, upper = horned.charts
    eps = 0.05
    # walk along the x1 axis where phi_lower = x^4 + 4x^2 is increasing
    xs = np.linspace(0.0, 0.25, 400)
    vals = np.array([blended_graph_value(lower, upper, np.array([x, 0, 0, 0]), eps) for x in xs])
    jumps = np.abs(np.diff(vals))
    assert jumps.max() < 0.05  # no discontinuity at the band edges


def test_smoothstep_endpoints():
    assert quintic_smoothstep(0.0) == 0.0
    assert quintic_smoothstep(1.0) == 1.0
    h = 1e-6
    assert abs(quintic_smoothstep(h) - 0.0) < 1e-11  # flat start
    assert abs(quintic_smoothstep(1.0 - h) - 1.0) < 1e-11  # flat end
