"""Built-in manifold fixtures with integer-coefficient defining polynomials."""

from __future__ import annotations

from .polychart import Chart, GraphModel, ManifoldSpec, PolyExpr, SpecError

__all__ = ["FIXTURE_NAMES", "fixture", "resolve_spec"]


def _horned_sphere() -> ManifoldSpec:
    # Lower hemisphere with two inward horns: quartic double-well graph with a
    # saddle over the origin (graph value 0) and minima at (0, +-1, 0, 0)
    # (graph value -1).  Interior of the filling is the negative side.
    quartic = PolyExpr.from_terms(
        4,
        [
            (1, (4, 0, 0, 0)),
            (1, (0, 4, 0, 0)),
            (1, (0, 0, 4, 0)),
            (1, (0, 0, 0, 4)),
            (4, (2, 0, 0, 0)),
            (-2, (0, 2, 0, 0)),
            (1, (0, 0, 2, 0)),
            (1, (0, 0, 0, 2)),
        ],
    )
    # Upper cap closing the surface at graph value 1: paraboloid graph whose
    # 2-jet at the top complex point matches the quartic model's elliptic cap.
    cap = PolyExpr.from_terms(
        4,
        [
            (1, (0, 0, 0, 0)),
            (-0.5, (2, 0, 0, 0)),
            (-0.5, (0, 2, 0, 0)),
            (-0.5, (0, 0, 2, 0)),
            (-0.5, (0, 0, 0, 2)),
        ],
    )
    box = ((-1.6, 1.6),) * 4
    return ManifoldSpec(
        n=3,
        charts=(
            Chart(quartic, box, (-1.0, 0.0), name="lower"),
            Chart(cap, box, (0.0, 1.0), name="upper"),
        ),
        graph_model=GraphModel.REAL_GRAPH,
        expected_chi=2,
        name="horned_sphere",
    )


def _quadric_elliptic() -> ManifoldSpec:
    # w = sum z_j conj(z_j): positive definite quadric, one elliptic point.
    phi = PolyExpr.from_terms(
        4,
        [(1, (2, 0, 0, 0)), (1, (0, 2, 0, 0)), (1, (0, 0, 2, 0)), (1, (0, 0, 0, 2))],
    )
    box = ((-1.5, 1.5),) * 4
    # Validity capped at the largest level whose level set stays inside the box.
    return ManifoldSpec(
        n=3,
        charts=(Chart(phi, box, (0.0, 2.25), name="quadric"),),
        graph_model=GraphModel.REAL_GRAPH,
        name="quadric_elliptic",
    )


def _quadric_saddle() -> ManifoldSpec:
    # w = 3 x1^2 - y1^2 + x2^2 + y2^2: one special 1-hyperbolic point at 0.
    phi = PolyExpr.from_terms(
        4,
        [(3, (2, 0, 0, 0)), (-1, (0, 2, 0, 0)), (1, (0, 0, 2, 0)), (1, (0, 0, 0, 2))],
    )
    box = ((-1.5, 1.5),) * 4
    return ManifoldSpec(
        n=3,
        charts=(Chart(phi, box, (-2.0, 2.0), name="saddle"),),
        graph_model=GraphModel.REAL_GRAPH,
        name="quadric_saddle",
    )


_BUILDERS = {
    "horned_sphere": _horned_sphere,
    "quadric_elliptic": _quadric_elliptic,
    "quadric_saddle": _quadric_saddle,
}

FIXTURE_NAMES = tuple(sorted(_BUILDERS))


def fixture(name: str) -> ManifoldSpec:
    """Return a built-in fixture by name."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise SpecError(
            f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}"
        ) from None


def resolve_spec(name_or_path: str) -> ManifoldSpec:
    """Resolve a fixture name or a spec file path to a ManifoldSpec."""
    if name_or_path in _BUILDERS:
        return fixture(name_or_path)
    from .polychart import load_manifold_spec

    return load_manifold_spec(name_or_path)
