"""leviflat: complex points, orbit censuses, and slice fillings of graph submanifolds."""

from .polychart import (
    Chart,
    DomainError,
    GraphModel,
    ManifoldSpec,
    PolyExpr,
    SpecError,
    blended_graph_value,
    load_manifold_spec,
    save_manifold_spec,
)
from .fixtures import FIXTURE_NAMES, fixture, resolve_spec
from .takagi import takagi
from .singular import (
    Classification,
    ComplexPoint,
    EulerReport,
    FlatnessResult,
    Jet2,
    NonSpecial,
    NormalForm,
    NotFlatError,
    PointClass,
    RealQuadratic,
    analyze_complex_points,
    classify,
    euler_check,
    find_complex_points,
    flat_normal_form,
    flatness_test,
    point_index,
    second_jet,
    special_reduction,
)
from .orbits import (
    LevelGrid,
    OrbitCensus,
    TransversalMap,
    build_grids,
    build_transversal_function,
    census,
    cone_components,
    level_components,
    normal_cone_components,
    singular_match,
)
from .filling import (
    BoundaryCheck,
    FillFamilyResult,
    SliceFill,
    boundary_check,
    fill_family,
    fill_slice,
)
from .glue import (
    GLUE_EXPRESSIONS,
    GlueGraph,
    GlueParseError,
    GlueStructureError,
    euler_characteristic,
    format_glue_expr,
    parse_glue_expr,
    validate,
)
from .report import default_levels, export_mesh_obj, report_to_json, run_analysis

__version__ = "0.1.0"
