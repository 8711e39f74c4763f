"""Periodic orbits in convex billiards and their conserved quantities."""

from ._backend import BACKEND
from .errors import (
    ClosureFailure,
    DegenerateChord,
    MissesTable,
    NearSingular,
    NoConvergence,
    NoIntersection,
    NonConvexTable,
    NotBracketed,
    NotClosed,
    OrderViolation,
    OutOfRange,
    PorismError,
    TangentRay,
    WrongPeriod,
)
from .geometry import (
    Ellipse,
    OrientedLine,
    Point2,
    SupportCurve,
    TrigPoly,
    curve_point,
    focal_distances,
    pedal_foot,
    support_eval,
)
from .billiard_map import (
    ChordData,
    VertexState,
    gen_partials,
    generating_function,
    jacobian_det,
    map_line,
    reflect_ellipse,
    reflect_generic,
)
from .poncelet import (
    BilliardPolygon,
    Caustic,
    JoachimsthalStat,
    PonceletFamily,
    axis_orbit,
    birkhoff_orbit,
    build_orbit,
    caustic_from_lambda,
    family_sweep,
    find_caustic,
    joachimsthal,
    rotation_number,
)
from .invariants import (
    SumIdentityResiduals,
    FocalProducts,
    InvariantReport,
    PedalStats,
    QuadRelations,
    QuantityRecord,
    check_angle_derivatives,
    check_quad_relations,
    check_action_sums,
    check_vertex_identity,
    sum_identities,
    family_report,
    focal_products,
    pedal_stats,
    product_cos_beta,
    report_checks,
    vanishing_pedal_sums,
)

__version__ = "0.1.0"
