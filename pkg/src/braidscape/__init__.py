from .arcs import (
    ArcCertificate,
    OrientedArc,
    arc_between,
    eta,
    is_allowable,
    min_allowable_k,
)
from .cell_complex import (
    Cell,
    CellClass,
    cell_census,
    classify_cell,
    critical_cells,
    enumerate_cells,
    is_blocked,
    is_order_disrespecting,
    morse_cycle,
    reduced_complex_dim,
)
from .clouds import (
    CloudDiagram,
    cloud_diagram,
    critical_cell_in_class,
    equivalent,
    least_upper_bound,
    leq,
    one_cell_factors,
)
from .cohomology import (
    BasisClass,
    Cochain,
    CohomologyRing,
    TensorElement,
    basis,
    betti_numbers,
    homology_oracle,
    multiply_basis,
    search_disjoint_critical_pair,
    tensor_multiply,
    zdcl_lower_bound,
    zero_divisor,
)
from .errors import (
    ArcSearchCapExceededError,
    BraidscapeError,
    CellCapExceededError,
    CellMembershipError,
    CertificateInconsistentError,
    ConfigurationParseError,
    DiagramMismatchError,
    InsufficientSubdivisionError,
    MissingCriticalCellError,
    PlannerError,
    TreeValidationError,
)
from .planner import (
    LIPSCHITZ_BOUND,
    Configuration,
    PlannedPath,
    canonical_path,
    continuity_holds,
    nudge_within_stratum,
    parse_configuration,
    plan_ordered,
    plan_unordered,
    random_configuration,
    validate_path,
)
from .settings import BraidscapeLimits
from .tc import ReasonCode, TcCertificate, decide_tc, tc_profile, verify_certificate
from .tree import (
    Point,
    Tree,
    TreeStats,
    VertexOrder,
    build_tree,
    is_sufficiently_subdivided,
    load_tree,
    order_vertices,
    parse_tree,
    stats,
    subdivide_for,
)

__all__ = [
    "ArcCertificate",
    "ArcSearchCapExceededError",
    "BasisClass",
    "BraidscapeError",
    "BraidscapeLimits",
    "Cell",
    "CellCapExceededError",
    "CellClass",
    "CellMembershipError",
    "CertificateInconsistentError",
    "CloudDiagram",
    "Cochain",
    "CohomologyRing",
    "Configuration",
    "ConfigurationParseError",
    "DiagramMismatchError",
    "InsufficientSubdivisionError",
    "LIPSCHITZ_BOUND",
    "MissingCriticalCellError",
    "OrientedArc",
    "PlannedPath",
    "PlannerError",
    "Point",
    "ReasonCode",
    "TcCertificate",
    "TensorElement",
    "Tree",
    "TreeStats",
    "TreeValidationError",
    "VertexOrder",
    "arc_between",
    "basis",
    "betti_numbers",
    "build_tree",
    "canonical_path",
    "cell_census",
    "classify_cell",
    "cloud_diagram",
    "continuity_holds",
    "critical_cell_in_class",
    "critical_cells",
    "decide_tc",
    "enumerate_cells",
    "equivalent",
    "eta",
    "homology_oracle",
    "is_allowable",
    "is_blocked",
    "is_order_disrespecting",
    "is_sufficiently_subdivided",
    "least_upper_bound",
    "leq",
    "load_tree",
    "min_allowable_k",
    "morse_cycle",
    "multiply_basis",
    "nudge_within_stratum",
    "one_cell_factors",
    "order_vertices",
    "parse_configuration",
    "parse_tree",
    "plan_ordered",
    "plan_unordered",
    "random_configuration",
    "reduced_complex_dim",
    "search_disjoint_critical_pair",
    "stats",
    "subdivide_for",
    "tc_profile",
    "tensor_multiply",
    "validate_path",
    "verify_certificate",
    "zdcl_lower_bound",
    "zero_divisor",
]
