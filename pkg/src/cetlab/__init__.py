"""Cut edge transfers on rooted and semi-directed phylogenetic networks.

The package validates level-1 networks, enumerates and applies CET, CET1,
CET+ and CET- moves, builds explicit move sequences to a standard form, and
explores small network spaces exhaustively.
"""

from .errors import (
    BadSpec,
    CapExceeded,
    CetError,
    IncompatibleInputs,
    InvalidMove,
    NoLevel1Partner,
    NoPath,
    NotLevel1,
    NotStandardShape,
    ParseError,
    PreconditionViolated,
    Unreachable,
    UnsupportedFeature,
    ValidationError,
)
from .explorer import (
    SpaceGraph,
    Tier,
    build_space_graph,
    components,
    connectivity_report,
    enumerate_tier,
    move_distance,
    shortest_path,
    verify_across_tiers,
    verify_metric_axioms,
)
from .io import (
    export_dot,
    format_move,
    parse_edge_list,
    parse_enewick,
    parse_move,
    serialize_edge_list,
    serialize_enewick,
)
from .moves import (
    Cet,
    CetMinus,
    CetPlus,
    MoveSequence,
    ParallelEffect,
    apply,
    apply_cet_minus,
    apply_cet_plus,
    apply_cet_rooted,
    apply_cet_semidirected,
    cet1_decompose,
    cet_parallel_effect,
    inverse_move,
    is_cet1,
    valid_cet_minus,
    valid_cet_plus,
    valid_cets_rooted,
    valid_cets_semidirected,
)
from .network import (
    LevelClass,
    RootedNetwork,
    SemiDirectedNetwork,
    canonical_code,
    count_invariants,
    cut_edges,
    deroot,
    isomorphic,
    level_class,
    rooted,
    rooted_partners,
    semidirected,
    underlying_cycles,
    validate_rooted,
    validate_semidirected,
)
from .standard_form import (
    build_standard_form,
    connect_rooted,
    connect_semidirected,
    to_standard_form,
    to_standard_shape,
)

__version__ = "0.1.0"
