"""Nagata-dimension machinery: multiplicity, cover splitting, hierarchies, transport."""

from .multiplicity import (
    NagataCheck,
    SetFamily,
    s_multiplicity,
    separated,
    set_distance,
    threshold_graph,
    verify_nagata_cover,
)
from .split import PreconditionError, SplitResult, iterated_neighbourhoods, split_cover
from .brute import nagata_bruteforce
from .hierarchy import (
    HierCovering,
    HierarchyBuildError,
    HierReport,
    build_hierarchical,
    level_window,
    verify_hierarchical,
)
from .transport import (
    TransportConstants,
    TransportResult,
    WindowError,
    transport_constants,
    transport_cover_nagata,
)
