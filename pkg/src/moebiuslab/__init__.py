"""Finite extended quasi-metric spaces, their cross-ratio structure, and
desk-scale Hausdorff and Nagata dimension computations."""

from .crossratio import (
    LogTriple,
    Perm,
    ProjTriple,
    check_axioms,
    corner_margin,
    crt,
    from_log,
    moebius_equivalent,
    phi,
    to_log,
)
from .qspace import (
    INF,
    FiniteQSpace,
    InvalidSpaceError,
    SpaceParseError,
    ball,
    diameter,
    extend_with_infinity,
    involute,
    line_space,
    normalize_dA,
    quasi_constant,
    rescale,
    validate,
)

__version__ = "0.1.0"
