"""s-multiplicity of set families and Nagata-cover verification."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from ..qspace import FiniteQSpace, diameter

Family = Sequence[frozenset[int]]


@dataclass(frozen=True)
class SetFamily:
    """Finite family of point sets, optionally tagged with scale, bound, color and level."""

    sets: tuple[frozenset[int], ...]
    s: Fraction | None = None
    c: Fraction | None = None
    color: int | None = None
    level: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(frozenset(b) for b in self.sets))
        if any(not b for b in self.sets):
            raise ValueError("family members must be non-empty")

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def union(self) -> frozenset[int]:
        return frozenset().union(*self.sets)


def check_members(space: FiniteQSpace, sets: Iterable[frozenset[int]]) -> None:
    for b in sets:
        if not b:
            raise ValueError("family members must be non-empty")
        if space.infinity in b:
            raise ValueError("family members must not contain the point at infinity")


def threshold_graph(space: FiniteQSpace, s, nodes: Iterable[int] | None = None) -> nx.Graph:
    """Graph on ordinary points with an edge whenever ``d(x,y) <= s``."""
    nodes = list(space.ordinary if nodes is None else nodes)
    G = nx.Graph()
    G.add_nodes_from(nodes)
    dist = space.dist
    G.add_edges_from((x, y) for x, y in combinations(nodes, 2) if dist[x][y] <= s)
    return G


def s_multiplicity(space: FiniteQSpace, sets: Family, s, with_witness: bool = False):
    """Largest number of members met by one set of diameter ``<= s``.

    A set ``U`` of diameter ``<= s`` meeting ``m`` members can be shrunk to one
    point per met member without increasing its diameter or losing a member,
    and such point sets are exactly the cliques of the threshold graph
    ``d <= s``. Maximal cliques therefore attain the maximum. Points outside
    every member never contribute, so the graph is restricted to the union.
    """
    sets = [frozenset(b) for b in sets]
    check_members(space, sets)
    covered = sorted(frozenset().union(*sets)) if sets else []
    if not covered:
        return (0, frozenset()) if with_witness else 0
    masks = [sum(1 << p for p in b) for b in sets]
    best, witness = 0, frozenset()
    for clique in nx.find_cliques(threshold_graph(space, s, covered)):
        cm = sum(1 << p for p in clique)
        k = sum(1 for b in masks if b & cm)
        if k > best:
            best, witness = k, frozenset(clique)
    return (best, witness) if with_witness else best


def set_distance(space: FiniteQSpace, A: Iterable[int], B: Iterable[int]):
    dist = space.dist
    return min(dist[a][b] for a in A for b in B)


def separated(space: FiniteQSpace, sets: Family, s) -> tuple[int, int] | None:
    """First pair of members closer than or at distance ``s``, or None.

    A family has s-multiplicity at most 1 exactly when its members are
    pairwise disjoint and more than ``s`` apart.
    """
    dist = space.dist
    sets = list(sets)
    for i, j in combinations(range(len(sets)), 2):
        if any(dist[a][b] <= s for a in sets[i] for b in sets[j]):
            return i, j
    return None


@dataclass
class NagataCheck:
    covers: bool
    uncovered: list[int]
    bounded: bool
    oversized: list[int]
    multiplicity: int
    witness: frozenset[int]
    m: int
    diameters: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.covers and self.bounded and self.multiplicity <= self.m

    def to_json(self, space: FiniteQSpace) -> dict:
        return {
            "ok": self.ok,
            "covers": self.covers,
            "uncovered": space.labels(self.uncovered),
            "bounded": self.bounded,
            "oversized_members": self.oversized,
            "multiplicity": self.multiplicity,
            "max_multiplicity": self.m,
            "witness": space.labels(self.witness),
        }


def verify_nagata_cover(space: FiniteQSpace, sets: Family, s, c, m: int,
                        region: Iterable[int] | None = None) -> NagataCheck:
    """Check that ``sets`` covers ``region`` (default: all ordinary points),
    every member has diameter ``<= c*s``, and the s-multiplicity is ``<= m``."""
    sets = [frozenset(b) for b in sets]
    target = set(space.ordinary if region is None else region)
    union = frozenset().union(*sets) if sets else frozenset()
    uncovered = sorted(target - union)
    bound = Fraction(c) * Fraction(s)
    diams = [diameter(space, b) for b in sets]
    oversized = [i for i, dm in enumerate(diams) if dm > bound]
    mult, wit = s_multiplicity(space, sets, s, with_witness=True)
    return NagataCheck(not uncovered, uncovered, not oversized, oversized, mult, wit, m, diams)
