"""Finite extended quasi-metric spaces with exact rational distances.

Distances are :class:`fractions.Fraction` values or the singleton :data:`INF`.
A space may carry one distinguished point at infinity, at distance ``INF``
from every other point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "INF",
    "ExtRational",
    "FiniteQSpace",
    "SpaceParseError",
    "InvalidSpaceError",
    "Violation",
    "ValidationReport",
    "as_ext",
    "ext_div",
    "validate",
    "quasi_constant",
    "quasi_constant_witness",
    "rescale",
    "involute",
    "extend_with_infinity",
    "normalize_dA",
    "ball",
    "diameter",
    "line_space",
]


class _Infinity:
    """The extended value at the top of the order on non-negative rationals."""

    _instance: "_Infinity | None" = None

    def __new__(cls) -> "_Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_Infinity, ())

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __hash__(self) -> int:
        return hash(float("inf"))

    def __eq__(self, other) -> bool:
        return other is self

    def __ne__(self, other) -> bool:
        return other is not self

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __float__(self) -> float:
        return float("inf")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other is self or other > 0:
            return self
        raise ArithmeticError("INF * 0 is undefined")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if other is self:
            raise ArithmeticError("INF / INF is only defined through cross-ratio cancellation")
        if other < 0:
            raise ArithmeticError("negative divisor")
        return self

    def __rtruediv__(self, other):
        return Fraction(0)


INF = _Infinity()

ExtRational = Union[Fraction, _Infinity]


class SpaceParseError(ValueError):
    """Raised for structurally malformed space data (shape, sign, labels)."""


class InvalidSpaceError(ValueError):
    """Raised when well-formed data violates the quasi-metric axioms."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        first = report.violations[0]
        super().__init__(f"{first.rule} at {first.witness}: {first.detail}")


def as_ext(value) -> ExtRational:
    """Coerce ``value`` to an exact non-negative rational or INF.

    Accepts ``Fraction``, ``int``, strings like ``"3/2"`` or ``"inf"``, and the
    INF singleton. Floats are rejected since they cannot be compared exactly.
    """
    if value is INF:
        return INF
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "∞"):
            return INF
        try:
            q = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise SpaceParseError(f"not an exact rational: {value!r}") from exc
    elif isinstance(value, bool):
        raise SpaceParseError(f"not a distance: {value!r}")
    elif isinstance(value, Rational):
        q = Fraction(value)
    else:
        raise SpaceParseError(f"not an exact rational: {value!r}")
    if q < 0:
        raise SpaceParseError(f"negative distance: {value!r}")
    return q


def ext_div(num: ExtRational, den: ExtRational) -> ExtRational:
    """``num / den`` with the convention ``λ/0 = INF`` for ``λ > 0``."""
    if den == 0:
        if num == 0:
            raise ArithmeticError("0/0 is undefined")
        return INF
    return num / den


@dataclass(frozen=True)
class FiniteQSpace:
    """A labeled finite point set with an exact symmetric distance matrix.

    ``infinity`` is the index of the point at infinity, if any. ``exact`` is
    False for spaces whose distances were rounded from irrational values
    (see :func:`moebiuslab.generators.gen_snowflake`).
    """

    points: tuple[str, ...]
    dist: tuple[tuple[ExtRational, ...], ...]
    infinity: int | None = None
    exact: bool = True
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        points = tuple(self.points)
        dist = tuple(tuple(row) for row in self.dist)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})
        if len(self._index) != len(points):
            raise SpaceParseError("point labels must be distinct")
        if len(dist) != len(points) or any(len(row) != len(points) for row in dist):
            raise SpaceParseError("distance matrix must be square and match the labels")

    @classmethod
    def from_matrix(cls, points: Sequence[str], dist, infinity: str | int | None = None,
                    exact: bool = True) -> "FiniteQSpace":
        """Build a space from raw data, raising if any axiom is violated."""
        report = validate(points, dist, infinity)
        if not report.ok:
            raise InvalidSpaceError(report)
        matrix = [[as_ext(v) for v in row] for row in dist]
        inf_idx = _resolve_infinity(points, infinity)
        return cls(tuple(points), matrix, inf_idx, exact)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, p: str | int) -> int:
        if isinstance(p, (int, np.integer)) and not isinstance(p, bool):
            if not 0 <= p < self.n:
                raise KeyError(f"no point with index {p}")
            return int(p)
        try:
            return self._index[p]
        except KeyError:
            raise KeyError(f"no point labeled {p!r}") from None

    def labels(self, indices: Iterable[int]) -> list[str]:
        return [self.points[i] for i in sorted(indices)]

    @property
    def ordinary(self) -> tuple[int, ...]:
        """Indices of all points other than the point at infinity."""
        return tuple(i for i in range(self.n) if i != self.infinity)

    @property
    def infinity_label(self) -> str | None:
        return None if self.infinity is None else self.points[self.infinity]

    def d(self, x: str | int, y: str | int) -> ExtRational:
        return self.dist[self.index(x)][self.index(y)]

    @cached_property
    def K(self) -> Fraction:
        """Minimal quasi-constant, computed once."""
        return quasi_constant_witness(self)[0]

    def min_positive_distance(self) -> Fraction | None:
        ords = self.ordinary
        vals = [self.dist[i][j] for i, j in combinations(ords, 2)]
        return min(vals) if vals else None

    def finite_diameter(self) -> Fraction:
        """Diameter of the ordinary points (always finite)."""
        return diameter(self, self.ordinary)

    def float_matrix(self, indices: Sequence[int] | None = None) -> np.ndarray:
        idx = self.ordinary if indices is None else indices
        return np.array([[float(self.dist[i][j]) for j in idx] for i in idx], dtype=float)

    def subspace(self, indices: Iterable[int]) -> "FiniteQSpace":
        """Restriction to ``indices`` (kept in their original order)."""
        keep = sorted(set(indices))
        inf = keep.index(self.infinity) if self.infinity in keep else None
        return FiniteQSpace(
            tuple(self.points[i] for i in keep),
            [[self.dist[i][j] for j in keep] for i in keep],
            inf,
            self.exact,
        )

    def relabel(self, order: Sequence[int]) -> "FiniteQSpace":
        """Same space with points listed in ``order`` (a permutation of indices)."""
        inf = list(order).index(self.infinity) if self.infinity is not None else None
        return FiniteQSpace(
            tuple(self.points[i] for i in order),
            [[self.dist[i][j] for j in order] for i in order],
            inf,
            self.exact,
        )


@dataclass(frozen=True)
class Violation:
    rule: str
    witness: tuple[str, ...]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"rule": v.rule, "witness": list(v.witness), "detail": v.detail}
                for v in self.violations
            ],
        }


def _resolve_infinity(points: Sequence[str], infinity) -> int | None:
    if infinity is None:
        return None
    if isinstance(infinity, int) and not isinstance(infinity, bool):
        if not 0 <= infinity < len(points):
            raise SpaceParseError(f"infinity index {infinity} out of range")
        return infinity
    try:
        return list(points).index(infinity)
    except ValueError:
        raise SpaceParseError(f"infinity point {infinity!r} is not a listed point") from None


def validate(points: Sequence[str], dist, infinity: str | int | None = None) -> ValidationReport:
    """Check raw space data against the extended quasi-metric axioms.

    Structural problems (non-square matrix, negative or non-rational entries,
    duplicate labels, unknown infinity label) raise :class:`SpaceParseError`.
    Semantic problems are collected, each with a witness tuple of labels.
    """
    points = list(points)
    if len(set(points)) != len(points):
        raise SpaceParseError("point labels must be distinct")
    if not points:
        raise SpaceParseError("a space needs at least one point")
    try:
        rows = [list(row) for row in dist]
    except TypeError as exc:
        raise SpaceParseError("distance matrix must be a list of rows") from exc
    if len(rows) != len(points) or any(len(r) != len(points) for r in rows):
        raise SpaceParseError("distance matrix must be square and match the labels")
    m = [[as_ext(v) for v in row] for row in rows]
    omega = _resolve_infinity(points, infinity)
    n = len(points)
    out: list[Violation] = []

    for i in range(n):
        if m[i][i] != 0:
            out.append(Violation("zero-diagonal", (points[i],), f"d(x,x) = {m[i][i]}"))
    for i, j in combinations(range(n), 2):
        pi, pj = points[i], points[j]
        if m[i][j] != m[j][i]:
            out.append(Violation("symmetry", (pi, pj), f"{m[i][j]} != {m[j][i]}"))
        for a, b in ((i, j), (j, i)):
            if m[a][b] == 0:
                out.append(Violation("definiteness", (points[a], points[b]), "zero distance between distinct points"))
    if omega is not None:
        for j in range(n):
            if j != omega and (m[omega][j] is not INF or m[j][omega] is not INF):
                out.append(Violation("infinity-row", (points[omega], points[j]),
                                     "the point at infinity must be at distance inf from every other point"))
    for i, j in combinations(range(n), 2):
        if omega in (i, j):
            continue
        if m[i][j] is INF or m[j][i] is INF:
            detail = ("infinite distance between ordinary points" if omega is not None
                      else "infinite distance but no point at infinity declared")
            out.append(Violation("unique-infinity", (points[i], points[j]), detail))
    return ValidationReport(tuple(out))


def _pair_min_max(space: FiniteQSpace, x: int, y: int, ords: Sequence[int]) -> tuple[Fraction, int]:
    dist = space.dist
    best, arg = None, None
    for z in ords:
        if z == x or z == y:
            continue
        v = max(dist[x][z], dist[z][y])
        if best is None or v < best:
            best, arg = v, z
    return best, arg


def quasi_constant_witness(space: FiniteQSpace) -> tuple[Fraction, tuple[str, str, str] | None]:
    """Minimal ``K >= 1`` with ``d(x,y) <= K max(d(x,z), d(z,y))`` and a witness.

    Only triples of ordinary points are considered. The witness ``(x, y, z)``
    attains ``K``; it is None when ``K = 1`` comes from the floor.
    For large spaces a float pass locates the candidate pairs, which are then
    re-evaluated exactly, so the result is exact either way.
    """
    ords = space.ordinary
    if len(ords) < 3:
        return Fraction(1), None
    if len(ords) <= 40:
        pairs = combinations(ords, 2)
    else:
        D = space.float_matrix(ords)
        M = np.empty_like(D)
        for a in range(len(ords)):
            M[a] = np.min(np.maximum(D[a][:, None], D), axis=0)
        np.fill_diagonal(M, 1.0)
        R = D / M
        top = R.max()
        cand = np.argwhere(np.triu(R >= top * (1 - 1e-9), 1))
        pairs = [(ords[a], ords[b]) for a, b in cand]
    K, witness = Fraction(1), None
    for x, y in pairs:
        m, z = _pair_min_max(space, x, y, ords)
        ratio = space.dist[x][y] / m
        if ratio > K:
            K, witness = ratio, (space.points[x], space.points[y], space.points[z])
    return K, witness


def quasi_constant(space: FiniteQSpace) -> Fraction:
    """Minimal quasi-constant of ``space`` (exact; 1 for fewer than 3 ordinary points)."""
    return space.K


def _carry_K(src: FiniteQSpace, dst: FiniteQSpace) -> FiniteQSpace:
    if "K" in src.__dict__:
        dst.__dict__["K"] = src.__dict__["K"]
    return dst


def rescale(space: FiniteQSpace, lam) -> FiniteQSpace:
    """Multiply every finite distance by ``lam > 0``."""
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError(f"rescaling factor must be positive, got {lam}")
    rows = [[v if v is INF else v * lam for v in row] for row in space.dist]
    return _carry_K(space, FiniteQSpace(space.points, rows, space.infinity, space.exact))


def involute(space: FiniteQSpace, o: str | int) -> FiniteQSpace:
    """Involution of the distance at ``o``; ``o`` becomes the point at infinity.

    ``d_o(x,y) = d(x,y) / (d(x,o) d(o,y))`` for ordinary ``x != y``, and
    ``d_o(ω,y) = 1/d(o,y)`` for the old point at infinity ``ω``, with
    ``λ/0 = INF``.
    """
    oi = space.index(o)
    if oi == space.infinity:
        raise ValueError("cannot involute at the point at infinity")
    dist, w, n = space.dist, space.infinity, space.n
    rows = [[Fraction(0)] * n for _ in range(n)]
    for x in range(n):
        for y in range(x + 1, n):
            if x == w:
                v = ext_div(Fraction(1), dist[oi][y])
            elif y == w:
                v = ext_div(Fraction(1), dist[x][oi])
            else:
                v = ext_div(dist[x][y], dist[x][oi] * dist[oi][y])
            rows[x][y] = rows[y][x] = v
    return FiniteQSpace(space.points, rows, oi, space.exact)


def extend_with_infinity(space: FiniteQSpace, label: str = "inf") -> FiniteQSpace:
    """Add a new point at infinity labeled ``label``."""
    if space.infinity is not None:
        raise ValueError("space already has a point at infinity")
    if label in space.points:
        raise ValueError(f"label {label!r} already used")
    n = space.n
    rows = [list(row) + [INF] for row in space.dist]
    rows.append([INF] * n + [Fraction(0)])
    return _carry_K(space, FiniteQSpace(space.points + (label,), rows, n, space.exact))


def normalize_dA(space: FiniteQSpace, A: Sequence[str | int]) -> FiniteQSpace:
    """The representative ``d_A`` for a triple ``A = (ω, α, β)`` of distinct points.

    ``d_A(x,y) = d(x,y)/(d(x,ω)d(ω,y)) · d(α,ω)d(ω,β)/d(α,β)`` with infinite
    distances cancelling; ``ω`` is the point at infinity of the result and
    ``d_A(α,β) = 1``.
    """
    w, a, b = (space.index(p) for p in A)
    if len({w, a, b}) != 3:
        raise ValueError("normalization triple must consist of distinct points")
    base = space if w == space.infinity else involute(space, w)
    return rescale(base, 1 / base.dist[a][b])


def ball(space: FiniteQSpace, x: str | int, r) -> frozenset[int]:
    """Closed ball ``{y : d(x,y) <= r}`` as a set of indices."""
    xi = space.index(x)
    if xi == space.infinity:
        raise ValueError("balls are centred at ordinary points")
    r = as_ext(r)
    row = space.dist[xi]
    return frozenset(y for y in range(space.n) if row[y] <= r)


def diameter(space: FiniteQSpace, subset: Iterable[int]) -> ExtRational:
    """Largest pairwise distance in ``subset``; 0 for empty sets and singletons."""
    pts = sorted({space.index(p) for p in subset})
    if len(pts) < 2:
        return Fraction(0)
    if space.infinity in pts:
        return INF
    dist = space.dist
    return max(dist[i][j] for i, j in combinations(pts, 2))


def line_space(values: Iterable, labels: Sequence[str] | None = None) -> FiniteQSpace:
    """Points on the real line with Euclidean distances, labeled by their value."""
    vals = [Fraction(v) for v in values]
    names = list(labels) if labels is not None else [str(v) for v in vals]
    rows = [[abs(u - v) for v in vals] for u in vals]
    return FiniteQSpace.from_matrix(names, rows)
