"""Hierarchical colored coverings of a finite quasi-metric space.

A hierarchy assigns to every level ``j`` of a finite window ``n+1`` colored
families ``B^j_0 .. B^j_n`` of subsets of a ground set ``Y`` with

(i)   each ``B^j_k`` is ``c r^j``-bounded with ``r^j``-multiplicity <= 1,
(ii)  every closed ball ``B(x, r^j)`` lies in some member of ``B^j``,
(iii) for every color some member (at some level) contains ``Y``,
(iv)  for ``B`` in ``B^i_k`` and ``C`` in ``B^j_k`` with ``i < j``, either
      ``B ⊂ C`` or ``d(B, C) > r^i``.

Outside the window every property is vacuous on a finite space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ..qspace import FiniteQSpace, diameter
from .multiplicity import s_multiplicity
from .split import PreconditionError, neighbourhood_masks, split_cover


class HierarchyBuildError(RuntimeError):
    def __init__(self, message: str, suggested_r: Fraction | None = None):
        super().__init__(message)
        self.suggested_r = suggested_r


def floor_log(x: Fraction, r: Fraction) -> int:
    """Largest ``j`` with ``r**j <= x``."""
    j = 0
    if x >= 1:
        while r ** (j + 1) <= x:
            j += 1
    else:
        while r ** j > x:
            j -= 1
    return j


def ceil_log(x: Fraction, r: Fraction) -> int:
    """Smallest ``j`` with ``r**j >= x``."""
    j = floor_log(x, r)
    return j if r ** j == x else j + 1


def level_window(space: FiniteQSpace, r, ground: Sequence[int]) -> tuple[int, int]:
    r = Fraction(r)
    if len(ground) < 2:
        return 0, 0
    sub = space.subspace(ground)
    return floor_log(sub.min_positive_distance(), r) - 1, ceil_log(sub.finite_diameter(), r) + 1


@dataclass
class HierCovering:
    """Colored families per level; ``levels[j][k]`` lists the members of ``B^j_k``."""

    r: Fraction
    n: int
    c: Fraction
    ground: tuple[int, ...]
    levels: dict[int, list[list[frozenset[int]]]]
    K: Fraction = Fraction(1)
    notes: list[str] = field(default_factory=list)

    @property
    def window(self) -> tuple[int, int]:
        return min(self.levels), max(self.levels)

    def members(self, j: int) -> list[tuple[int, int, frozenset[int]]]:
        """``(color, index, set)`` for every member of ``B^j``."""
        return [(k, i, b) for k, fam in enumerate(self.levels[j]) for i, b in enumerate(fam)]

    def to_json(self, space: FiniteQSpace) -> dict:
        return {
            "r": str(self.r), "n": self.n, "c": str(self.c),
            "window": list(self.window),
            "levels": {str(j): [[space.labels(b) for b in fam] for fam in fams]
                       for j, fams in sorted(self.levels.items())},
        }


def _mask(b: Iterable[int]) -> int:
    return sum(1 << p for p in b)


def _unmask(m: int) -> frozenset[int]:
    out, p = [], 0
    while m:
        if m & 1:
            out.append(p)
        m >>= 1
        p += 1
    return frozenset(out)


def _grow(mask: int, nb: list[int]) -> int:
    grown, rest = mask, mask
    while rest:
        low = rest & -rest
        grown |= nb[low.bit_length() - 1]
        rest ^= low
    return grown


def _net_partition(sub: FiniteQSpace, radius: Fraction) -> list[frozenset[int]]:
    """Voronoi cells of a greedy ``radius``-separated net (ties to the lowest index)."""
    dist = sub.dist
    centers: list[int] = []
    for p in range(sub.n):
        if all(dist[p][q] > radius for q in centers):
            centers.append(p)
    cells: dict[int, set[int]] = {q: set() for q in centers}
    for p in range(sub.n):
        best = min(centers, key=lambda q: (dist[p][q], q))
        cells[best].add(p)
    return [frozenset(v) for v in cells.values()]


def _components(sub: FiniteQSpace, sigma: Fraction) -> list[frozenset[int]]:
    nb = neighbourhood_masks(sub, sigma)
    left, out = (1 << sub.n) - 1, []
    while left:
        comp = left & -left
        while True:
            nxt = _grow(comp, nb)
            if nxt == comp:
                break
            comp = nxt
        out.append(_unmask(comp))
        left &= ~comp
    return out


def base_cover(sub: FiniteQSpace, sigma: Fraction, n: int) -> list[frozenset[int]] | None:
    """A partition with ``sigma``-multiplicity <= n+1 and the smallest diameter found.

    Candidates are the components of the threshold graph ``d <= sigma``
    (always multiplicity 1) and Voronoi partitions of greedy nets at radii
    ``sigma``, ``2 sigma``, ``4 sigma``, ``8 sigma``.
    """
    best, best_diam = None, None
    cands = [_components(sub, sigma)] + [_net_partition(sub, sigma * m) for m in (1, 2, 4, 8)]
    for cand in cands:
        dm = max(diameter(sub, b) for b in cand)
        if best_diam is not None and dm >= best_diam:
            continue
        if s_multiplicity(sub, cand, sigma) <= n + 1:
            best, best_diam = cand, dm
    return best


def _level_families(sub: FiniteQSpace, t: Fraction, n: int) -> list[list[int]]:
    K = sub.K
    s_split = K ** 4 * t
    sigma = K ** (2 * n) * s_split
    base = base_cover(sub, sigma, n)
    if base is None:
        raise HierarchyBuildError(f"no partition with {sigma}-multiplicity <= {n + 1}")
    c0 = max(Fraction(1), max(diameter(sub, b) for b in base) / sigma)
    try:
        res = split_cover(sub, base, s_split, n, c0)
    except PreconditionError as exc:  # pragma: no cover - base_cover guarantees the precondition
        raise HierarchyBuildError(str(exc)) from exc
    if not res.ok:
        raise HierarchyBuildError(f"split at scale {s_split} failed its postconditions")
    nb = neighbourhood_masks(sub, t)
    return [[_grow(_mask(b), nb) for b in fam] for fam in res.families]


def _merge_level(fam: list[int], nb: list[int]) -> tuple[list[int], bool]:
    """Union members that are within distance ``t`` of each other until separated."""
    changed = False
    fam = list(dict.fromkeys(fam))
    i = 0
    while i < len(fam):
        reach = _grow(fam[i], nb)
        j = i + 1
        merged = False
        while j < len(fam):
            if reach & fam[j]:
                fam[i] |= fam.pop(j)
                reach = _grow(fam[i], nb)
                merged = changed = True
            else:
                j += 1
        if not merged:
            i += 1
    return fam, changed


def build_hierarchical(space: FiniteQSpace, r, n: int, c, exclude: Iterable[str | int] = ()) -> HierCovering:
    """Build a hierarchy on the ordinary points of ``space`` minus ``exclude``.

    Per level ``j`` (scale ``t = r^j``) a partition with ``K^{2n+4} t``-multiplicity
    at most ``n+1`` is split into ``n+1`` families at scale ``K^4 t``, and
    every member is enlarged to the union of its ``t``-balls, giving (ii).
    The top level holds the whole ground set in every color, giving (iii).
    Members are then merged to a fixed point: within a level when they come
    within ``r^j`` of each other, and across levels (absorbing ``B`` into
    ``C``) whenever (iv) fails. Merging only grows sets, so it terminates
    and preserves (ii)-(iii). If a merged member exceeds the ``c r^j`` bound
    of (i) the build fails and suggests a larger ``r``.
    """
    r, c = Fraction(r), Fraction(c)
    if r <= 1:
        raise ValueError("r must exceed 1")
    excl = {space.index(p) for p in exclude}
    ground = tuple(p for p in space.ordinary if p not in excl)
    if not ground:
        raise ValueError("empty ground set")
    sub = space.subspace(ground)
    # subspace keeps the original order, so sub index i is ground[i]
    lo, hi = level_window(space, r, ground)
    full = (1 << len(ground)) - 1
    raw: dict[int, list[list[int]]] = {}
    for j in range(lo, hi + 1):
        if j == hi:
            raw[j] = [[full] for _ in range(n + 1)]
        else:
            raw[j] = _level_families(sub, r ** j, n)
    nbs = {j: neighbourhood_masks(sub, r ** j) for j in raw}

    changed = True
    while changed:
        changed = False
        for j in raw:
            for k in range(n + 1):
                raw[j][k], ch = _merge_level(raw[j][k], nbs[j])
                changed |= ch
        levels = sorted(raw)
        for k in range(n + 1):
            for a, i in enumerate(levels):
                for j in levels[a + 1:]:
                    for bi, B in enumerate(raw[i][k]):
                        reach = _grow(B, nbs[i])
                        for ci, C in enumerate(raw[j][k]):
                            if B & ~C and reach & C:
                                raw[j][k][ci] = C | B
                                changed = True

    levels_out = {j: [[frozenset(ground[p] for p in _unmask(m)) for m in fam] for fam in fams]
                  for j, fams in raw.items()}
    H = HierCovering(r, n, c, ground, levels_out, K=sub.K)
    for j, fams in levels_out.items():
        for fam in fams:
            for b in fam:
                if diameter(space, b) > c * r ** j:
                    raise HierarchyBuildError(
                        f"level {j}: member of diameter {diameter(space, b)} exceeds c*r^j = {c * r ** j}",
                        suggested_r=Fraction(2) ** (floor_log(r, Fraction(2)) + 1))
    return H


@dataclass
class HierReport:
    results: dict[str, tuple[bool, object]]

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.results.values())

    def to_json(self, space: FiniteQSpace) -> dict:
        def show(w):
            if w is None:
                return None
            return [space.labels(x) if isinstance(x, frozenset) else x for x in w]
        return {"ok": self.ok,
                "properties": {k: {"ok": ok, "witness": show(w)} for k, (ok, w) in self.results.items()}}


def verify_hierarchical(space: FiniteQSpace, H: HierCovering) -> HierReport:
    """Check properties (i)-(iv) literally over the window of ``H``.

    Witnesses: (i) ``(j, k, member)``; (ii) ``(j, x)``; (iii) ``(k,)``;
    (iv) ``(B, C, x, y, i)`` with ``d(x,y) <= r^i``.
    """
    r, c = H.r, H.c
    Y = frozenset(H.ground)
    dist = space.dist
    res: dict[str, tuple[bool, object]] = {}

    wit = None
    for j in sorted(H.levels):
        t = r ** j
        covered = frozenset()
        for k, fam in enumerate(H.levels[j]):
            for b in fam:
                covered |= b
                if not b <= Y or diameter(space, b) > c * t:
                    wit = wit or (j, k, b)
            for a in range(len(fam)):
                for b in range(a + 1, len(fam)):
                    if any(dist[x][y] <= t for x in fam[a] for y in fam[b]):
                        wit = wit or (j, k, fam[a] | fam[b])
        if covered != Y:
            wit = wit or (j, -1, Y - covered)
    res["i"] = (wit is None, wit)

    wit = None
    for j in sorted(H.levels):
        t = r ** j
        mem = [b for fam in H.levels[j] for b in fam]
        for x in H.ground:
            bl = frozenset(y for y in H.ground if dist[x][y] <= t)
            if not any(bl <= b for b in mem):
                wit = (j, space.points[x])
                break
        if wit:
            break
    res["ii"] = (wit is None, wit)

    wit = None
    for k in range(H.n + 1):
        if not any(Y <= b for j in H.levels for b in H.levels[j][k]):
            wit = (k,)
            break
    res["iii"] = (wit is None, wit)

    wit = None
    levels = sorted(H.levels)
    for k in range(H.n + 1):
        for a, i in enumerate(levels):
            t = r ** i
            for j in levels[a + 1:]:
                for B in H.levels[i][k]:
                    for C in H.levels[j][k]:
                        if B <= C:
                            continue
                        pair = next(((x, y) for x in B for y in C if dist[x][y] <= t), None)
                        if pair:
                            wit = (B, C, space.points[pair[0]], space.points[pair[1]], i)
                            break
                    if wit:
                        break
                if wit:
                    break
            if wit:
                break
        if wit:
            break
    res["iv"] = (wit is None, wit)
    return HierReport(res)
