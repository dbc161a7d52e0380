"""Ball covers, desk-scale Hausdorff measure estimates and dimension fits.

On a finite sample the measure ``mu^s`` is a limit that cannot be taken, so
everything here works at scales no finer than the minimal positive
distance. Covers use balls of the uniform radius ``delta``; their cost
``N(delta) delta^s`` bounds ``mu^s_delta`` from above.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .qspace import FiniteQSpace, diameter, involute

DEFAULT_EXACT_THRESHOLD = 20


@dataclass(frozen=True)
class BallCover:
    """Closed balls ``(center index, radius)`` of radius at most ``delta``."""

    items: tuple[tuple[int, Fraction], ...]
    delta: Fraction
    exact: bool = True

    def __post_init__(self):
        if any(r > self.delta for _, r in self.items):
            raise ValueError("every radius must be at most delta")

    def __len__(self) -> int:
        return len(self.items)

    def points(self, space: FiniteQSpace) -> frozenset[int]:
        dist = space.dist
        return frozenset(y for c, r in self.items for y in space.ordinary if dist[c][y] <= r)

    def to_json(self, space: FiniteQSpace) -> dict:
        return {"delta": str(self.delta), "exact": self.exact,
                "balls": [{"center": space.points[c], "radius": str(r)} for c, r in self.items]}


def cover_cost(cover: BallCover | Iterable[tuple[int, Fraction]], s):
    """``sum r_i^s`` with ``0^0 = 1``.

    Exact (a Fraction) when ``s`` is an integer, a float otherwise.
    """
    items = cover.items if isinstance(cover, BallCover) else tuple(cover)
    if isinstance(s, int) or (isinstance(s, Fraction) and s.denominator == 1):
        e = int(s)
        if e < 0:
            raise ValueError("s must be non-negative")
        return sum((Fraction(r) ** e for _, r in items), Fraction(0))
    s = float(s)
    if s < 0:
        raise ValueError("s must be non-negative")
    return math.fsum(1.0 if s == 0 else float(r) ** s for _, r in items)


def _target(space: FiniteQSpace, A: Iterable[str | int] | None) -> list[int]:
    if A is None:
        return list(space.ordinary)
    idx = {space.index(p) for p in A}
    idx.discard(space.infinity)
    return sorted(idx)


def _candidates(space: FiniteQSpace, target: Sequence[int], delta: Fraction) -> list[tuple[int, int]]:
    """Non-dominated ``(target bitmask, center)`` pairs for radius-``delta`` balls.

    Centers range over all ordinary points, not only the target set.
    """
    pos = {p: i for i, p in enumerate(target)}
    dist = space.dist
    by_mask: dict[int, int] = {}
    for c in space.ordinary:
        row = dist[c]
        m = sum(1 << pos[y] for y in target if row[y] <= delta)
        if m and m not in by_mask:
            by_mask[m] = c
    masks = sorted(by_mask, key=lambda m: -m.bit_count())
    kept: list[int] = []
    for m in masks:
        if not any(m & k == m for k in kept):
            kept.append(m)
    return [(m, by_mask[m]) for m in kept]


def _greedy(cands: list[tuple[int, int]], full: int) -> list[int]:
    left, chosen = full, []
    while left:
        i = max(range(len(cands)), key=lambda i: ((cands[i][0] & left).bit_count(), -i))
        chosen.append(i)
        left &= ~cands[i][0]
    return chosen


def _exact(cands: list[tuple[int, int]], full: int) -> list[int]:
    """Branch and bound on the uncovered element with the fewest covering sets."""
    best = _greedy(cands, full)
    nbits = full.bit_length()
    covering = [[i for i, (m, _) in enumerate(cands) if m >> e & 1] for e in range(nbits)]
    biggest = max(m.bit_count() for m, _ in cands)

    def rec(left: int, chosen: list[int]):
        nonlocal best
        if not left:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        if len(chosen) + -(-left.bit_count() // biggest) >= len(best):
            return
        e = min((b for b in range(nbits) if left >> b & 1), key=lambda b: len(covering[b]))
        for i in sorted(covering[e], key=lambda i: -(cands[i][0] & left).bit_count()):
            chosen.append(i)
            rec(left & ~cands[i][0], chosen)
            chosen.pop()

    rec(full, [])
    return best


def min_delta_cover(space: FiniteQSpace, A: Iterable[str | int] | None, delta,
                    exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> BallCover:
    """A cover of ``A`` (minus infinity) by the fewest closed ``delta``-balls.

    A ball of radius ``delta`` contains every ball with the same center and
    a smaller radius, so radius ``delta`` loses nothing for cardinality.
    Exact set cover when at most ``exact_threshold`` non-dominated candidate
    balls remain, greedy otherwise; ``exact`` records which.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    target = _target(space, A)
    if not target:
        return BallCover((), delta, True)
    full = (1 << len(target)) - 1
    cands = _candidates(space, target, delta)
    exact = len(cands) <= exact_threshold
    chosen = _exact(cands, full) if exact else _greedy(cands, full)
    items = tuple(sorted((cands[i][1], delta) for i in chosen))
    return BallCover(items, delta, exact)


def resolution_floor(space: FiniteQSpace, A=None) -> Fraction:
    target = _target(space, A)
    if len(target) < 2:
        return Fraction(0)
    return min(space.dist[x][y] for i, x in enumerate(target) for y in target[i + 1:])


@dataclass
class MeasurePoint:
    delta: Fraction
    count: int
    cost: object
    exact: bool


@dataclass
class MeasureEstimate:
    s: object
    points: list[MeasurePoint]
    violations: list[tuple[Fraction, Fraction]] = field(default_factory=list)


def measure_estimate(space: FiniteQSpace, s, deltas: Sequence, A=None,
                     exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> MeasureEstimate:
    """``mu^s_delta`` upper estimates ``N(delta) delta^s`` along a schedule.

    The schedule must strictly decrease and stay at or above the minimal
    positive distance. Pairs ``(delta, delta')`` where the cover count drops
    as delta shrinks (possible only for greedy covers) are reported in
    ``violations``.
    """
    deltas = [Fraction(d) for d in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta schedule must be strictly decreasing")
    floor = resolution_floor(space, A)
    if deltas and deltas[-1] < floor:
        raise ValueError(f"delta {deltas[-1]} is below the resolution floor {floor} "
                         "(minimal positive distance of the sample)")
    pts = []
    for d in deltas:
        cov = min_delta_cover(space, A, d, exact_threshold)
        pts.append(MeasurePoint(d, len(cov), cover_cost(cov, s), cov.exact))
    viol = [(p.delta, q.delta) for p, q in zip(pts, pts[1:]) if q.count < p.count]
    return MeasureEstimate(s, pts, viol)


@dataclass
class DimEstimate:
    dimension: float
    scales: list[tuple[Fraction, int, float]]
    residual: float
    exact_flags: list[bool]

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "residual": self.residual,
            "scales": [{"delta": str(d), "N": n, "cost": c} for d, n, c in self.scales],
            "exact_flags": self.exact_flags,
            "note": "finite-sample estimate above the resolution floor",
        }


def default_schedule(space: FiniteQSpace, A=None, dmin=None, dmax=None, grid: int | None = None) -> list[Fraction]:
    """Geometric schedule; ratio 1/2 from diam/2 to 2*minpos unless overridden."""
    target = _target(space, A)
    if len(target) < 2:
        raise ValueError("need at least two ordinary points")
    dmax = Fraction(dmax) if dmax is not None else diameter(space, target) / 2
    dmin = Fraction(dmin) if dmin is not None else 2 * resolution_floor(space, A)
    if dmin <= 0 or dmax <= dmin:
        return [dmax] if dmax > 0 else []
    if grid is None:
        out, d = [], dmax
        while d >= dmin:
            out.append(d)
            d /= 2
        return out
    if grid < 2:
        return [dmax]
    ratio = (float(dmin) / float(dmax)) ** (1 / (grid - 1))
    out = [dmax] + [Fraction(float(dmax) * ratio ** i).limit_denominator(10 ** 12) for i in range(1, grid - 1)] + [dmin]
    return sorted(set(out), reverse=True)


def _count(args) -> tuple[int, bool]:
    space, A, d, thr = args
    cov = min_delta_cover(space, A, d, thr)
    return len(cov), cov.exact


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("MOEBIUSLAB_THREADS", "1")))
    except ValueError:
        return 1


def hausdorff_dim_estimate(space: FiniteQSpace, A=None, dmin=None, dmax=None, grid: int | None = None,
                           exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
                           workers: int | None = None) -> DimEstimate:
    """Least-squares slope of ``log N(delta)`` against ``log(1/delta)``.

    A finite-sample estimate of the critical exponent: uniform-radius covers
    bound ``mu^s_delta`` by ``N(delta) delta^s``, which stays bounded
    exactly when ``s`` is at least the growth rate of ``N``. Needs three
    scales or more.
    """
    sched = default_schedule(space, A, dmin, dmax, grid)
    if len(sched) < 3:
        raise ValueError(f"only {len(sched)} usable scales; need at least 3")
    floor = resolution_floor(space, A)
    if sched[-1] < floor:
        raise ValueError(f"schedule reaches below the resolution floor {floor}")
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [(space, A, d, exact_threshold) for d in sched]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            res = list(pool.map(_count, jobs))
    else:
        res = [_count(j) for j in jobs]
    counts = [n for n, _ in res]
    xs = np.array([-math.log(float(d)) for d in sched])
    ys = np.array([math.log(n) for n in counts])
    coef, resid, *_ = np.polyfit(xs, ys, 1, full=True)
    slope = float(coef[0])
    residual = float(math.sqrt(resid[0] / len(xs))) if len(resid) else 0.0
    scales = [(d, n, n * float(d) ** slope) for d, n in zip(sched, counts)]
    return DimEstimate(slope, scales, residual, [e for _, e in res])


def transport_cover_involution(space: FiniteQSpace, cover: BallCover, o, eps):
    """Move a ``delta``-cover for ``d`` to the involution at ``o``.

    Keeps the balls whose center lies farther than ``eps/K`` from ``o`` and
    scales their radii by ``K^3/eps^2``. Returns ``(new cover, involuted
    space, uncovered)``, where ``uncovered`` lists points of
    ``X minus ({inf} and B(o, eps))`` not covered under ``d_o``; it is empty
    whenever the input covers all ordinary points.
    """
    eps = Fraction(eps)
    o = space.index(o)
    K = space.K
    if o == space.infinity:
        raise ValueError("o must be an ordinary point")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not cover.delta < eps / K ** 2:
        raise ValueError(f"need delta < eps/K^2 = {eps / K ** 2}, got {cover.delta}")
    dist = space.dist
    factor = K ** 3 / eps ** 2
    items = tuple((c, r * factor) for c, r in cover.items if c != space.infinity and dist[c][o] > eps / K)
    dO = involute(space, o)
    out = BallCover(items, cover.delta * factor, cover.exact)
    target = [y for y in space.ordinary if dist[y][o] > eps]
    distO = dO.dist
    uncovered = [y for y in target if not any(distO[c][y] <= r for c, r in items)]
    return out, dO, uncovered
