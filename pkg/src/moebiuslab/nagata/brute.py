"""Exhaustive oracle for the least achievable multiplicity of bounded covers."""

from __future__ import annotations

from fractions import Fraction

from ..qspace import FiniteQSpace, diameter
from .multiplicity import s_multiplicity

MAX_POINTS = 8


def _partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def nagata_bruteforce(space: FiniteQSpace, s, c, with_witness: bool = False):
    """Least ``m`` such that some ``cs``-bounded cover has s-multiplicity ``<= m``.

    Only partitions are enumerated: shrinking members of a cover to a
    partition keeps it a cover, keeps every member bounded and never raises
    the multiplicity, so the minimum over partitions equals the minimum over
    all covers. Capped at 8 ordinary points (4140 partitions).
    """
    s, c = Fraction(s), Fraction(c)
    ords = list(space.ordinary)
    if len(ords) > MAX_POINTS:
        raise ValueError(f"brute force is limited to {MAX_POINTS} ordinary points")
    if not ords:
        return (0, []) if with_witness else 0
    bound = c * s
    best, best_cover = None, None
    for part in _partitions(ords):
        sets = [frozenset(b) for b in part]
        if any(diameter(space, b) > bound for b in sets):
            continue
        m = s_multiplicity(space, sets, s)
        if best is None or m < best:
            best, best_cover = m, sets
            if m == 1:
                break
    return (best, best_cover) if with_witness else best
