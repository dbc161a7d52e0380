"""Splitting a bounded cover of multiplicity n+1 into n+1 families of multiplicity 1."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..qspace import FiniteQSpace
from .multiplicity import NagataCheck, check_members, separated, verify_nagata_cover


class PreconditionError(ValueError):
    def __init__(self, message: str, check: NagataCheck | None = None):
        super().__init__(message)
        self.check = check


def neighbourhood_masks(space: FiniteQSpace, s) -> list[int]:
    """Bitmask of the closed ``s``-ball (ordinary points only) around each point."""
    ords = space.ordinary
    dist = space.dist
    masks = [0] * space.n
    for x in ords:
        row = dist[x]
        masks[x] = sum(1 << y for y in ords if row[y] <= s)
    return masks


def iterated_neighbourhoods(space: FiniteQSpace, members: Sequence[frozenset[int]], s, depth: int) -> list[list[int]]:
    """``out[i][b]`` is the bitmask of ``N^i B_b``, the ``i``-fold closed s-neighbourhood."""
    nb = neighbourhood_masks(space, s)
    level = [sum(1 << p for p in b) for b in members]
    out = [level]
    for _ in range(depth):
        nxt = []
        for mask in level:
            grown, rest = mask, mask
            while rest:
                low = rest & -rest
                grown |= nb[low.bit_length() - 1]
                rest ^= low
            nxt.append(grown)
        out.append(nxt)
        level = nxt
    return out


@dataclass
class SplitResult:
    families: list[list[frozenset[int]]]
    bound: Fraction
    checks: list[NagataCheck]
    covers: bool

    @property
    def ok(self) -> bool:
        return self.covers and all(ch.bounded and ch.multiplicity <= 1 for ch in self.checks)

    def union(self) -> list[frozenset[int]]:
        return [b for fam in self.families for b in fam]


def split_cover(space: FiniteQSpace, cover: Sequence[frozenset[int]], s, n: int, c,
                check_pre: bool = True) -> SplitResult:
    """Split ``cover`` into ``n+1`` families, each of s-multiplicity at most 1.

    Precondition: ``cover`` covers the ordinary points, is ``c K^{2n} s``-bounded
    and has ``K^{2n} s``-multiplicity ``<= n+1`` (``K`` the quasi-constant,
    ``c >= 1``). Family ``i`` (``i = 1..n+1``) consists of the non-empty sets

        ⋂_{B in T} N^{i-1}B  minus  ⋃_{B not in T} N^i B,   |T| = i,

    where ``N^i`` is the ``i``-fold closed ``s``-neighbourhood. A point ``y``
    lies in the set for ``T`` iff the members whose ``N^{i-1}`` and ``N^i``
    contain ``y`` both equal ``T``, so each family is obtained by grouping
    points on that signature instead of enumerating all ``i``-subsets.

    Returned families are re-verified: the union must cover, every member
    must be ``c K^{4n} s``-bounded, and each family must have s-multiplicity
    at most 1 (see ``SplitResult.ok``).
    """
    s, c = Fraction(s), Fraction(c)
    if s <= 0:
        raise ValueError("s must be positive")
    if c < 1:
        raise ValueError("the construction assumes c >= 1")
    if n < 0:
        raise ValueError("n must be non-negative")
    members = [frozenset(b) for b in cover]
    check_members(space, members)
    K = space.K
    if check_pre:
        pre = verify_nagata_cover(space, members, K ** (2 * n) * s, c, n + 1)
        if not pre.ok:
            raise PreconditionError(
                "cover must be c*K^(2n)*s-bounded with K^(2n)*s-multiplicity <= n+1", pre)
    N = iterated_neighbourhoods(space, members, s, n + 1)
    ords = space.ordinary
    sig = {x: [frozenset(b for b, m in enumerate(N[i]) if m >> x & 1) for i in range(n + 2)] for x in ords}
    families: list[list[frozenset[int]]] = []
    for i in range(1, n + 2):
        groups: dict[frozenset[int], set[int]] = {}
        for x in ords:
            lo, hi = sig[x][i - 1], sig[x][i]
            if lo == hi and len(hi) == i:
                groups.setdefault(hi, set()).add(x)
        families.append([frozenset(g) for _, g in sorted(groups.items(), key=lambda kv: sorted(kv[0]))])
    bound = c * K ** (4 * n) * s
    checks = [verify_nagata_cover(space, fam, s, c * K ** (4 * n), 1, region=()) for fam in families]
    covered = frozenset().union(*(b for fam in families for b in fam))
    return SplitResult(families, bound, checks, covered >= set(ords))


def is_multiplicity_one(space: FiniteQSpace, family: Sequence[frozenset[int]], s) -> bool:
    return separated(space, family, s) is None
