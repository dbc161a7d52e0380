"""Moving a Nagata cover from ``d`` to the involution ``d_o``.

Given a hierarchy for ``d`` on ``Y = X minus {inf, o}`` and a scale ``s``,
``transport_cover_nagata`` builds families ``E_0 .. E_n`` that cover ``Y``,
are ``c'' s``-bounded under ``d_o`` and each have s-multiplicity at most 1
under ``d_o``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..qspace import INF, FiniteQSpace, diameter, involute
from .hierarchy import HierCovering
from .multiplicity import NagataCheck, separated, verify_nagata_cover


class WindowError(RuntimeError):
    """The hierarchy's level window cannot certify ``j(x)``."""


@dataclass(frozen=True)
class TransportConstants:
    r: Fraction
    c: Fraction
    K: Fraction
    n: int

    @property
    def c_tilde(self) -> Fraction:
        return 10 * self.c * self.r * self.K ** 3

    @property
    def c_prime(self) -> Fraction:
        return 2 * self.K ** 3 * self.c_tilde ** 2

    @property
    def c_second(self) -> Fraction:
        return self.K ** 4 * self.c_prime

    def to_json(self) -> dict:
        return {k: str(v) for k, v in (("r", self.r), ("c", self.c), ("K", self.K),
                                        ("c_tilde", self.c_tilde), ("c_prime", self.c_prime),
                                        ("c_second", self.c_second))} | {"n": self.n}


@dataclass
class TransportResult:
    families: list[list[frozenset[int]]]
    branch: str
    constants: TransportConstants
    bound: Fraction
    checks: list[NagataCheck]
    covers: bool
    involuted: FiniteQSpace
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.covers and all(ch.bounded and ch.multiplicity <= 1 for ch in self.checks)

    def to_json(self, space: FiniteQSpace) -> dict:
        return {
            "ok": self.ok,
            "branch": self.branch,
            "constants": self.constants.to_json(),
            "bound": str(self.bound),
            "covers": self.covers,
            "families": [[space.labels(b) for b in fam] for fam in self.families],
            "checks": [ch.to_json(self.involuted) for ch in self.checks],
            "diagnostics": self.diagnostics,
        }


def transport_constants(space: FiniteQSpace, o, H: HierCovering) -> TransportConstants:
    """Constants with ``K = max(K_d, K_{d_o})``, so both distances are K-quasi-metrics."""
    K = max(space.K, involute(space, o).K)
    return TransportConstants(Fraction(H.r), Fraction(H.c), K, H.n)


def _finish(space, dO, families, branch, consts, bound, ground, diag) -> TransportResult:
    families = [[b for b in fam if b] for fam in families]
    checks = [verify_nagata_cover(dO, fam, diag["s"], bound / diag["s"], 1, region=()) for fam in families]
    covered = frozenset().union(*(b for fam in families for b in fam))
    diag = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in diag.items()}
    return TransportResult(families, branch, consts, bound, checks, covered >= set(ground), dO, diag)


def transport_cover_nagata(space: FiniteQSpace, o, H: HierCovering, s,
                           bilipschitz: bool = False) -> TransportResult:
    """Families ``E_0..E_n`` for ``d_o`` built from the hierarchy ``H`` for ``d``.

    ``H`` must live on the ordinary points other than ``o``. With
    ``a = min d(x,o)`` over those points:

    * if ``c' s >= K/a`` or the ground set is already ``c' s``-bounded under
      ``d_o``, one set is returned (``d_o <= K/a`` is asserted pairwise);
    * otherwise ``A_s = {x : d(x,o) <= 2K/(s c')}`` and ``B_s`` its complement.
      For ``x`` in ``A_s``, ``j(x)`` is the largest level with a member that
      contains ``B(x, r^j)`` and has ``d_o``-diameter at most ``c~ s``. The
      chosen members are reduced to inclusion-maximal ones ``D``, colored by
      their hierarchy color; color-0 members within ``d_o``-distance ``s`` of
      ``B_s`` are merged with ``B_s`` into one set ``E``. When no level of the
      window qualifies, ``j(x)`` falls to the implicit level below it, whose
      members are the singletons in color 0.

    On a finite space ``a > 0`` and ``b = max d(x,o) < inf`` always hold, so
    the identity is bi-Lipschitz between ``d`` and ``d_o``. Passing
    ``bilipschitz=True`` uses that instead: pick the lowest level ``j`` with
    ``r^j >= b^2 s``; its colored families are then s-separated under ``d_o``
    and ``c r^j / a^2``-bounded.
    """
    s = Fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    o = space.index(o)
    if o == space.infinity:
        raise ValueError("o must be an ordinary point")
    ground = tuple(p for p in space.ordinary if p != o)
    if set(H.ground) != set(ground):
        raise ValueError("hierarchy must be built on the ordinary points other than o")
    dO = involute(space, o)
    consts = transport_constants(space, o, H)
    K, ct, cp, cs = consts.K, consts.c_tilde, consts.c_prime, consts.c_second
    dist, distO = space.dist, dO.dist
    a = min(dist[x][o] for x in ground)
    b = max(dist[x][o] for x in ground)
    diamO = diameter(dO, ground)
    diag = {"s": s, "a": a, "b": b, "diam_do": diamO}

    for x in ground:
        for y in ground:
            if x != y:
                # d_o(x,y) <= K / min(d(x,o), d(o,y)) with K the quasi-constant of d
                assert distO[x][y] <= space.K / min(dist[x][o], dist[o][y])

    if bilipschitz:
        r = H.r
        lo, hi = H.window
        j = next((j for j in range(lo, hi + 1) if r ** j >= b * b * s), hi)
        bound = max(H.c * r ** j / (a * a), s)
        if r ** j < b * b * s:
            raise WindowError(f"no level with r^j >= b^2 s = {b * b * s}; extend the window upward")
        for x in ground:
            for y in ground:
                if x != y:
                    assert dist[x][y] <= distO[x][y] * b * b
                    assert distO[x][y] <= dist[x][y] / (a * a)
        diag["level"] = j
        return _finish(space, dO, [list(f) for f in H.levels[j]], "bilipschitz", consts, bound, ground, diag)

    bound = cs * s
    if cp * s >= space.K / a or diamO <= cp * s:
        assert diamO <= space.K / a
        return _finish(space, dO, [[frozenset(ground)]] + [[] for _ in range(H.n)],
                       "single-set", consts, bound, ground, diag)

    thresh = 2 * K / (s * cp)
    A = [x for x in ground if dist[x][o] <= thresh]
    B = frozenset(x for x in ground if dist[x][o] > thresh)
    diag["A_s"] = space.labels(A)
    diag["B_s"] = space.labels(B)
    if B:
        assert diameter(dO, B) < cp * s

    lo, hi = H.window
    r = H.r
    minpos = min((dist[x][y] for x in ground for y in ground if x != y), default=INF)
    chosen: dict[int, tuple[int, int, int]] = {}
    for x in A:
        best = None
        for j in range(hi, lo - 1, -1):
            t = r ** j
            bl = frozenset(y for y in ground if dist[x][y] <= t)
            for k, i, C in H.members(j):
                if bl <= C and diameter(dO, C) <= ct * s:
                    best = (j, k, i)
                    break
            if best:
                break
        if best is None:
            # singletons in color 0 form a valid level once r^j is below every positive distance
            if not r ** (lo - 1) < minpos:
                raise WindowError(f"j({space.points[x]}) not attained inside [{lo}, {hi}]; extend the window downward")
            best = (lo - 1, 0, x)
        if best[0] == hi:
            raise WindowError(f"j({space.points[x]}) reaches the top level {hi}; extend the window upward")
        chosen[x] = best
    diag["j"] = {space.points[x]: jk[0] for x, jk in chosen.items()}

    # one entry per distinct (level, color, index), remembering the first center
    entries: dict[tuple[int, int, int], int] = {}
    for x in A:
        entries.setdefault(chosen[x], x)
    cand = [(frozenset([i]) if j < lo else H.levels[j][k][i], k, j, x) for (j, k, i), x in entries.items()]
    cand.sort(key=lambda e: (e[1], e[2], e[3]))
    D: list[tuple[frozenset[int], int]] = []
    seen: set[frozenset[int]] = set()
    for C, k, j, x in cand:
        if C in seen or any(C < C2 for C2, *_ in cand):
            continue
        seen.add(C)
        D.append((C, k))

    fams: list[list[frozenset[int]]] = [[C for C, k in D if k == kk] for kk in range(H.n + 1)]
    diag["claim_separated"] = [separated(dO, fam, s) is None for fam in fams]
    if B:
        far = [C for C in fams[0] if min(distO[p][q] for p in C for q in B) > s]
        close = [C for C in fams[0] if C not in far]
        E = B.union(*close)
        fams[0] = far + [E]
        diag["close"] = len(close)
    return _finish(space, dO, fams, "construction", consts, bound, ground, diag)
