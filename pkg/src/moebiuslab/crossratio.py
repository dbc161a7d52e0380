"""Cross-ratio triples and the Möbius structure they induce on a finite space."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations, permutations, product
from math import gcd, lcm
from typing import Iterator, Mapping, Sequence

import numpy as np

from .qspace import INF, FiniteQSpace

__all__ = [
    "PAIRINGS",
    "ProjTriple",
    "LogTriple",
    "Perm",
    "InadmissibleQuadruple",
    "admissible",
    "admissible_quadruples",
    "crt",
    "to_log",
    "from_log",
    "proj_close",
    "phi",
    "act",
    "permute_tuple",
    "AxiomReport",
    "check_axioms",
    "axiom4_terms",
    "corner_margin",
    "moebius_equivalent",
]

# Pairs of opposite edges of the tetrahedron on positions 0..3, in the order
# of the crt components: (wx|yz), (wy|zx), (wz|xy).
PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))


class InadmissibleQuadruple(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProjTriple:
    """A point ``(a:b:c)`` of the projective plane with non-negative rational coordinates."""

    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in (self.a, self.b, self.c))
        if any(v < 0 for v in vals):
            raise ValueError(f"negative coordinate in {vals}")
        if not any(vals):
            raise ValueError("(0:0:0) is not a projective point")
        for name, v in zip("abc", vals):
            object.__setattr__(self, name, v)

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def __getitem__(self, i: int) -> Fraction:
        return (self.a, self.b, self.c)[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjTriple):
            return NotImplemented
        a, b, c = self
        x, y, z = other
        return a * y == x * b and b * z == y * c and a * z == x * c

    def __hash__(self) -> int:
        return hash(self.canonical())

    def canonical(self) -> tuple[int, int, int]:
        """Integer representative with gcd 1."""
        den = reduce(lcm, (v.denominator for v in self), 1)
        ints = [int(v * den) for v in self]
        g = reduce(gcd, ints)
        return tuple(v // g for v in ints)

    def __str__(self) -> str:
        return ":".join(str(v) for v in self.canonical())

    def __repr__(self) -> str:
        return f"ProjTriple({self})"

    def in_closed_delta(self) -> bool:
        zeros = sum(v == 0 for v in self)
        if zeros == 0:
            return True
        if zeros == 1:
            x, y = (v for v in self if v != 0)
            return x == y
        return False

    def permuted(self, tau: "Perm") -> "ProjTriple":
        return ProjTriple(*act(tau, tuple(self)))


@dataclass(frozen=True)
class LogTriple:
    """Coordinates ``(m1, m2, m3)`` of a point of the closed log plane."""

    m1: float
    m2: float
    m3: float

    def __iter__(self):
        return iter((self.m1, self.m2, self.m3))

    def __getitem__(self, i: int) -> float:
        return (self.m1, self.m2, self.m3)[i]

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


_BOUNDARY_LOGS = {
    (1, 1, 0): LogTriple(math.inf, -math.inf, 0.0),
    (1, 0, 1): LogTriple(-math.inf, 0.0, math.inf),
    (0, 1, 1): LogTriple(0.0, math.inf, -math.inf),
}


def _log(q: Fraction) -> float:
    # log of numerator/denominator separately stays accurate for huge integers
    return math.log(q.numerator) - math.log(q.denominator)


def to_log(t: ProjTriple) -> LogTriple:
    """``(a:b:c) -> (ln(b/c), ln(c/a), ln(a/b))``, extended to the three boundary points."""
    if not t.in_closed_delta():
        raise ValueError(f"{t} is not in the closed simplex of cross-ratio values")
    key = t.canonical()
    if key in _BOUNDARY_LOGS:
        return _BOUNDARY_LOGS[key]
    la, lb, lc = (_log(v) for v in t)
    return LogTriple(lb - lc, lc - la, la - lb)


def from_log(m: LogTriple | Sequence[float]) -> ProjTriple:
    """Inverse of :func:`to_log`; finite inputs come back as float-derived rationals."""
    m = LogTriple(*m)
    for key, val in _BOUNDARY_LOGS.items():
        if tuple(m) == tuple(val):
            return ProjTriple(*key)
    if not m.is_finite():
        raise ValueError(f"{tuple(m)} is not a point of the closed log plane")
    if abs(m.m1 + m.m2 + m.m3) > 1e-9 * max(1.0, *map(abs, m)):
        raise ValueError(f"components of {tuple(m)} do not sum to zero")
    # c = 1, b = e^{m1}, a = e^{-m2}
    return ProjTriple(Fraction(math.exp(-m.m2)), Fraction(math.exp(m.m1)), Fraction(1))


def proj_close(s: ProjTriple, t: ProjTriple, tol: float = 1e-12) -> bool:
    """Projective comparison after normalizing both triples to unit sum."""
    u = np.array([float(v) for v in s])
    v = np.array([float(x) for x in t])
    return bool(np.max(np.abs(u / u.sum() - v / v.sum())) <= tol)


@dataclass(frozen=True)
class Perm:
    """Permutation of ``{0, ..., n-1}``; ``images[i]`` is the image of ``i``.

    Products compose right to left: ``(s * t)(i) == s(t(i))``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"{self.images} is not a permutation")

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Perm":
        img = list(range(n))
        img[i], img[j] = j, i
        return cls(tuple(img))

    @classmethod
    def all(cls, n: int) -> list["Perm"]:
        return [cls(p) for p in permutations(range(n))]

    def __len__(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Perm") -> "Perm":
        return Perm(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Perm":
        inv = [0] * len(self)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm(tuple(inv))

    @property
    def sign(self) -> int:
        s = 1
        for i, j in combinations(range(len(self)), 2):
            if self.images[i] > self.images[j]:
                s = -s
        return s

    def is_identity(self) -> bool:
        return self.images == tuple(range(len(self)))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for i in range(len(self)):
            if i in seen or self.images[i] == i:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def __str__(self) -> str:
        cyc = self.cycles()
        return "".join("(" + "".join(str(i + 1) for i in c) + ")" for c in cyc) or "e"


def phi(sigma: Perm) -> Perm:
    """Permutation of the three opposite-edge pairings induced by ``sigma`` in S4."""
    if len(sigma) != 4:
        raise ValueError("phi is defined on permutations of four elements")
    keys = [frozenset(frozenset(p) for p in pairing) for pairing in PAIRINGS]
    images = []
    for pairing in PAIRINGS:
        moved = frozenset(frozenset(sigma(i) for i in pair) for pair in pairing)
        images.append(keys.index(moved))
    return Perm(tuple(images))


def act(tau: Perm, values: Sequence):
    """Move entry ``i`` of ``values`` to position ``tau(i)``."""
    out = [None] * len(values)
    for i, v in enumerate(values):
        out[tau(i)] = v
    return tuple(out)


def permute_tuple(pi: Perm, P: Sequence):
    """The quadruple ``πP``: the entry at position ``i`` moves to position ``π(i)``."""
    return act(pi, P)


def admissible(q: Sequence) -> bool:
    return max(Counter(q).values()) <= 2


def admissible_quadruples(space: FiniteQSpace) -> Iterator[tuple[int, int, int, int]]:
    for q in product(range(space.n), repeat=4):
        if admissible(q):
            yield q


def _crt_idx(space: FiniteQSpace, q: tuple[int, int, int, int]) -> ProjTriple:
    counts = Counter(q)
    if max(counts.values()) > 2:
        raise InadmissibleQuadruple(f"{space.labels(q)} has a point appearing more than twice")
    if len(counts) < 4:
        # a repeated point (finite or at infinity) forces a boundary value
        p = next(p for p, k in counts.items() if k == 2)
        pos = tuple(i for i, v in enumerate(q) if v == p)
        vals = [1, 1, 1]
        for comp, pairing in enumerate(PAIRINGS):
            if any(set(pair) == set(pos) for pair in pairing):
                vals[comp] = 0
        return ProjTriple(*vals)
    dist = space.dist
    comps = []
    for (i, j), (k, l) in PAIRINGS:
        f, g = dist[q[i]][q[j]], dist[q[k]][q[l]]
        # the point at infinity appears once: its factor cancels in every component
        comps.append(g if f is INF else f if g is INF else f * g)
    return ProjTriple(*comps)


def crt(space: FiniteQSpace, q: Sequence[str | int]) -> ProjTriple:
    """Cross-ratio triple ``(d(w,x)d(y,z) : d(w,y)d(z,x) : d(w,z)d(x,y))`` of a quadruple."""
    if len(q) != 4:
        raise InadmissibleQuadruple("a quadruple has four entries")
    return _crt_idx(space, tuple(space.index(p) for p in q))


@dataclass
class ConditionResult:
    checked: int = 0
    violation: tuple | None = None
    partial: int = 0

    @property
    def ok(self) -> bool:
        return self.violation is None


@dataclass
class AxiomReport:
    conditions: dict[int, ConditionResult]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions.values())

    def to_json(self, space: FiniteQSpace) -> dict:
        out = {"ok": self.ok, "conditions": {}}
        for k, c in self.conditions.items():
            entry = {"ok": c.ok, "checked": c.checked}
            if c.partial:
                entry["not_well_defined"] = c.partial
            if c.violation is not None:
                tup, detail = c.violation
                entry["violation"] = {"tuple": [space.points[i] for i in tup], "detail": detail}
            out["conditions"][str(k)] = entry
        return out


def _log_equal(u: LogTriple, v: Sequence[float], tol: float) -> bool:
    for x, y in zip(u, v):
        if math.isinf(x) or math.isinf(y):
            if x != y:
                return False
        elif abs(x - y) > tol:
            return False
    return True


def axiom4_terms(space: FiniteQSpace, x, y, w, a, b) -> tuple[tuple[float, float, float], bool]:
    """Left-hand side ``M(αxωβ) + M(αωyβ) - M(αxyβ)`` and whether its third part vanishes exactly.

    The exact test cross-multiplies the first two crt coordinates of the three
    triples, which is the projective form of the third log coordinate.
    """
    x, y, w, a, b = (space.index(p) for p in (x, y, w, a, b))
    t1 = _crt_idx(space, (a, x, w, b))
    t2 = _crt_idx(space, (a, w, y, b))
    t3 = _crt_idx(space, (a, x, y, b))
    exact = t1.a * t2.a * t3.b == t1.b * t2.b * t3.a
    m1, m2, m3 = to_log(t1), to_log(t2), to_log(t3)
    with np.errstate(invalid="ignore"):
        total = tuple(float(np.float64(p) + q - r) for p, q, r in zip(m1, m2, m3))
    return total, exact


def check_axioms(space: FiniteQSpace, tol: float = 1e-12) -> AxiomReport:
    """Verify the four Möbius-structure conditions on every admissible tuple.

    Condition 1 is checked twice: exactly, as ``crt(πP) = φ(π)·crt(P)``
    projectively, and in log coordinates as ``M(πP) = sgn(π) φ(π) M(P)``.
    For condition 4 the third component is checked exactly; the first two
    must satisfy ``m1 = -m2``. Tuples where ``m1`` is ``∞ - ∞`` are counted
    as not well-defined rather than as violations.
    """
    n = space.n
    quads = list(admissible_quadruples(space))
    table = {q: _crt_idx(space, q) for q in quads}
    logs = {q: to_log(t) for q, t in table.items()}
    perms = [(pi, phi(pi)) for pi in Perm.all(4)]
    res = {k: ConditionResult() for k in (1, 2, 3, 4)}

    c1 = res[1]
    for q in quads:
        for pi, tau in perms:
            pq = permute_tuple(pi, q)
            c1.checked += 1
            if table[pq] != table[q].permuted(tau):
                c1.violation = (pq, f"crt{pq} != phi({pi}) crt{q}")
                break
            expect = tuple(pi.sign * v for v in act(tau, tuple(logs[q])))
            if not _log_equal(logs[pq], expect, tol):
                c1.violation = (pq, f"M(piP) = {tuple(logs[pq])}, expected {expect}")
                break
        if c1.violation:
            break

    c2 = res[2]
    for q in quads:
        c2.checked += 1
        if logs[q].is_finite() != (len(set(q)) == 4):
            c2.violation = (q, f"M = {tuple(logs[q])} for a {'non-' if len(set(q)) == 4 else ''}degenerate quadruple")
            break

    c3 = res[3]
    target = LogTriple(0.0, math.inf, -math.inf)
    for x, y, z in product(range(n), repeat=3):
        q = (x, x, y, z)
        if q not in table:
            continue
        c3.checked += 1
        if table[q] != ProjTriple(0, 1, 1) or logs[q] != target:
            c3.violation = (q, f"crt = {table[q]}")
            break

    c4 = res[4]
    for x, y, w, a, b in product(range(n), repeat=5):
        if len({w, a, b}) < 3 or a in (x, y) or b in (x, y):
            continue
        if not admissible((x, y, w, a, b)):
            continue
        c4.checked += 1
        t1, t2, t3 = table[(a, x, w, b)], table[(a, w, y, b)], table[(a, x, y, b)]
        if t1.a * t2.a * t3.b != t1.b * t2.b * t3.a:
            c4.violation = ((x, y, w, a, b), "third component does not vanish")
            break
        m1 = logs[(a, x, w, b)][0] + logs[(a, w, y, b)][0] - logs[(a, x, y, b)][0]
        m2 = logs[(a, x, w, b)][1] + logs[(a, w, y, b)][1] - logs[(a, x, y, b)][1]
        if math.isnan(m1) or math.isnan(m2):
            c4.partial += 1
            continue
        bad = (m1 != -m2) if (math.isinf(m1) or math.isinf(m2)) else abs(m1 + m2) > tol * max(1.0, abs(m1))
        if bad:
            c4.violation = ((x, y, w, a, b), f"first/second components {m1}, {m2} are not (λ, -λ)")
            break
    return AxiomReport(res)


def _triple_margin(vals: Sequence) -> Fraction:
    lo, mid, hi = sorted(vals)
    return mid / hi


def _corner_candidates_exact(space: FiniteQSpace) -> Iterator[tuple[int, ...]]:
    ords = space.ordinary
    yield from combinations(ords, 4)
    if space.infinity is not None:
        for t in combinations(ords, 3):
            yield (space.infinity,) + t


def _corner_candidates_float(space: FiniteQSpace, rtol: float = 1e-9) -> list[tuple[int, ...]]:
    ords = space.ordinary
    m = len(ords)
    D = space.float_matrix(ords)
    best = math.inf
    per_pair: list[tuple[float, int, int]] = []
    for i in range(m):
        for j in range(i + 1, m - 2):
            ks = np.arange(j + 1, m)
            P1 = D[i, j] * D[np.ix_(ks, ks)]
            P2 = D[i, ks][:, None] * D[j, ks][None, :]
            P3 = D[j, ks][:, None] * D[i, ks][None, :]
            hi = np.maximum(np.maximum(P1, P2), P3)
            lo = np.minimum(np.minimum(P1, P2), P3)
            ratio = (P1 + P2 + P3 - hi - lo) / hi
            ratio[np.tril_indices(len(ks))] = math.inf
            v = float(ratio.min())
            per_pair.append((v, i, j))
            best = min(best, v)
    tri_best = math.inf
    tri_rows = []
    if space.infinity is not None:
        for i in range(m):
            T = np.stack(np.broadcast_arrays(D[i][:, None], D[i][None, :], D), axis=0)
            # components d(y,z) : d(z,x) : d(x,y) for x = i
            hi, lo = T.max(axis=0), T.min(axis=0)
            ratio = (T.sum(axis=0) - hi - lo) / np.where(hi > 0, hi, 1)
            mask = np.ones((m, m), dtype=bool)
            mask[np.triu_indices(m, 1)] = False
            mask[i, :] = True
            mask[:, i] = True
            ratio[mask] = math.inf
            v = float(ratio.min())
            tri_rows.append((v, i, ratio))
            tri_best = min(tri_best, v)
    overall = min(best, tri_best)
    thresh = overall * (1 + rtol) + 1e-300
    out = []
    for v, i, j in per_pair:
        if v <= thresh:
            for k, l in combinations(range(j + 1, m), 2):
                q = (ords[i], ords[j], ords[k], ords[l])
                p = (D[i, j] * D[k, l], D[i, k] * D[j, l], D[i, l] * D[j, k])
                if sorted(p)[1] / max(p) <= thresh:
                    out.append(q)
    for v, i, ratio in tri_rows:
        if v <= thresh:
            for j, k in zip(*np.nonzero(ratio <= thresh)):
                out.append((space.infinity, ords[i], ords[j], ords[k]))
    return out


def corner_margin(space: FiniteQSpace, with_witness: bool = False):
    """Smallest distance of the crt image to the corners, in the chart of its largest coordinate.

    For each non-degenerate quadruple the crt value is normalized so its
    largest coordinate is 1; the margin of that quadruple is the larger of
    the other two coordinates. Returns the minimum over all quadruples, or
    ``INF`` when there are no non-degenerate quadruples. The result is exact:
    spaces with more than 16 ordinary points use a float pass to find the
    minimizing candidates, which are then re-evaluated exactly.
    """
    cands = (_corner_candidates_exact(space) if len(space.ordinary) <= 16
             else _corner_candidates_float(space))
    best, arg = INF, None
    for q in cands:
        v = _triple_margin(tuple(_crt_idx(space, q)))
        if v < best:
            best, arg = v, q
    if with_witness:
        return best, (None if arg is None else tuple(space.points[i] for i in arg))
    return best


def moebius_equivalent(sA: FiniteQSpace, sB: FiniteQSpace, f: Mapping[str, str] | None = None,
                       with_witness: bool = False):
    """True iff ``crt_A(q) = crt_B(f(q))`` for every admissible quadruple ``q`` of ``sA``."""
    if f is None:
        f = {p: p for p in sA.points}
    if set(f) != set(sA.points) or sorted(f.values()) != sorted(sB.points):
        raise ValueError("f must be a bijection between the point sets")
    img = [sB.index(f[p]) for p in sA.points]
    for q in admissible_quadruples(sA):
        if _crt_idx(sA, q) != _crt_idx(sB, tuple(img[i] for i in q)):
            return (False, tuple(sA.points[i] for i in q)) if with_witness else False
    return (True, None) if with_witness else True
