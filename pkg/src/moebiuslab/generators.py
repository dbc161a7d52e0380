"""Seeded constructions of finite quasi-metric spaces.

Every generator returns a validated space and is fully determined by its
parameters (and seed, where one is taken).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath

from .qspace import (
    FiniteQSpace,
    InvalidSpaceError,
    extend_with_infinity,
    involute,
    line_space,
    validate,
)

MAX_POINTS = 512
MAX_CANTOR_DEPTH = 10
SNOWFLAKE_DIGITS = 50


def _checked(points, dist, infinity=None, exact=True) -> FiniteQSpace:
    report = validate(points, dist, infinity)
    if not report.ok:
        raise InvalidSpaceError(report)
    return FiniteQSpace.from_matrix(points, dist, infinity, exact=exact)


def _cap(n: int) -> None:
    if n > MAX_POINTS:
        raise ValueError(f"generated spaces are capped at {MAX_POINTS} points (requested {n})")


def gen_line_grid(n: int, step=1) -> FiniteQSpace:
    """Points ``0, step, ..., (n-1) step`` on the line."""
    if n < 1:
        raise ValueError("n must be positive")
    _cap(n)
    step = Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    return line_space([k * step for k in range(n)])


def gen_cantor(depth: int) -> FiniteQSpace:
    """Left endpoints of the ``2^depth`` level-``depth`` middle-thirds intervals."""
    if not 1 <= depth <= MAX_CANTOR_DEPTH:
        raise ValueError(f"depth must lie in 1..{MAX_CANTOR_DEPTH}")
    _cap(2 ** depth)
    pts = [Fraction(0)]
    for d in range(1, depth + 1):
        gap = Fraction(2, 3 ** d)
        pts = [p for q in pts for p in (q, q + gap)]
    return line_space(sorted(pts))


def gen_tree_ultrametric(depth: int, branching: int, seed: int = 0) -> FiniteQSpace:
    """Leaves of a complete tree; ``d = 2^-(depth of the lowest common ancestor)``.

    The seed only shuffles the point order.
    """
    if depth < 1 or branching < 2:
        raise ValueError("need depth >= 1 and branching >= 2")
    n = branching ** depth
    _cap(n)
    leaves = list(range(n))
    random.Random(seed).shuffle(leaves)

    def digits(v):
        out = []
        for _ in range(depth):
            out.append(v % branching)
            v //= branching
        return out[::-1]

    paths = [digits(v) for v in leaves]
    labels = ["".join(map(str, p)) if branching <= 10 else ".".join(map(str, p)) for p in paths]
    dist = []
    for p in paths:
        row = []
        for q in paths:
            if p == q:
                row.append(Fraction(0))
            else:
                lca = next(i for i in range(depth) if p[i] != q[i])
                row.append(Fraction(1, 2 ** lca))
        dist.append(row)
    return _checked(labels, dist)


def _iroot(v: int, r: int) -> int:
    """Floor of the ``r``-th root of a non-negative integer."""
    if v < 2:
        return v
    x = 1 << -(-v.bit_length() // r)
    while True:
        y = ((r - 1) * x + v // x ** (r - 1)) // r
        if y >= x:
            return x
        x = y


def _exact_power(q: Fraction, eps: Fraction) -> Fraction | None:
    """``q ** eps`` when it is rational, else None."""
    p, r = eps.numerator, eps.denominator
    out = []
    for v in (q.numerator, q.denominator):
        v = v ** p
        root = _iroot(v, r)
        if root ** r != v:
            return None
        out.append(root)
    return Fraction(out[0], out[1])


def _is_metric(space: FiniteQSpace) -> tuple | None:
    ords = space.ordinary
    dist = space.dist
    for x in ords:
        for y in ords:
            for z in ords:
                if dist[x][y] > dist[x][z] + dist[z][y]:
                    return (space.points[x], space.points[y], space.points[z])
    return None


def gen_snowflake(space: FiniteQSpace, eps) -> FiniteQSpace:
    """The distance ``d^eps`` of a metric ``d``; a ``2^eps``-quasi-metric.

    Powers are exact when rational. Otherwise they are evaluated with
    mpmath at 50 significant digits, rounded to nearby rationals, and the
    result is marked inexact.
    """
    eps = Fraction(eps)
    if not 0 < eps <= 2:
        raise ValueError("eps must lie in (0, 2]")
    bad = _is_metric(space)
    if bad is not None:
        raise ValueError(f"input is not a metric: triangle inequality fails at {bad}")
    exact = space.exact
    dist = []
    with mpmath.workdps(SNOWFLAKE_DIGITS):
        for row in space.dist:
            out = []
            for v in row:
                if not isinstance(v, Fraction) or v == 0:
                    out.append(v)
                    continue
                pw = _exact_power(v, eps)
                if pw is None:
                    exact = False
                    val = mpmath.power(mpmath.mpf(v.numerator) / v.denominator,
                                       mpmath.mpf(eps.numerator) / eps.denominator)
                    pw = Fraction(mpmath.nstr(val, SNOWFLAKE_DIGITS, strip_zeros=False)).limit_denominator(10 ** 30)
                out.append(pw)
            dist.append(out)
    return _checked(list(space.points), dist, space.infinity, exact)


def gen_involuted(base: FiniteQSpace, o) -> FiniteQSpace:
    return involute(base, o)


def gen_random_perturbed(base: FiniteQSpace, seed: int, eta) -> FiniteQSpace:
    """Multiply each finite distance by ``1 + eta u`` with ``u`` a seeded rational in [-1, 1].

    One factor per unordered pair keeps the matrix symmetric.
    """
    eta = Fraction(eta)
    if not 0 <= eta < 1:
        raise ValueError("eta must lie in [0, 1)")
    rng = random.Random(seed)
    n = base.n
    dist = [list(r) for r in base.dist]
    for i in range(n):
        for j in range(i + 1, n):
            u = Fraction(rng.randint(-1000, 1000), 1000)
            if isinstance(dist[i][j], Fraction):
                dist[i][j] = dist[j][i] = dist[i][j] * (1 + eta * u)
    return _checked(list(base.points), dist, base.infinity, base.exact)


KINDS = ("line-grid", "cantor", "tree-ultrametric", "snowflake", "involuted", "random-perturbed")


@dataclass(frozen=True)
class GeneratorSpec:
    """A generator invocation. ``base`` nests another spec for derived kinds.

    ``extend`` adds a point at infinity to the result.
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    base: "GeneratorSpec | None" = None
    extend: bool = False
    name: str | None = None

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"kind": self.kind, "params": {k: str(v) if isinstance(v, Fraction) else v
                                                             for k, v in self.params.items()}}
        if self.base is not None:
            doc["base"] = self.base.to_json()
        if self.extend:
            doc["extend"] = True
        if self.name:
            doc["name"] = self.name
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "GeneratorSpec":
        base = cls.from_json(doc["base"]) if doc.get("base") else None
        return cls(doc["kind"], dict(doc.get("params", {})), base, bool(doc.get("extend")), doc.get("name"))

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def generate(spec: GeneratorSpec) -> FiniteQSpace:
    p = spec.params
    if spec.kind not in KINDS:
        raise ValueError(f"unknown generator kind {spec.kind!r}; expected one of {', '.join(KINDS)}")
    if spec.kind in ("snowflake", "involuted", "random-perturbed") and spec.base is None:
        raise ValueError(f"{spec.kind} needs a base spec")
    if spec.kind == "line-grid":
        S = gen_line_grid(int(p.get("n", 5)), Fraction(p.get("step", 1)))
    elif spec.kind == "cantor":
        S = gen_cantor(int(p.get("depth", 3)))
    elif spec.kind == "tree-ultrametric":
        S = gen_tree_ultrametric(int(p.get("depth", 2)), int(p.get("branching", 2)), int(p.get("seed", 0)))
    elif spec.kind == "snowflake":
        S = gen_snowflake(generate(spec.base), Fraction(p.get("eps", 2)))
    elif spec.kind == "involuted":
        base = generate(spec.base)
        o = p.get("o")
        S = gen_involuted(base, base.ordinary[len(base.ordinary) // 2] if o is None else str(o))
    else:
        S = gen_random_perturbed(generate(spec.base), int(p.get("seed", 0)), Fraction(p.get("eta", "1/10")))
    if spec.extend:
        S = extend_with_infinity(S)
    return S
