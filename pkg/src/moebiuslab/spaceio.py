"""JSON files for spaces and set families.

Space files::

    {"points": ["p0", ...], "infinity": "p3" | null, "dist": [["0", "3/2", ...], ...]}

Entries are exact rationals written ``"p"`` or ``"p/q"``, or ``"inf"``.
Set family files::

    {"sets": [["p0", "p1"], ...], "s": "1/2", "c": "3"}
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .qspace import INF, FiniteQSpace, InvalidSpaceError, SpaceParseError, as_ext, validate


def format_ext(value) -> str:
    if value is INF:
        return "inf"
    q = Fraction(value)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def space_from_json(obj: Any) -> FiniteQSpace:
    """Parse a decoded space document; raises on malformed or invalid data."""
    if not isinstance(obj, dict) or "points" not in obj or "dist" not in obj:
        raise SpaceParseError('space document needs "points" and "dist"')
    points = obj["points"]
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        raise SpaceParseError('"points" must be a list of strings')
    infinity = obj.get("infinity")
    if infinity is not None and not isinstance(infinity, str):
        raise SpaceParseError('"infinity" must be a point label or null')
    report = validate(points, obj["dist"], infinity)
    if not report.ok:
        raise InvalidSpaceError(report)
    return FiniteQSpace.from_matrix(points, obj["dist"], infinity, exact=obj.get("exact", True))


def space_to_json(space: FiniteQSpace) -> dict:
    doc = {
        "points": list(space.points),
        "infinity": space.infinity_label,
        "dist": [[format_ext(v) for v in row] for row in space.dist],
    }
    if not space.exact:
        doc["exact"] = False
    return doc


def dumps_space(space: FiniteQSpace) -> str:
    """Canonical serialization: byte-identical for equal spaces."""
    return json.dumps(space_to_json(space), ensure_ascii=False) + "\n"


def load_space(path: str | Path) -> FiniteQSpace:
    return space_from_json(read_json(path))


def save_space(space: FiniteQSpace, path: str | Path) -> None:
    Path(path).write_text(dumps_space(space), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpaceParseError(f"{path}: {exc}") from exc


def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def family_from_json(space: FiniteQSpace, obj: Any) -> tuple[list[frozenset[int]], dict]:
    """Parse a family document into index sets plus its ``s``/``c`` metadata."""
    if not isinstance(obj, dict) or not isinstance(obj.get("sets"), list):
        raise SpaceParseError('family document needs a "sets" list')
    sets = []
    for members in obj["sets"]:
        if not isinstance(members, list):
            raise SpaceParseError("each set must be a list of point labels")
        try:
            sets.append(frozenset(space.index(str(p)) for p in members))
        except KeyError as exc:
            raise SpaceParseError(str(exc)) from exc
    meta = {k: as_ext(obj[k]) for k in ("s", "c") if obj.get(k) is not None}
    return sets, meta


def family_to_json(space: FiniteQSpace, sets, **meta) -> dict:
    doc: dict[str, Any] = {"sets": [space.labels(s) for s in sets]}
    for k, v in meta.items():
        if v is not None:
            doc[k] = format_ext(v) if isinstance(v, (Fraction, int)) or v is INF else v
    return doc
