"""The shared corpus of generated spaces used by the property suites."""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .generators import GeneratorSpec, generate
from .qspace import FiniteQSpace
from .spaceio import dumps_space

G = GeneratorSpec


def _line(n, step=1):
    return G("line-grid", {"n": n, "step": str(Fraction(step))} if step != 1 else {"n": n})


def _tree(depth, branching, seed=0):
    return G("tree-ultrametric", {"depth": depth, "branching": branching, "seed": seed})


def _specs() -> list[GeneratorSpec]:
    out: list[GeneratorSpec] = []
    for n in (3, 4, 5, 6, 7, 8, 10, 12, 16, 33, 65):
        out.append(_line(n))
    out.append(_line(6, "1/3"))
    for depth in (2, 3, 4, 5, 7):
        out.append(G("cantor", {"depth": depth}))
    for depth, b, seed in ((1, 3, 0), (2, 2, 0), (2, 2, 1), (2, 3, 2), (3, 2, 3), (1, 5, 4),
                           (4, 2, 5), (3, 3, 6), (6, 2, 7)):
        out.append(_tree(depth, b, seed))
    for base in (_line(4), _line(5), _line(6), _line(8), _line(12), G("cantor", {"depth": 3}),
                 G("cantor", {"depth": 5})):
        out.append(G("snowflake", {"eps": 2}, base))
    out.append(G("snowflake", {"eps": "1/2"}, _line(5)))
    out.append(G("snowflake", {"eps": "1/2"}, G("line-grid", {"n": 6, "step": 4})))
    for base, o in ((_line(3), None), (_line(5), None), (_line(6), "0"), (_line(7), "6"), (_line(10), "3"),
                    (G("cantor", {"depth": 3}), None), (_tree(2, 2), None), (_tree(3, 2, 1), None),
                    (G("snowflake", {"eps": 2}, _line(6)), "1"), (_line(12), "5")):
        out.append(G("involuted", {} if o is None else {"o": o}, base))
    for base in (_line(4), _line(6), _line(8), _tree(2, 2), G("cantor", {"depth": 3})):
        out.append(G(base.kind, base.params, base.base, extend=True))
    for base, seed, eta in ((_line(5), 1, "1/10"), (_line(7), 2, "1/5"), (_line(9), 3, "1/20"),
                            (_tree(2, 3), 4, "1/10"), (G("cantor", {"depth": 3}), 5, "1/10"),
                            (_line(6), 6, "1/3"), (_line(4), 7, "0")):
        out.append(G("random-perturbed", {"seed": seed, "eta": eta}, base))
    out.append(G("random-perturbed", {"seed": 8, "eta": "1/10"}, _line(6), extend=True))
    out.append(G("involuted", {"o": "2"}, G("random-perturbed", {"seed": 9, "eta": "1/10"}, _line(7))))
    return out


MANIFEST: tuple[GeneratorSpec, ...] = tuple(_specs())


def spec_name(spec: GeneratorSpec) -> str:
    p = spec.params
    parts = [spec.kind] + [f"{k}{v}" for k, v in sorted(p.items())]
    name = "-".join(str(x).replace("/", "_") for x in parts)
    if spec.base is not None:
        name += "_of_" + spec_name(spec.base)
    if spec.extend:
        name += "+inf"
    return name


@lru_cache(maxsize=None)
def _build(key: str) -> FiniteQSpace:
    return generate(GeneratorSpec.from_json(json.loads(key)))


def corpus(max_points: int | None = None) -> list[tuple[str, FiniteQSpace]]:
    """``(name, space)`` pairs for the manifest, optionally limited by point count."""
    out = []
    for spec in MANIFEST:
        S = _build(spec.key())
        if max_points is None or S.n <= max_points:
            out.append((spec_name(spec), S))
    return out


def emit(directory: str | Path) -> list[Path]:
    """Write every corpus space plus ``manifest.json`` into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths, manifest = [], []
    for spec in MANIFEST:
        name = spec_name(spec)
        path = d / f"{name}.json"
        path.write_text(dumps_space(_build(spec.key())), encoding="utf-8")
        paths.append(path)
        manifest.append({"file": path.name, "spec": spec.to_json()})
    (d / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return paths
