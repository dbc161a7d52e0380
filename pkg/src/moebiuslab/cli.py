"""Command-line entry point.

Exit status: 0 on success, 1 when a validation or verification is false,
2 on parse or usage errors. Reports are JSON on stdout; diagnostics go to
stderr. ``transform`` writes the bare canonical space document so its
output can be piped into another ``transform``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .crossratio import InadmissibleQuadruple, check_axioms, corner_margin, crt, moebius_equivalent, to_log
from .generators import KINDS, GeneratorSpec, generate
from .hausdorff import BallCover, hausdorff_dim_estimate, min_delta_cover, transport_cover_involution
from .nagata import (
    HierarchyBuildError,
    PreconditionError,
    WindowError,
    build_hierarchical,
    nagata_bruteforce,
    split_cover,
    transport_cover_nagata,
    verify_hierarchical,
    verify_nagata_cover,
)
from .qspace import (
    INF,
    InvalidSpaceError,
    SpaceParseError,
    as_ext,
    extend_with_infinity,
    involute,
    normalize_dA,
    rescale,
    validate,
)
from .spaceio import dumps_space, family_from_json, family_to_json, format_ext, space_from_json


class UsageError(Exception):
    pass


class Inputs:
    """Reads input files once and remembers their digests."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def read(self, path: str):
        raw = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
        self.digests[path] = hashlib.sha256(raw).hexdigest()
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SpaceParseError(f"{path}: {exc}") from exc

    def space(self, path: str, check: bool = True):
        doc = self.read(path)
        if not check:
            return doc
        return space_from_json(doc)


def _rat(text: str) -> Fraction:
    try:
        v = as_ext(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not a non-negative rational: {text!r}") from exc
    if v is INF:
        raise argparse.ArgumentTypeError("expected a finite rational")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


# ---------------------------------------------------------------- commands

def cmd_validate(args, io: Inputs):
    doc = io.space(args.space, check=False)
    if not isinstance(doc, dict) or "points" not in doc or "dist" not in doc:
        raise SpaceParseError('space document needs "points" and "dist"')
    report = validate(doc["points"], doc["dist"], doc.get("infinity"))
    out = report.to_json()
    if report.ok:
        S = space_from_json(doc)
        out["K"] = format_ext(S.K)
        out["points"] = S.n
        out["infinity"] = S.infinity_label
    return out, 0 if report.ok else 1


def cmd_transform(args, io: Inputs):
    S = io.space(args.space)
    if args.op == "rescale":
        if args.lam is None:
            raise UsageError("rescale needs --lam")
        T = rescale(S, args.lam)
    elif args.op == "involute":
        if args.o is None:
            raise UsageError("involute needs --o")
        T = involute(S, args.o)
    elif args.op == "extend":
        T = extend_with_infinity(S, args.label)
    else:
        if not args.A or len(args.A) != 3:
            raise UsageError("normalize needs --A omega alpha beta")
        T = normalize_dA(S, args.A)
    return dumps_space(T), 0


def cmd_crt(args, io: Inputs):
    S = io.space(args.space)
    t = crt(S, args.quad)
    return {"quadruple": args.quad, "crt": str(t), "log": [None if math.isnan(v) else v for v in to_log(t)]}, 0


def cmd_axioms(args, io: Inputs):
    S = io.space(args.space)
    rep = check_axioms(S, tol=args.tol)
    return rep.to_json(S), 0 if rep.ok else 1


def cmd_corner(args, io: Inputs):
    S = io.space(args.space)
    m, wit = corner_margin(S, with_witness=True)
    bound = 1 / S.K ** 2
    holds = m >= bound
    return {"margin": format_ext(m), "K": format_ext(S.K), "bound": format_ext(bound),
            "holds": holds, "witness": list(wit) if wit else None}, 0 if holds else 1


def cmd_equiv(args, io: Inputs):
    A, B = io.space(args.a), io.space(args.b)
    f = None
    if args.map:
        f = io.read(args.map)
        if not isinstance(f, dict):
            raise SpaceParseError("map file must be a JSON object from labels to labels")
    eq, wit = moebius_equivalent(A, B, f, with_witness=True)
    return {"equivalent": eq, "witness": list(wit) if wit else None}, 0 if eq else 1


def cmd_hausdorff_dim(args, io: Inputs):
    S = io.space(args.space)
    est = hausdorff_dim_estimate(S, dmin=args.dmin, dmax=args.dmax, grid=args.grid,
                                 exact_threshold=args.exact_threshold, workers=args.threads)
    return est.to_json(), 0


def _read_ball_cover(doc, S) -> BallCover:
    if not isinstance(doc, dict) or "balls" not in doc or "delta" not in doc:
        raise SpaceParseError('cover document needs "delta" and "balls"')
    items = tuple((S.index(str(b["center"])), as_ext(b["radius"])) for b in doc["balls"])
    return BallCover(items, as_ext(doc["delta"]), bool(doc.get("exact", True)))


def cmd_transport_hausdorff(args, io: Inputs):
    S = io.space(args.space)
    if args.cover:
        cover = _read_ball_cover(io.read(args.cover), S)
    else:
        if args.delta is None:
            raise UsageError("give --cover or --delta")
        cover = min_delta_cover(S, None, args.delta)
    out, dO, uncovered = transport_cover_involution(S, cover, args.o, args.eps)
    ok = not uncovered
    return {"ok": ok, "input": cover.to_json(S), "transported": out.to_json(dO),
            "uncovered": S.labels(uncovered)}, 0 if ok else 1


def _family(args, io, S):
    sets, meta = family_from_json(S, io.read(args.cover))
    s = args.s if args.s is not None else meta.get("s")
    c = getattr(args, "c", None)
    c = c if c is not None else meta.get("c")
    return sets, s, c


def cmd_nagata_verify(args, io: Inputs):
    S = io.space(args.space)
    sets, s, c = _family(args, io, S)
    if s is None or c is None:
        raise UsageError("verify needs s and c (flags or family file)")
    chk = verify_nagata_cover(S, sets, s, c, args.m)
    return chk.to_json(S), 0 if chk.ok else 1


def cmd_nagata_split(args, io: Inputs):
    S = io.space(args.space)
    sets, s, c = _family(args, io, S)
    if s is None:
        raise UsageError("split needs --s (flag or family file)")
    if c is None:
        from .qspace import diameter
        scale = S.K ** (2 * args.n) * s
        c = max(Fraction(1), max(diameter(S, b) for b in sets) / scale) if sets else Fraction(1)
    try:
        res = split_cover(S, sets, s, args.n, c)
    except PreconditionError as exc:
        return {"ok": False, "error": str(exc), "precondition": exc.check.to_json(S) if exc.check else None}, 1
    return {"ok": res.ok, "bound": format_ext(res.bound), "covers": res.covers,
            "families": [family_to_json(S, fam, s=s) for fam in res.families],
            "checks": [ch.to_json(S) for ch in res.checks]}, 0 if res.ok else 1


def cmd_nagata_hier(args, io: Inputs):
    S = io.space(args.space)
    try:
        H = build_hierarchical(S, args.r, args.n, args.c, exclude=args.exclude or ())
    except HierarchyBuildError as exc:
        return {"ok": False, "error": str(exc),
                "suggested_r": format_ext(exc.suggested_r) if exc.suggested_r else None}, 1
    rep = verify_hierarchical(S, H)
    return {"ok": rep.ok, "hierarchy": H.to_json(S), "verification": rep.to_json(S)}, 0 if rep.ok else 1


def cmd_nagata_transport(args, io: Inputs):
    S = io.space(args.space)
    r = args.r
    for _ in range(args.escalate + 1):
        try:
            H = build_hierarchical(S, r, args.n, args.c, exclude=[args.o])
            break
        except HierarchyBuildError as exc:
            if exc.suggested_r is None:
                raise
            r = max(exc.suggested_r, 2 * r)
    else:
        return {"ok": False, "error": f"hierarchy build failed up to r = {r}"}, 1
    try:
        res = transport_cover_nagata(S, args.o, H, args.s, bilipschitz=args.bilipschitz)
    except WindowError as exc:
        return {"ok": False, "error": str(exc)}, 1
    out = res.to_json(S)
    out["r"] = format_ext(H.r)
    return out, 0 if res.ok else 1


def cmd_nagata_brute(args, io: Inputs):
    S = io.space(args.space)
    m, cover = nagata_bruteforce(S, args.s, args.c, with_witness=True)
    return {"m": m, "cover": [S.labels(b) for b in cover or []]}, 0


def cmd_generate(args, io: Inputs):
    if args.spec:
        spec = GeneratorSpec.from_json(io.read(args.spec))
        S = generate(spec)
    else:
        params = {k: v for k, v in (("n", args.n), ("step", args.step), ("depth", args.depth),
                                     ("branching", args.branching), ("eps", args.eps),
                                     ("o", args.o), ("eta", args.eta)) if v is not None}
        if args.kind in ("tree-ultrametric", "random-perturbed"):
            params["seed"] = args.seed
        if args.kind in ("snowflake", "involuted", "random-perturbed"):
            if not getattr(args, "from_"):
                raise UsageError(f"{args.kind} needs --from base.json")
            from .generators import gen_involuted, gen_random_perturbed, gen_snowflake
            base = io.space(args.from_)
            if args.kind == "snowflake":
                S = gen_snowflake(base, Fraction(params.get("eps", "2")))
            elif args.kind == "involuted":
                S = gen_involuted(base, params.get("o", base.points[base.ordinary[len(base.ordinary) // 2]]))
            else:
                S = gen_random_perturbed(base, args.seed, Fraction(params.get("eta", "1/10")))
            if args.extend:
                S = extend_with_infinity(S)
        else:
            S = generate(GeneratorSpec(args.kind, params, extend=args.extend))
    text = dumps_space(S)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        return {"ok": True, "output": args.output, "points": S.n, "exact": S.exact}, 0
    return text, 0


def cmd_corpus(args, io: Inputs):
    from .corpus import emit
    paths = emit(args.dir)
    return {"ok": True, "written": len(paths), "dir": str(args.dir)}, 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    env_threads = os.environ.get("MOEBIUSLAB_THREADS")
    p = argparse.ArgumentParser(prog="moebiuslab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"moebiuslab {__version__}")
    p.add_argument("--seed", type=int, default=0, help="seed for generators (default 0)")
    p.add_argument("--threads", type=_pos_int, default=int(env_threads) if env_threads and env_threads.isdigit()
                   and int(env_threads) > 0 else 1, help="worker processes (default $MOEBIUSLAB_THREADS or 1)")
    p.add_argument("--format", choices=["json"], default="json")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("validate", help="check a space file")
    q.add_argument("space")
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("transform", help="rescale, involute, extend or normalize a space")
    q.add_argument("op", choices=["rescale", "involute", "extend", "normalize"])
    q.add_argument("space", nargs="?", default="-", help="space file, '-' for stdin (default)")
    q.add_argument("--lam", type=_rat)
    q.add_argument("--o")
    q.add_argument("--label", default="inf")
    q.add_argument("--A", nargs=3, metavar=("OMEGA", "ALPHA", "BETA"))
    q.set_defaults(func=cmd_transform)

    q = sub.add_parser("crt", help="cross-ratio triple of a quadruple")
    q.add_argument("space")
    q.add_argument("quad", nargs=4, metavar="P")
    q.set_defaults(func=cmd_crt)

    q = sub.add_parser("axioms", help="check the four Moebius-structure conditions")
    q.add_argument("space")
    q.add_argument("--tol", type=float, default=1e-12)
    q.set_defaults(func=cmd_axioms)

    q = sub.add_parser("corner", help="corner margin against 1/K^2")
    q.add_argument("space")
    q.set_defaults(func=cmd_corner)

    q = sub.add_parser("equiv", help="Moebius equivalence under a label map")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--map")
    q.set_defaults(func=cmd_equiv)

    q = sub.add_parser("hausdorff-dim", help="box-counting dimension estimate")
    q.add_argument("space")
    q.add_argument("--dmin", type=_rat)
    q.add_argument("--dmax", type=_rat)
    q.add_argument("--grid", type=_pos_int)
    q.add_argument("--exact-threshold", type=int, default=20)
    q.set_defaults(func=cmd_hausdorff_dim)

    q = sub.add_parser("transport-hausdorff", help="move a delta-cover to the involution at o")
    q.add_argument("space")
    q.add_argument("--o", required=True)
    q.add_argument("--eps", type=_rat, required=True)
    q.add_argument("--delta", type=_rat)
    q.add_argument("--cover")
    q.set_defaults(func=cmd_transport_hausdorff)

    nag = sub.add_parser("nagata", help="Nagata covers").add_subparsers(dest="nagata_cmd", required=True)
    q = nag.add_parser("verify")
    q.add_argument("space")
    q.add_argument("--cover", required=True)
    q.add_argument("--s", type=_rat)
    q.add_argument("--c", type=_rat)
    q.add_argument("--m", type=int, required=True)
    q.set_defaults(func=cmd_nagata_verify)
    q = nag.add_parser("split")
    q.add_argument("space")
    q.add_argument("--cover", required=True)
    q.add_argument("--s", type=_rat)
    q.add_argument("--c", type=_rat)
    q.add_argument("--n", type=int, required=True)
    q.set_defaults(func=cmd_nagata_split)
    q = nag.add_parser("hier")
    q.add_argument("space")
    q.add_argument("--r", type=_rat, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--c", type=_rat, required=True)
    q.add_argument("--exclude", nargs="*")
    q.set_defaults(func=cmd_nagata_hier)
    q = nag.add_parser("transport")
    q.add_argument("space")
    q.add_argument("--o", required=True)
    q.add_argument("--s", type=_rat, required=True)
    q.add_argument("--r", type=_rat, default=Fraction(256))
    q.add_argument("--n", type=int, default=1)
    q.add_argument("--c", type=_rat, default=Fraction(2 ** 14))
    q.add_argument("--escalate", type=int, default=4, help="times to raise r after a failed build")
    q.add_argument("--bilipschitz", action="store_true")
    q.set_defaults(func=cmd_nagata_transport)
    q = nag.add_parser("brute")
    q.add_argument("space")
    q.add_argument("--s", type=_rat, required=True)
    q.add_argument("--c", type=_rat, required=True)
    q.set_defaults(func=cmd_nagata_brute)

    q = sub.add_parser("generate", help="write a generated space")
    q.add_argument("kind", choices=KINDS)
    q.add_argument("--n", type=int)
    q.add_argument("--step")
    q.add_argument("--depth", type=int)
    q.add_argument("--branching", type=int)
    q.add_argument("--eps")
    q.add_argument("--o")
    q.add_argument("--eta")
    q.add_argument("--from", dest="from_", metavar="BASE")
    q.add_argument("--spec", help="generator spec JSON instead of flags")
    q.add_argument("--extend", action="store_true", help="add a point at infinity")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_generate)

    q = sub.add_parser("corpus", help="corpus tools")
    q.add_argument("action", choices=["emit"])
    q.add_argument("dir")
    q.set_defaults(func=cmd_corpus)
    return p


def _emit(payload) -> None:
    if isinstance(payload, str):
        sys.stdout.write(payload)
    else:
        sys.stdout.write(json.dumps(payload, ensure_ascii=False, sort_keys=False) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    io = Inputs()
    try:
        payload, code = args.func(args, io)
    except InvalidSpaceError as exc:
        print(f"error: invalid space: {exc}", file=sys.stderr)
        _emit({"ok": False, "tool": "moebiuslab", "version": __version__, "inputs": io.digests,
               **exc.report.to_json()})
        return 1
    except (SpaceParseError, UsageError, InadmissibleQuadruple, KeyError, ValueError,
            ArithmeticError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        _emit({"ok": False, "error": msg, "tool": "moebiuslab", "version": __version__, "inputs": io.digests})
        return 2
    if isinstance(payload, dict):
        command = args.command if args.command != "nagata" else f"nagata {args.nagata_cmd}"
        payload = {"tool": "moebiuslab", "version": __version__, "command": command,
                   "inputs": io.digests, **payload}
    _emit(payload)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
