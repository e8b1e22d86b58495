"""Command-line front end.

Exit codes: 0 success, 1 violation found, 2 infeasible instance, 3 no
minimal-cover-yielding partition, 4 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib.metadata import PackageNotFoundError, version

from . import lifting, seqlift, serialize, verify
from .errors import BiliftError, Infeasible, NotMinimalCover, SearchCapExceeded
from .instance import EXHAUSTIVE_CAP, cover_context, find_cover_partitions, no_cover_certificate
from .lifted import LiftedCut, build_lifted_cut
from .seed import ComparisonCut, SeedCut, build_crt

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INFEASIBLE = 2
EXIT_NO_COVER = 3
EXIT_PARSE = 4

DEFAULT_SEED = 0
DEFAULT_SAMPLES = 10_000
DEFAULT_TOL = 1e-9
DEFAULT_GRID = 401


def _version() -> str:
    try:
        return version("bilift")
    except PackageNotFoundError:
        return "unknown"


def _config(args, **extra) -> dict:
    cfg = {
        "command": args.command,
        "version": _version(),
        "instance": args.instance,
        "seed": args.seed,
        "samples": args.samples,
        "tol": args.tol,
        "grid": args.grid,
        "exhaustive_cap": EXHAUSTIVE_CAP,
        "extreme_cap": verify.EXTREME_CAP,
    }
    cfg.update(extra)
    return cfg


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise serialize.ParseError(f"cannot read {path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _partitions(inst, part):
    if part is not None:
        return [part]
    try:
        parts = find_cover_partitions(inst)
    except Infeasible as exc:
        raise _Exit(EXIT_INFEASIBLE, f"infeasible: {exc}") from exc
    except SearchCapExceeded as exc:
        raise _Exit(EXIT_NO_COVER, f"no cover found: {exc}") from exc
    if not parts:
        cert = no_cover_certificate(inst)
        raise _Exit(EXIT_NO_COVER, f"no cover: {cert.note} ({cert.candidates_checked} candidates checked)")
    return parts


def _cuts(inst, part):
    out = []
    for p in _partitions(inst, part):
        try:
            cut = build_lifted_cut(inst, p)
        except NotMinimalCover as exc:
            raise _Exit(EXIT_NO_COVER, str(exc)) from exc
        out.append((p, cut))
    return out


def cmd_gen_cut(args) -> int:
    inst, part, _ = serialize.parse_instance(_read(args.instance))
    cuts = _cuts(inst, part)
    doc = {
        "config": _config(args),
        "instance": serialize.instance_to_json(inst),
        "cuts": [{"partition": serialize.partition_to_json(p), "cut": c.to_json()} for p, c in cuts],
    }
    _emit(serialize.dumps(doc), args.out)
    return EXIT_OK


def cmd_lift(args) -> int:
    inst, part, _ = serialize.parse_instance(_read(args.instance))
    entries = []
    for p, cut in _cuts(inst, part):
        cov = cut.cover
        entries.append(
            {
                "partition": serialize.partition_to_json(p),
                "cover": {
                    "I": [i + 1 for i in cov.index],
                    "delta": cov.delta,
                    "d_i": list(cov.d_i),
                    "i_strict": [i + 1 for i in cov.i_strict],
                    "i0": None if cov.i0 is None else cov.i0 + 1,
                    "l_plus": cov.l_plus,
                    "l_minus": cov.l_minus,
                },
                "binary_points": lifting.binary_points(cov),
                "gammas": [g.to_json() for g in cut.gammas],
            }
        )
    doc = {"config": _config(args), "lifting": entries}
    _emit(serialize.dumps(doc), args.out)
    return EXIT_OK


def _load_cuts(obj: dict):
    if "cuts" in obj:
        return [c["cut"] for c in obj["cuts"]]
    return [obj]


def _cut_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "relaxed_cover":
        return ComparisonCut(
            index=tuple(int(i) - 1 for i in obj["I"]),
            coeffs=tuple(float(c) for c in obj["coeffs"]),
            rhs=float(obj.get("rhs", 1.0)),
        )
    if kind in ("bilinear_cover", "lifted_bilinear_cover"):
        if "cover" in obj:
            return LiftedCut.from_json(obj)
        return SeedCut.from_json(obj)
    raise serialize.ParseError(f"unknown cut type {kind!r}")


def cmd_verify(args) -> int:
    inst, part, _ = serialize.parse_instance(_read(args.instance))
    if args.cut:
        try:
            raw = json.loads(_read(args.cut))
            cuts = [_cut_from_json(c) for c in _load_cuts(raw)]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, serialize.ParseError):
                raise
            raise serialize.ParseError(f"malformed cut file: {exc}") from exc
    else:
        cuts = [c for _, c in _cuts(inst, part)]
    opts = verify.ValidityOptions(samples=args.samples, seed=args.seed, tol=args.tol)
    reports = [verify.check_validity(c, inst, opts) for c in cuts]
    doc = {
        "config": _config(args, cut=args.cut, sampler=opts.sampler),
        "reports": [r.to_json() for r in reports],
        "violated": any(r.violated for r in reports),
    }
    _emit(serialize.dumps(doc), args.out)
    return EXIT_VIOLATION if doc["violated"] else EXIT_OK


def cmd_strength(args) -> int:
    inst, _, raw = serialize.parse_instance(_read(args.instance))
    obj = raw.get("objective") or {}
    p = obj.get("p", [1.0] * inst.n)
    q = obj.get("q", [1.0] * inst.n)
    try:
        objective = verify.LinearObjective(tuple(p), tuple(q))
    except (BiliftError, TypeError, ValueError) as exc:
        raise serialize.ParseError(f"bad objective: {exc}") from exc
    if inst.is_empty():
        raise _Exit(EXIT_INFEASIBLE, "infeasible: the set is empty")
    try:
        rep = verify.approx_ratio(inst, objective)
    except NotMinimalCover as exc:
        raise _Exit(EXIT_NO_COVER, str(exc)) from exc
    except BiliftError as exc:
        raise serialize.ParseError(str(exc)) from exc
    doc = {
        "config": _config(args),
        "objective": {"p": list(objective.p), "q": list(objective.q)},
        "strength": rep.to_json(),
        "within_factor_4": bool(1 - 1e-6 <= rep.ratio <= 4 + 1e-6),
    }
    if all(v > 0 for v in inst.a) and inst.d > 0:
        doc["comparison_cut"] = build_crt(inst).to_json()
    _emit(serialize.dumps(doc), args.out)
    return EXIT_OK if doc["within_factor_4"] else EXIT_VIOLATION


def lifting_table(cover, steps: int, lo: float | None = None, hi: float | None = None):
    """Samples for the lifting plot; binary points inside the range are included."""
    pts = lifting.binary_points(cover)
    lo = -cover.delta - 1.0 if lo is None else lo
    hi = pts[-1] + 1.0 if hi is None else hi
    return lifting.sample_lifting(cover, lo, hi, steps, extra=pts)


def cmd_plot(args) -> int:
    inst, part, _ = serialize.parse_instance(_read(args.instance))
    p = _partitions(inst, part)[0]
    cover = cover_context(inst, p)
    samples = lifting_table(cover, args.grid, args.lo, args.hi)
    header = {
        "command": args.command,
        "version": _version(),
        "grid": args.grid,
        "lo": samples[0].delta,
        "hi": samples[-1].delta,
        "partition": serialize.partition_to_json(p),
        "delta": cover.delta,
        "l_plus": cover.l_plus,
        "l_minus": cover.l_minus,
    }
    text = "# " + json.dumps(json.loads(serialize.dumps(header)), sort_keys=True) + "\n"
    text += lifting.lifting_csv(samples)
    _emit(text, args.out)
    bad = any(s.phi is not lifting.NEG_INFINITY and s.psi < s.phi - 1e-9 for s in samples)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_seqlift(args) -> int:
    inst, seed, k = serialize.parse_bipartite(_read(args.instance))
    var, idx = k
    fixed = seed.fix_x if var == "x" else seed.fix_y
    value = fixed[idx]
    if value in (0.0, 1.0):
        res = seqlift.lift_coefficient(
            inst,
            seed,
            k,
            grid=args.grid,
            validation_samples=args.samples,
            rng_seed=args.seed,
        )
        doc = {"config": _config(args), "lift": res.to_json()}
        code = EXIT_OK if res.validation.passed else EXIT_VIOLATION
    else:
        cert = seqlift.nonliftable_certificate(inst, seed, k, samples=args.samples, rng_seed=args.seed)
        doc = {
            "config": _config(args),
            "certificate": None if cert is None else cert.to_json(),
            "liftable": cert is None,
        }
        code = EXIT_OK
    _emit(serialize.dumps(doc), args.out)
    return code


def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v

    return conv


class _Parser(argparse.ArgumentParser):
    """Argument errors count as malformed input, not as argparse's usual 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bilift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, grid_default=DEFAULT_GRID):
        p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
        p.add_argument("--samples", type=_positive(int), default=DEFAULT_SAMPLES, help="sample count")
        p.add_argument("--tol", type=_positive(float), default=DEFAULT_TOL, help="violation tolerance")
        p.add_argument("--grid", type=_positive(int), default=grid_default, help="grid resolution")
        return p

    p = common(sub.add_parser("gen-cut", help="emit lifted bilinear cover cuts"))
    p.set_defaults(func=cmd_gen_cut)
    p = common(sub.add_parser("lift", help="report cover quantities and lifting terms"))
    p.set_defaults(func=cmd_lift)
    p = common(sub.add_parser("verify", help="check cut validity on extreme and sampled points"))
    p.add_argument("--cut", help="cut JSON (default: the generated cuts)")
    p.set_defaults(func=cmd_verify)
    p = common(sub.add_parser("strength", help="compare the cut relaxation to the true optimum"))
    p.set_defaults(func=cmd_strength)
    p = common(sub.add_parser("plot-lifting", help="CSV of the lifting function and its bound"))
    p.add_argument("--lo", type=float, help="smallest shift (default: -delta - 1)")
    p.add_argument("--hi", type=float, help="largest shift (default: last binary point + 1)")
    p.set_defaults(func=cmd_plot)
    p = common(sub.add_parser("seqlift", help="sequentially lift one fixed variable"), seqlift.GRID_POINTS)
    p.set_defaults(func=cmd_seqlift)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "plot-lifting" and args.grid < 2:
        parser.error("--grid must be at least 2")
    try:
        return args.func(args)
    except _Exit as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except serialize.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BiliftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
