"""File formats: instance parsing and deterministic JSON output.

Indices in files are 1-based.  Floats are written with 17 significant digits
so that every value round-trips exactly.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import BiliftError
from .instance import Partition, SeparableInstance
from .lifting import NEG_INFINITY
from .seqlift import BipartiteInstance, SeedInequality


class ParseError(BiliftError, ValueError):
    """Input file is malformed or inconsistent."""


def _num(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    if v == int(v) and abs(v) < 1e16:
        return f"{int(v)}.0"
    return format(v, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if obj is NEG_INFINITY:
        return '"-inf"'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    return _encode(obj, indent, 0) + "\n"


def _load(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    return obj


def _real(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{what} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise ParseError(f"{what} must be finite")
    return v


def _reals(v, what: str) -> list[float]:
    if not isinstance(v, list) or not v:
        raise ParseError(f"{what} must be a nonempty list of numbers")
    return [_real(t, f"{what}[{i + 1}]") for i, t in enumerate(v)]


def _indices(v, n: int, what: str) -> list[int]:
    if not isinstance(v, list):
        raise ParseError(f"{what} must be a list of 1-based indices")
    out = []
    for t in v:
        if isinstance(t, bool) or not isinstance(t, int) or not 1 <= t <= n:
            raise ParseError(f"{what} holds an invalid index {t!r}")
        out.append(t - 1)
    return out


def parse_instance(text: str) -> tuple[SeparableInstance, Partition | None, dict]:
    """Read ``{"a": [...], "d": ..., "partition": {...}?, "objective": {...}?}``.

    Returns the instance, the optional partition and the raw object.
    """
    obj = _load(text)
    if "a" not in obj or "d" not in obj:
        raise ParseError("instance needs keys 'a' and 'd'")
    a = _reals(obj["a"], "a")
    d = _real(obj["d"], "d")
    inst = SeparableInstance(tuple(a), d)
    part = None
    if obj.get("partition") is not None:
        p = obj["partition"]
        if not isinstance(p, dict) or "I" not in p:
            raise ParseError("partition must be an object with at least 'I'")
        I = _indices(p["I"], inst.n, "partition.I")
        J1 = _indices(p.get("J1", []), inst.n, "partition.J1")
        J0 = _indices(p["J0"], inst.n, "partition.J0") if "J0" in p else None
        try:
            part = Partition.build(inst, I, J0, J1)
        except BiliftError as exc:
            raise ParseError(str(exc)) from exc
    return inst, part, obj


def instance_to_json(inst: SeparableInstance, part: Partition | None = None) -> dict:
    out: dict = {"a": list(inst.a), "d": inst.d}
    if part is not None:
        out["partition"] = partition_to_json(part)
    return out


def partition_to_json(part: Partition) -> dict:
    return {
        "I": [i + 1 for i in part.I],
        "J0": [i + 1 for i in part.J0],
        "J1": [i + 1 for i in part.J1],
        "d_lambda": part.d_lambda,
    }


def _fixings(v, size: int, what: str) -> dict[int, float]:
    if v is None:
        return {}
    out: dict[int, float] = {}
    if isinstance(v, list):
        if len(v) != size:
            raise ParseError(f"{what} must list {size} entries (null for free)")
        for i, t in enumerate(v):
            if t is not None:
                out[i] = _real(t, f"{what}[{i + 1}]")
    elif isinstance(v, dict):
        for key, t in v.items():
            try:
                i = int(key) - 1
            except ValueError as exc:
                raise ParseError(f"{what} key {key!r} is not an index") from exc
            if not 0 <= i < size:
                raise ParseError(f"{what} index {key!r} out of range")
            out[i] = _real(t, f"{what}[{key}]")
    else:
        raise ParseError(f"{what} must be a list or an object")
    for i, t in out.items():
        if not 0 <= t <= 1:
            raise ParseError(f"{what}[{i + 1}] must lie in [0, 1]")
    return out


def _seed_from_terms(spec: dict, m: int, n: int, fix_x, fix_y) -> SeedInequality:
    if not isinstance(spec, dict) or "terms" not in spec or "rhs" not in spec:
        raise ParseError("seed must be an object with 'terms' and 'rhs'")
    rhs = _real(spec["rhs"], "seed.rhs")
    C = [i for i in range(m) if i not in fix_x]
    D = [j for j in range(n) if j not in fix_y]
    cpos = {g: p for p, g in enumerate(C)}
    dpos = {g: p for p, g in enumerate(D)}
    sqrt_terms, x_terms, y_terms = [], [], []
    const = 0.0

    def free_index(t, key, pos, what):
        if key not in t:
            raise ParseError(f"seed term needs '{key}'")
        i = t[key]
        if isinstance(i, bool) or not isinstance(i, int) or (i - 1) not in pos:
            raise ParseError(f"seed term {what} index {i!r} is not a free variable")
        return pos[i - 1]

    for t in spec["terms"]:
        if not isinstance(t, dict) or "kind" not in t:
            raise ParseError("each seed term must be an object with 'kind'")
        kind = t["kind"]
        if kind == "sqrt":
            coef = _real(t.get("coef", 1.0), "seed term coef")
            sqrt_terms.append((free_index(t, "x", cpos, "x"), free_index(t, "y", dpos, "y"), coef))
        elif kind == "x":
            x_terms.append((free_index(t, "i", cpos, "x"), _real(t.get("coef", 1.0), "seed term coef")))
        elif kind == "y":
            y_terms.append((free_index(t, "j", dpos, "y"), _real(t.get("coef", 1.0), "seed term coef")))
        elif kind == "const":
            const += _real(t.get("value", 0.0), "seed const")
        else:
            raise ParseError(f"unknown seed term kind {kind!r}")

    def h(XC, YD):
        XC = np.atleast_2d(XC)
        YD = np.atleast_2d(YD)
        out = np.full(max(len(XC), len(YD)), const)
        for p, q, coef in sqrt_terms:
            out = out + coef * np.sqrt(np.maximum(XC[:, p] * YD[:, q], 0.0))
        for p, coef in x_terms:
            out = out + coef * XC[:, p]
        for q, coef in y_terms:
            out = out + coef * YD[:, q]
        return out

    def h_exact(xc, yd):
        total = Fraction(const)
        for p, coef in x_terms:
            total += Fraction(coef) * xc[p]
        for q, coef in y_terms:
            total += Fraction(coef) * yd[q]
        return total

    # square roots have no exact rational form
    exact = None if sqrt_terms else h_exact
    return SeedInequality(h=h, rhs=rhs, fix_x=fix_x, fix_y=fix_y, h_exact=exact)


def parse_bipartite(text: str):
    """Read a general instance with seed and lifted variable.

    Schema::

        {"Q": [[...]], "a": [...], "b": [...], "c": ...,
         "fix": {"x": [null | value, ...], "y": [...]},
         "k": 3 | {"var": "y", "index": 2},
         "seed": {"rhs": r, "terms": [{"kind": "sqrt", "x": i, "y": j, "coef": w}, ...]}}

    Returns ``(instance, seed, k)`` with ``k`` in library form.
    """
    obj = _load(text)
    for key in ("Q", "a", "b", "c", "fix", "k", "seed"):
        if key not in obj:
            raise ParseError(f"instance needs key {key!r}")
    Q = obj["Q"]
    if not isinstance(Q, list) or not Q or not all(isinstance(r, list) for r in Q):
        raise ParseError("Q must be a nonempty list of rows")
    rows = [_reals(r, "Q row") for r in Q]
    if len({len(r) for r in rows}) != 1:
        raise ParseError("Q rows must have equal length")
    try:
        inst = BipartiteInstance(np.array(rows), _reals(obj["a"], "a"), _reals(obj["b"], "b"), _real(obj["c"], "c"))
    except BiliftError as exc:
        raise ParseError(str(exc)) from exc
    fix = obj["fix"]
    if not isinstance(fix, dict):
        raise ParseError("fix must be an object with 'x' and/or 'y'")
    fix_x = _fixings(fix.get("x"), inst.m, "fix.x")
    fix_y = _fixings(fix.get("y"), inst.n, "fix.y")
    kspec = obj["k"]
    if isinstance(kspec, dict):
        var = kspec.get("var", "x")
        idx = kspec.get("index")
    else:
        var, idx = "x", kspec
    if var not in ("x", "y") or isinstance(idx, bool) or not isinstance(idx, int):
        raise ParseError("k must be an x-index or {'var': 'x'|'y', 'index': i}")
    fixed = fix_x if var == "x" else fix_y
    if (idx - 1) not in fixed:
        raise ParseError(f"lifted variable {var}[{idx}] must be fixed")
    seed = _seed_from_terms(obj["seed"], inst.m, inst.n, fix_x, fix_y)
    return inst, seed, (var, idx - 1)
