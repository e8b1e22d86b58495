"""Lifting function of the bilinear cover inequality and its two-slope bound.

``phi(delta)`` is the largest violation ``-1 - lhs`` of the seed cut over the
cover pairs when the cover right-hand side is shifted to ``d_lambda - delta``.
``psi`` is the subadditive piecewise-linear majorant with breakpoints ``-delta``
and ``0`` and slopes ``l_plus``, ``l_minus``, ``l_plus``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded
from .instance import CoverContext
from .seed import cover_coefficient

#: Largest cover size for the exact positive-shift enumeration.
PHI_ENUM_CAP = 24

# relative slack on the "required product <= 1" feasibility test
_FEAS_RTOL = 1e-12


class _NegInfinity:
    """Tagged value for an empty feasible region (``phi = -inf``).

    Orders below every real number; arithmetic on it raises ``TypeError``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INFINITY"

    def __str__(self):
        return "-inf"

    def __float__(self):
        return float("-inf")

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("NEG_INFINITY")

    def __reduce__(self):
        return (_NegInfinity, ())


NEG_INFINITY = _NegInfinity()


def _closed_form_nonpositive(cover: CoverContext, delta: float) -> float:
    delta_c = cover.delta
    a_max = max(cover.a)
    rest = max(a_max - delta_c, 0.0)
    num = math.sqrt(rest) - math.sqrt(max(rest - delta, 0.0))
    return num / (math.sqrt(a_max) - math.sqrt(rest))


def phi_enumerate(cover: CoverContext, delta: float):
    """Exact ``phi`` by enumerating extreme-point patterns of the cover pairs.

    Every pattern has one free pair ``j`` with product ``t`` and a zero set
    ``S``; the other pairs sit at product one.  Valid for any ``delta``.
    """
    k = cover.k
    if k > PHI_ENUM_CAP:
        raise CapExceeded(f"cover size {k} exceeds enumeration cap {PHI_ENUM_CAP}")
    a = cover.a_array
    c = np.array([cover_coefficient(ai, di) for ai, di in zip(cover.a, cover.d_i)])
    total = math.fsum(cover.a)
    target = cover.d_lambda - delta
    masks = np.arange(1 << k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
    sum_a = bits.astype(float) @ a
    sum_c = bits.astype(float) @ c
    best = -math.inf
    for j in range(k):
        sel = ~bits[:, j]
        rest = total - sum_a[sel] - a[j]
        need = (target - rest) / a[j]
        ok = need <= 1.0 + _FEAS_RTOL * max(1.0, abs(target) / a[j])
        if not np.any(ok):
            continue
        t = np.clip(need[ok], 0.0, 1.0)
        vals = sum_c[sel][ok] + c[j] * (1.0 - np.sqrt(t)) - 1.0
        best = max(best, float(vals.max()))
    if best == -math.inf:
        return NEG_INFINITY
    return best


def phi_exact(cover: CoverContext, delta: float):
    """Lifting function value, or :data:`NEG_INFINITY` when ``delta < -delta_cover``."""
    delta = float(delta)
    if delta < -cover.delta:
        return NEG_INFINITY
    if delta <= 0:
        return _closed_form_nonpositive(cover, delta)
    return phi_enumerate(cover, delta)


def psi(cover: CoverContext, delta):
    """Two-slope subadditive upper bound; accepts scalars or arrays."""
    d = np.asarray(delta, dtype=float)
    lp, lm, D = cover.l_plus, cover.l_minus, cover.delta
    out = np.where(d >= 0, lp * d, np.where(d >= -D, lm * d, lp * (d + D) - 1.0))
    if out.ndim == 0:
        return float(out)
    return out


def binary_points(cover: CoverContext) -> list[float]:
    """Shifts ``sum_{i in S} a_i - delta`` at which the optimum is fully binary."""
    k = cover.k
    if k > PHI_ENUM_CAP:
        raise CapExceeded(f"cover size {k} exceeds enumeration cap {PHI_ENUM_CAP}")
    pts = set()
    for r in range(k + 1):
        for S in itertools.combinations(range(k), r):
            pts.add(math.fsum(cover.a[i] for i in S) - cover.delta)
    return sorted(pts)


@dataclass(frozen=True)
class LiftingSample:
    delta: float
    phi: object  # float or NEG_INFINITY
    psi: float


def sample_lifting(
    cover: CoverContext,
    delta_lo: float,
    delta_hi: float,
    steps: int,
    extra: Iterable[float] = (),
) -> list[LiftingSample]:
    """``phi`` and ``psi`` on a uniform grid (endpoints included) plus ``extra`` points."""
    if not delta_lo < delta_hi:
        raise ValueError("delta_lo must be smaller than delta_hi")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    grid = list(np.linspace(delta_lo, delta_hi, steps))
    grid_set = set(grid)
    grid += [float(e) for e in extra if delta_lo <= e <= delta_hi and e not in grid_set]
    grid.sort()
    return [LiftingSample(float(t), phi_exact(cover, t), psi(cover, t)) for t in grid]


def _fmt(v) -> str:
    if v is NEG_INFINITY:
        return "-inf"
    return f"{float(v):.17g}"


def lifting_csv(samples: Sequence[LiftingSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "phi", "psi"])
    for s in samples:
        w.writerow([_fmt(s.delta), _fmt(s.phi), _fmt(s.psi)])
    return buf.getvalue()


def read_lifting_csv(text: str) -> list[LiftingSample]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    out = []
    for r in rows:
        phi = NEG_INFINITY if r["phi"] == "-inf" else float(r["phi"])
        out.append(LiftingSample(float(r["delta"]), phi, float(r["psi"])))
    return out
