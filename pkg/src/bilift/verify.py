"""Validity and strength harnesses for cuts on separable bilinear sets.

Extreme points of the set have every pair at a binary product except at most
one, which is enumerated directly; random feasible points come from rejection
sampling or from a segment sampler that stays efficient when the feasible
region is a tiny corner of the box.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import CapExceeded, NotMinimalCover, PreconditionViolated
from .instance import SeparableInstance, is_minimal_cover
from .seed import cover_coefficient

log = logging.getLogger(__name__)

#: Largest ``n`` accepted by the extreme-point enumeration.
EXTREME_CAP = 14

# rows per chunk of enumerated points
_CHUNK = 1 << 16
# tolerance on the tight product being inside [0, 1]
_T_TOL = 1e-12


@dataclass(frozen=True)
class PointPair:
    """A box point ``(x, y)`` with its recomputed constraint slack."""

    x: np.ndarray
    y: np.ndarray
    slack: float

    @classmethod
    def of(cls, instance: SeparableInstance, x, y) -> "PointPair":
        x = np.asarray(x, dtype=float).copy()
        y = np.asarray(y, dtype=float).copy()
        if x.shape != (instance.n,) or y.shape != (instance.n,):
            raise PreconditionViolated(f"point must have {instance.n} pairs")
        return cls(x, y, float(instance.slack(x, y)[0]))

    def to_json(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "slack": self.slack}


@dataclass(frozen=True)
class LinearObjective:
    """Nonnegative costs of ``sum p_i x_i + q_i y_i``."""

    p: tuple[float, ...]
    q: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(v) for v in np.ravel(self.p))
        q = tuple(float(v) for v in np.ravel(self.q))
        if len(p) != len(q):
            raise PreconditionViolated("p and q must have equal length")
        if any(v < 0 for v in p + q):
            raise PreconditionViolated("objective costs must be nonnegative")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def value(self, X, Y) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return X @ np.asarray(self.p) + Y @ np.asarray(self.q)


# ---------------------------------------------------------------------------
# extreme points


def _digits(codes: np.ndarray, m: int) -> np.ndarray:
    return (codes[:, None] // (4 ** np.arange(m, dtype=np.int64))) % 4


def iter_extreme_points(
    instance: SeparableInstance, cap: int = EXTREME_CAP
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(X, Y)`` chunks of feasible extreme-point representatives.

    Other pairs take the patterns (0,0), (0,1), (1,0), (1,1); the free pair is
    placed on the tight product ``t`` as (t, 1), (1, t) and (sqrt t, sqrt t).
    Fully binary feasible corners are included.
    """
    n = instance.n
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the extreme-point cap {cap}")
    a = instance.coeffs
    d = instance.d
    # binary corners
    total = 4**n
    for start in range(0, total, _CHUNK):
        dig = _digits(np.arange(start, min(total, start + _CHUNK), dtype=np.int64), n)
        X = (dig >> 1).astype(float)
        Y = (dig & 1).astype(float)
        ok = (X * Y) @ a >= d
        if np.any(ok):
            yield X[ok], Y[ok]
    # one fractional pair
    m = n - 1
    others_total = 4**m
    for i in range(n):
        if a[i] == 0:
            continue
        rest_idx = [j for j in range(n) if j != i]
        for start in range(0, others_total, _CHUNK):
            dig = _digits(
                np.arange(start, min(others_total, start + _CHUNK), dtype=np.int64), m
            )
            xo = (dig >> 1).astype(float)
            yo = (dig & 1).astype(float)
            rest = (xo * yo) @ a[rest_idx] if m else np.zeros(len(dig))
            t = (d - rest) / a[i]
            ok = (t >= -_T_TOL) & (t <= 1 + _T_TOL)
            if not np.any(ok):
                continue
            t = np.clip(t[ok], 0.0, 1.0)
            xo, yo = xo[ok], yo[ok]
            r = np.sqrt(t)
            k = len(t)
            X = np.empty((3 * k, n))
            Y = np.empty((3 * k, n))
            X[:, rest_idx] = np.tile(xo, (3, 1))
            Y[:, rest_idx] = np.tile(yo, (3, 1))
            X[:, i] = np.concatenate([t, np.ones(k), r])
            Y[:, i] = np.concatenate([np.ones(k), t, r])
            yield X, Y


def extreme_point_arrays(instance: SeparableInstance, cap: int = EXTREME_CAP):
    chunks = list(iter_extreme_points(instance, cap))
    if not chunks:
        return np.empty((0, instance.n)), np.empty((0, instance.n))
    return np.vstack([c[0] for c in chunks]), np.vstack([c[1] for c in chunks])


def enumerate_extreme_points(
    instance: SeparableInstance, cap: int = EXTREME_CAP
) -> list[PointPair]:
    """All extreme-point representatives as :class:`PointPair` objects."""
    X, Y = extreme_point_arrays(instance, cap)
    S = instance.slack(X, Y) if len(X) else np.empty(0)
    return [PointPair(X[r], Y[r], float(S[r])) for r in range(len(X))]


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class FeasibleSample(Sequence):
    """Sampled feasible points plus the bookkeeping of how they were drawn."""

    X: np.ndarray
    Y: np.ndarray
    slack: np.ndarray
    requested: int
    draws: int
    method: str
    seed: int
    low_acceptance: bool

    @property
    def acceptance_rate(self) -> float:
        return len(self.X) / self.draws if self.draws else 0.0

    def __len__(self):
        return len(self.X)

    def __getitem__(self, r):
        return PointPair(self.X[r], self.Y[r], float(self.slack[r]))

    def report(self) -> dict:
        return {
            "requested": self.requested,
            "returned": len(self),
            "draws": self.draws,
            "method": self.method,
            "seed": self.seed,
            "low_acceptance": self.low_acceptance,
        }


def _rejection(slack_fn, dim, count, rng, min_rate, probe, max_draws):
    kept_x, kept_y = [], []
    got = draws = 0
    low = False
    while got < count:
        batch = int(min(max(2 * (count - got), 10_000), 1_000_000))
        X = rng.random((batch, dim))
        Y = rng.random((batch, dim))
        draws += batch
        ok = slack_fn(X, Y) >= 0
        kept_x.append(X[ok])
        kept_y.append(Y[ok])
        got += int(ok.sum())
        if draws >= probe and got < min_rate * draws:
            low = True
            break
        if draws >= max_draws:
            low = got < min_rate * draws
            break
    X = np.vstack(kept_x)[:count] if kept_x else np.empty((0, dim))
    Y = np.vstack(kept_y)[:count] if kept_y else np.empty((0, dim))
    return X, Y, draws, low


def _segment(slack_fn, anchor_x, anchor_y, count, rng, iters=60):
    """Move uniform box points toward the anchor until feasible.

    Along each segment the slack is monotone, so bisection finds the tight
    point; half of the draws keep it, the rest are pushed further in.
    """
    dim = len(anchor_x)
    X0 = rng.random((count, dim))
    Y0 = rng.random((count, dim))
    keep_tight = rng.random(count) < 0.5
    push = rng.random(count)
    dx = anchor_x[None, :] - X0
    dy = anchor_y[None, :] - Y0
    feasible0 = slack_fn(X0, Y0) >= 0
    lo = np.zeros(count)
    hi = np.ones(count)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = slack_fn(X0 + mid[:, None] * dx, Y0 + mid[:, None] * dy) >= 0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    s = np.where(keep_tight, hi, hi + push * (1.0 - hi))
    s = np.where(feasible0, 0.0, s)
    X = X0 + s[:, None] * dx
    Y = Y0 + s[:, None] * dy
    ok = slack_fn(X, Y) >= 0
    return X[ok], Y[ok]


def sample_feasible(
    instance: SeparableInstance,
    count: int,
    rng_seed: int = 0,
    method: str = "rejection",
    min_rate: float = 1e-4,
    probe: int = 100_000,
    max_draws: int = 10_000_000,
) -> FeasibleSample:
    """Random feasible points, deterministic for a fixed seed.

    ``method`` is ``"rejection"`` (uniform box, stops early when the acceptance
    rate after ``probe`` draws is below ``min_rate``), ``"segment"`` or
    ``"auto"`` (rejection, topped up by the segment sampler when short).
    """
    if count < 1:
        raise PreconditionViolated("count must be at least 1")
    if method not in ("rejection", "segment", "auto"):
        raise PreconditionViolated(f"unknown sampling method {method!r}")
    n = instance.n
    rng = np.random.default_rng(rng_seed)

    def slack_fn(X, Y):
        return (X * Y) @ instance.coeffs - instance.d

    anchor = (instance.coeffs > 0).astype(float)
    X = np.empty((0, n))
    Y = np.empty((0, n))
    draws = 0
    low = False
    used = "rejection" if method == "auto" else method
    if method in ("rejection", "auto"):
        # the fallback makes long rejection runs pointless
        limit = max_draws if method == "rejection" else min(max_draws, max(probe, 100 * count))
        X, Y, draws, low = _rejection(slack_fn, n, count, rng, min_rate, probe, limit)
    if method == "segment" or (method == "auto" and len(X) < count):
        if instance.is_empty():
            low = True
        else:
            need = count - len(X)
            Xs, Ys = _segment(slack_fn, anchor, anchor, need, rng)
            X = np.vstack([X, Xs])
            Y = np.vstack([Y, Ys])
            draws += need
            if method == "auto":
                used = "rejection+segment" if draws > need else "segment"
    S = instance.slack(X, Y) if len(X) else np.empty(0)
    return FeasibleSample(X, Y, S, count, draws, used, int(rng_seed), low)


# ---------------------------------------------------------------------------
# validity


@dataclass(frozen=True)
class ValidityOptions:
    samples: int = 10_000
    seed: int = 0
    tol: float = 1e-9
    sampler: str = "auto"
    extreme: bool = True
    extreme_cap: int = EXTREME_CAP


@dataclass(frozen=True)
class ValidityReport:
    """Smallest cut slack over the checked feasible points."""

    min_slack: float
    argmin: PointPair | None
    points_checked: int
    violated: bool
    tol: float
    extreme_points: int
    sampled: int
    sample_info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "min_slack": self.min_slack,
            "violated": self.violated,
            "tol": self.tol,
            "points_checked": self.points_checked,
            "extreme_points": self.extreme_points,
            "sampled": self.sampled,
            "witness": None if self.argmin is None else self.argmin.to_json(),
            "sampling": self.sample_info,
        }


def _slack_callable(cut) -> Callable:
    if hasattr(cut, "slack"):
        return cut.slack
    return cut


def check_validity(cut, instance: SeparableInstance, options: ValidityOptions | None = None):
    """Evaluate ``cut`` (an object with ``slack(X, Y)`` or a callable) on feasible points."""
    opts = options or ValidityOptions()
    f = _slack_callable(cut)
    best = math.inf
    best_pt = None
    n_ext = 0

    def consider(X, Y):
        nonlocal best, best_pt
        if not len(X):
            return
        s = np.asarray(f(X, Y), dtype=float)
        r = int(np.argmin(s))
        if s[r] < best:
            best = float(s[r])
            best_pt = PointPair.of(instance, X[r], Y[r])

    if opts.extreme and instance.n <= opts.extreme_cap:
        for X, Y in iter_extreme_points(instance, opts.extreme_cap):
            n_ext += len(X)
            consider(X, Y)
    sample = sample_feasible(instance, opts.samples, opts.seed, opts.sampler)
    consider(sample.X, sample.Y)
    total = n_ext + len(sample)
    if total == 0:
        best = math.inf
    return ValidityReport(
        min_slack=best,
        argmin=best_pt,
        points_checked=total,
        violated=bool(best < -opts.tol),
        tol=opts.tol,
        extreme_points=n_ext,
        sampled=len(sample),
        sample_info=sample.report(),
    )


# ---------------------------------------------------------------------------
# strength


def theta(p_i: float, q_i: float, alpha: float) -> float:
    """Cheapest ``p x + q y`` over the box with ``sqrt(x y) >= alpha``."""
    p, q = (p_i, q_i) if p_i >= q_i else (q_i, p_i)
    if p == 0:
        return 0.0
    if alpha <= math.sqrt(q / p):
        return 2.0 * math.sqrt(p * q) * alpha
    return p * alpha * alpha + q


def _theta_vec(p, q, alpha):
    return np.array([theta(pi, qi, ai) for pi, qi, ai in zip(p, q, alpha)])


def _cover_setup(instance: SeparableInstance, objective: LinearObjective):
    if len(objective.p) != instance.n:
        raise PreconditionViolated("objective length must match the instance")
    if not is_minimal_cover(instance.a, instance.d):
        raise NotMinimalCover("strength computations need the whole index set to be a minimal cover")
    delta = math.fsum(instance.a) - instance.d
    d_i = [max(ai - delta, 0.0) for ai in instance.a]
    return delta, d_i


def z_star(instance: SeparableInstance, objective: LinearObjective) -> float:
    """Minimum of the objective over the minimal covering set."""
    _, d_i = _cover_setup(instance, objective)
    full = [pi + qi for pi, qi in zip(objective.p, objective.q)]
    total = math.fsum(full)
    best = math.inf
    for i, (ai, di) in enumerate(zip(instance.a, d_i)):
        alpha = math.sqrt(di / ai)
        best = min(best, total - full[i] + theta(objective.p[i], objective.q[i], alpha))
    return best


def _argmin_range(p: float, q: float, mu: float) -> tuple[float, float]:
    """Smallest and largest minimizer of ``theta(alpha) - mu alpha`` on [0, 1]."""
    if p < q:
        p, q = q, p
    if p == 0:
        return (1.0, 1.0) if mu > 0 else (0.0, 1.0)
    kink = 2.0 * math.sqrt(p * q)
    if mu < kink:
        return 0.0, 0.0
    if mu == kink:
        return 0.0, min(math.sqrt(q / p), 1.0)
    a = min(mu / (2.0 * p), 1.0)
    return a, a


@dataclass(frozen=True)
class RelaxSolution:
    value: float
    alpha: np.ndarray
    multiplier: float
    dual_bound: float


def solve_relaxation(
    instance: SeparableInstance, objective: LinearObjective, iterations: int = 200
) -> RelaxSolution:
    """``min sum theta_i(alpha_i)`` s.t. ``sum c_i alpha_i >= sum c_i - 1``, ``alpha`` in the box.

    Bisection on the multiplier of the single linear constraint; the primal
    point interpolates the responses at the two final bracket ends so the
    constraint holds with equality.
    """
    _, d_i = _cover_setup(instance, objective)
    p, q = objective.p, objective.q
    c = np.array([cover_coefficient(ai, di) for ai, di in zip(instance.a, d_i)])
    target = float(c.sum() - 1.0)

    def response(lam, upper=True):
        pick = 1 if upper else 0
        return np.array([_argmin_range(pi, qi, lam * ci)[pick] for pi, qi, ci in zip(p, q, c)])

    def dual(lam):
        lo = response(lam, upper=False)
        return lam * target + float(np.sum(_theta_vec(p, q, lo) - lam * c * lo))

    a0 = response(0.0)
    if c @ a0 >= target:
        return RelaxSolution(0.0, a0, 0.0, 0.0)
    lam_lo = 0.0
    lam_hi = float(max(ci * 2.0 * max(pi, qi) for pi, qi, ci in zip(p, q, c)) + 1.0)
    for _ in range(iterations):
        mid = 0.5 * (lam_lo + lam_hi)
        if mid <= lam_lo or mid >= lam_hi:
            break
        if c @ response(mid) >= target:
            lam_hi = mid
        else:
            lam_lo = mid
    a_lo = response(lam_lo)
    a_hi = response(lam_hi)
    s_lo, s_hi = float(c @ a_lo), float(c @ a_hi)
    w = 1.0 if s_hi == s_lo else min(max((target - s_lo) / (s_hi - s_lo), 0.0), 1.0)
    alpha = np.clip(a_lo + w * (a_hi - a_lo), 0.0, 1.0)
    value = float(np.sum(_theta_vec(p, q, alpha)))
    return RelaxSolution(value, alpha, lam_hi, max(dual(lam_lo), dual(lam_hi)))


def z_relax(instance: SeparableInstance, objective: LinearObjective, tol: float = 1e-9) -> float:
    """Minimum of the objective over the box intersected with the bilinear cover cut."""
    sol = solve_relaxation(instance, objective)
    gap = sol.value - sol.dual_bound
    if gap > tol * max(1.0, abs(sol.value)):
        log.warning("relaxation duality gap %.3g exceeds tol %.3g", gap, tol)
    return sol.value


@dataclass(frozen=True)
class StrengthReport:
    z_l: float
    z_star: float
    ratio: float

    def to_json(self) -> dict:
        return {"z_l": self.z_l, "z_star": self.z_star, "ratio": self.ratio}


def approx_ratio(instance: SeparableInstance, objective: LinearObjective) -> StrengthReport:
    """``z_star / z_l`` with ``0 / 0`` reported as 1."""
    zl = z_relax(instance, objective)
    zs = z_star(instance, objective)
    if zl == 0:
        ratio = 1.0 if zs == 0 else math.inf
    else:
        ratio = zs / zl
    return StrengthReport(zl, zs, ratio)
