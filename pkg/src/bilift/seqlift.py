"""Numeric sequential lifting for bipartite bilinear sets ``x'Qy + a'x + b'y >= c``.

A seed ``h(x_C, y_D) >= r`` with concave ``h`` is valid on the restriction that
fixes every other variable.  Unfixing one variable ``x_k`` fixed at a bound
gives ``h + f * xhat >= r`` with ``xhat`` the distance of ``x_k`` from its
fixed value, valid as soon as ``f >= sup_{xhat > 0} u(xhat) / xhat`` where
``u(xhat)`` is the largest ``r - h`` over the feasible points at that
``xhat``.  That supremum is finite; this module estimates it on a grid and
inflates the estimate by a margin that is then validated by sampling.

``r - h`` is convex, so ``u`` is attained at extreme points of the restricted
set.  Those have at most one fractional ``x`` and one fractional ``y``; for each
such pattern the feasible region is two-dimensional and bounded by a
hyperbola, which is searched at its corners, its edge crossings and ``K``
samples along the arc.

Fixing at an interior value can make lifting impossible; in that case
:func:`nonliftable_certificate` returns two feasible points whose implied
bounds on the coefficient contradict each other.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CapExceeded, PreconditionViolated, RestrictionEmpty, SeedRejected

#: Largest number of free variables (besides the lifted one) handled by the pattern search.
FREE_CAP = 10
GRID_POINTS = 64
XHAT_MIN = 1e-6
ARC_SAMPLES = 33
MARGIN_REL = 1e-4
MARGIN_ABS = 1e-6
VALIDATION_TOL = 1e-6

# feasibility tolerance for candidate points (relative to the data scale)
_FEAS_TOL = 1e-12


def worker_count() -> int:
    """Thread count for grid evaluation, capped by ``BILIFT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("BILIFT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class BipartiteInstance:
    """The constraint ``x'Qy + a'x + b'y >= c`` over ``[0,1]^m x [0,1]^n``."""

    Q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        a = np.ravel(np.asarray(self.a, dtype=float))
        b = np.ravel(np.asarray(self.b, dtype=float))
        m, n = Q.shape
        if m < 1 or n < 1:
            raise PreconditionViolated("Q must have at least one row and one column")
        if a.shape != (m,) or b.shape != (n,):
            raise PreconditionViolated(f"a must have length {m} and b length {n}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise PreconditionViolated("instance data must be finite")
        if not math.isfinite(float(self.c)):
            raise PreconditionViolated("instance data must be finite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    @property
    def n(self) -> int:
        return self.Q.shape[1]

    @property
    def scale(self) -> float:
        return max(1.0, float(np.abs(self.Q).sum() + np.abs(self.a).sum() + np.abs(self.b).sum()), abs(self.c))

    def slack(self, X, Y) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return np.einsum("ri,ij,rj->r", X, self.Q, Y) + X @ self.a + Y @ self.b - self.c

    def exact_slack(self, x: Sequence, y: Sequence) -> Fraction:
        xs = [Fraction(v) for v in x]
        ys = [Fraction(v) for v in y]
        total = -Fraction(self.c)
        for i in range(self.m):
            total += Fraction(float(self.a[i])) * xs[i]
            for j in range(self.n):
                q = float(self.Q[i, j])
                if q:
                    total += Fraction(q) * xs[i] * ys[j]
        for j in range(self.n):
            total += Fraction(float(self.b[j])) * ys[j]
        return total

    def transpose(self) -> "BipartiteInstance":
        return BipartiteInstance(self.Q.T.copy(), self.b.copy(), self.a.copy(), self.c)


@dataclass(frozen=True, eq=False)
class SeedInequality:
    """``h(x_C, y_D) >= rhs`` on the restriction given by ``fix_x`` and ``fix_y``.

    ``h`` maps arrays of shape ``(N, |C|)`` and ``(N, |D|)`` to ``N`` values, with
    ``C`` and ``D`` the unfixed indices in increasing order.  ``h_exact``
    optionally evaluates one point given as lists of fractions.
    """

    h: Callable[[np.ndarray, np.ndarray], np.ndarray]
    rhs: float
    fix_x: Mapping[int, float] = field(default_factory=dict)
    fix_y: Mapping[int, float] = field(default_factory=dict)
    h_exact: Optional[Callable[[list, list], Fraction]] = None

    def free_x(self, m: int) -> list[int]:
        return [i for i in range(m) if i not in self.fix_x]

    def free_y(self, n: int) -> list[int]:
        return [j for j in range(n) if j not in self.fix_y]

    def transpose(self) -> "SeedInequality":
        h = self.h
        hx = self.h_exact
        return SeedInequality(
            h=lambda X, Y: h(Y, X),
            rhs=self.rhs,
            fix_x=dict(self.fix_y),
            fix_y=dict(self.fix_x),
            h_exact=None if hx is None else (lambda xs, ys: hx(ys, xs)),
        )

    def exact_value(self, xc: list, yd: list) -> Fraction:
        if self.h_exact is not None:
            return Fraction(self.h_exact(xc, yd))
        v = self.h(np.array([[float(t) for t in xc]]), np.array([[float(t) for t in yd]]))
        return Fraction(float(np.ravel(v)[0]))


class _Restriction:
    """Bookkeeping for the free coordinates ``C``, ``D`` plus the lifted ``x_k``."""

    def __init__(self, instance: BipartiteInstance, seed: SeedInequality, k: int):
        m, n = instance.m, instance.n
        if k not in seed.fix_x:
            raise PreconditionViolated(f"x[{k}] must be fixed by the seed")
        for idx, v in list(seed.fix_x.items()) + list(seed.fix_y.items()):
            if not 0 <= float(v) <= 1:
                raise PreconditionViolated("fixing values must lie in [0, 1]")
        bad = [i for i in seed.fix_x if not 0 <= i < m] + [j for j in seed.fix_y if not 0 <= j < n]
        if bad:
            raise PreconditionViolated(f"fixing indices out of range: {bad}")
        self.instance = instance
        self.seed = seed
        self.k = k
        self.C = seed.free_x(m)
        self.D = seed.free_y(n)
        if len(self.C) + len(self.D) > FREE_CAP:
            raise CapExceeded(
                f"{len(self.C) + len(self.D)} free variables exceed the pattern cap {FREE_CAP}"
            )
        self.base_x = np.zeros(m)
        self.base_y = np.zeros(n)
        for i, v in seed.fix_x.items():
            self.base_x[i] = float(v)
        for j, v in seed.fix_y.items():
            self.base_y[j] = float(v)
        self.fixed_value = float(seed.fix_x[k])
        self.tol = _FEAS_TOL * instance.scale

    def x_k(self, xhat: float) -> float:
        return xhat if self.fixed_value == 0 else 1.0 - xhat

    def xhat_of(self, X: np.ndarray) -> np.ndarray:
        col = X[:, self.k]
        return col if self.fixed_value == 0 else 1.0 - col

    def h(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.asarray(self.seed.h(X[:, self.C], Y[:, self.D]), dtype=float).reshape(len(X))

    def gap(self, X, Y) -> np.ndarray:
        """``r - h`` at full points."""
        return self.seed.rhs - self.h(X, Y)

    # -- candidate generation ------------------------------------------------

    def candidates(self, xk_value: float, arc: int = ARC_SAMPLES):
        """Feasible extreme-point candidates with ``x_k = xk_value``."""
        inst = self.instance
        bx = self.base_x.copy()
        bx[self.k] = xk_value
        by = self.base_y
        Xs, Ys = [], []
        for i in [None] + self.C:
            for j in [None] + self.D:
                X, Y = self._pattern_points(bx, by, i, j, arc)
                if len(X):
                    Xs.append(X)
                    Ys.append(Y)
        if not Xs:
            return np.empty((0, inst.m)), np.empty((0, inst.n))
        X = np.vstack(Xs)
        Y = np.vstack(Ys)
        ok = inst.slack(X, Y) >= -self.tol
        return X[ok], Y[ok]

    def _pattern_points(self, bx, by, i, j, arc):
        inst = self.instance
        ox = [c for c in self.C if c != i]
        oy = [d for d in self.D if d != j]
        nb = 1 << (len(ox) + len(oy))
        codes = np.arange(nb, dtype=np.int64)
        bits = ((codes[:, None] >> np.arange(len(ox) + len(oy))) & 1).astype(float)
        BX = np.tile(bx, (nb, 1))
        BY = np.tile(by, (nb, 1))
        if ox:
            BX[:, ox] = bits[:, : len(ox)]
        if oy:
            BY[:, oy] = bits[:, len(ox) :]

        def at(u, v):
            X = BX.copy()
            Y = BY.copy()
            if i is not None:
                X[:, i] = u
            if j is not None:
                Y[:, j] = v
            return inst.slack(X, Y)

        s00 = at(0.0, 0.0)
        A10 = at(1.0, 0.0) - s00 if i is not None else np.zeros(nb)
        A01 = at(0.0, 1.0) - s00 if j is not None else np.zeros(nb)
        A11 = (at(1.0, 1.0) - s00 - A10 - A01) if (i is not None and j is not None) else np.zeros(nb)
        grid = np.linspace(0.0, 1.0, arc)
        us, vs = [], []
        # corners
        for u0 in (0.0, 1.0):
            for v0 in (0.0, 1.0):
                us.append(np.full(nb, u0))
                vs.append(np.full(nb, v0))
        with np.errstate(divide="ignore", invalid="ignore"):
            # v on the curve for fixed u, and u on the curve for fixed v
            for u0 in np.concatenate([[0.0, 1.0], grid]):
                us.append(np.full(nb, u0))
                vs.append(-(s00 + A10 * u0) / (A01 + A11 * u0))
            for v0 in np.concatenate([[0.0, 1.0], grid]):
                vs.append(np.full(nb, v0))
                us.append(-(s00 + A01 * v0) / (A10 + A11 * v0))
        U = np.stack(us, axis=1)
        V = np.stack(vs, axis=1)
        good = np.isfinite(U) & np.isfinite(V) & (U >= -1e-12) & (U <= 1 + 1e-12)
        good &= (V >= -1e-12) & (V <= 1 + 1e-12)
        rows, cols = np.nonzero(good)
        X = BX[rows].copy()
        Y = BY[rows].copy()
        if i is not None:
            X[:, i] = np.clip(U[rows, cols], 0.0, 1.0)
        if j is not None:
            Y[:, j] = np.clip(V[rows, cols], 0.0, 1.0)
        return X, Y

    def corner_breakpoints(self) -> list[float]:
        """``xhat`` values where the slack of a binary assignment of the free variables crosses zero."""
        inst = self.instance
        p, q = len(self.C), len(self.D)
        nb = 1 << (p + q)
        bits = ((np.arange(nb)[:, None] >> np.arange(p + q)) & 1).astype(float)
        X = np.tile(self.base_x, (nb, 1))
        Y = np.tile(self.base_y, (nb, 1))
        if p:
            X[:, self.C] = bits[:, :p]
        if q:
            Y[:, self.D] = bits[:, p:]
        X[:, self.k] = self.x_k(0.0)
        s0 = inst.slack(X, Y)
        X[:, self.k] = self.x_k(1.0)
        s1 = inst.slack(X, Y)
        out = set()
        for a0, a1 in zip(s0, s1):
            if a0 != a1:
                t = a0 / (a0 - a1)
                if 0 < t <= 1:
                    out.add(float(t))
        return sorted(out)

    # -- objective ------------------------------------------------------------

    def best_gap(self, xhat: float):
        """``u(xhat)`` with its argmax, or ``None`` when nothing is feasible."""
        X, Y = self.candidates(self.x_k(xhat))
        if not len(X):
            return None
        g = self.gap(X, Y)
        r = int(np.argmax(g))
        return float(g[r]), X[r], Y[r]


def check_seed(
    instance: BipartiteInstance,
    seed: SeedInequality,
    samples: int = 2000,
    rng_seed: int = 0,
    tol: float = 1e-7,
) -> None:
    """Spot-check concavity of ``h`` and validity of the seed on its restriction.

    Raises :class:`SeedRejected` on a failed check.
    """
    C = seed.free_x(instance.m)
    D = seed.free_y(instance.n)
    rng = np.random.default_rng(rng_seed)
    P1x, P2x = rng.random((samples, len(C))), rng.random((samples, len(C)))
    P1y, P2y = rng.random((samples, len(D))), rng.random((samples, len(D)))
    h = seed.h
    f1 = np.ravel(h(P1x, P1y))
    f2 = np.ravel(h(P2x, P2y))
    fm = np.ravel(h(0.5 * (P1x + P2x), 0.5 * (P1y + P2y)))
    defect = 0.5 * (f1 + f2) - fm
    scale = 1.0 + np.maximum(np.abs(f1), np.abs(f2))
    if np.any(defect > 1e-9 * scale):
        r = int(np.argmax(defect / scale))
        raise SeedRejected(f"h fails the midpoint concavity check (defect {defect[r]:.3g})")
    # validity on the x_k-fixed restriction
    k_any = next(iter(seed.fix_x), None)
    if k_any is None:
        return
    R = _Restriction(instance, seed, k_any)
    X, Y = R.candidates(R.fixed_value)
    Xs, Ys = _sample_restriction(R, samples, rng, lifted=False)
    X = np.vstack([X, Xs])
    Y = np.vstack([Y, Ys])
    if not len(X):
        raise RestrictionEmpty("the seed restriction has no feasible point")
    g = R.gap(X, Y)
    if np.max(g) > tol * (1.0 + abs(seed.rhs)):
        raise SeedRejected(f"seed is violated on its restriction by {float(np.max(g)):.3g}")


def _sample_restriction(R: _Restriction, count: int, rng, lifted: bool):
    """Feasible random points of the restriction; ``x_k`` is free when ``lifted``."""
    inst = R.instance
    cols_x = list(R.C) + ([R.k] if lifted else [])
    cols_y = list(R.D)
    dx, dy = len(cols_x), len(cols_y)
    if dx + dy == 0:
        return np.empty((0, inst.m)), np.empty((0, inst.n))

    def full(U, V):
        X = np.tile(R.base_x, (len(U), 1))
        Y = np.tile(R.base_y, (len(U), 1))
        if dx:
            X[:, cols_x] = U
        if dy:
            Y[:, cols_y] = V
        return X, Y

    U = rng.random((count, dx))
    V = rng.random((count, dy))
    X, Y = full(U, V)
    s = inst.slack(X, Y)
    keep = s >= 0
    # segment sampler toward the best free corner for the rejected draws
    nb = 1 << (dx + dy)
    bits = ((np.arange(nb)[:, None] >> np.arange(dx + dy)) & 1).astype(float)
    Xc, Yc = full(bits[:, :dx], bits[:, dx:])
    sc = inst.slack(Xc, Yc)
    best = int(np.argmax(sc))
    outX, outY = [X[keep]], [Y[keep]]
    if sc[best] >= 0 and np.any(~keep):
        U0, V0 = U[~keep], V[~keep]
        au, av = bits[best, :dx], bits[best, dx:]
        lo = np.zeros(len(U0))
        hi = np.ones(len(U0))
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            Xm, Ym = full(U0 + mid[:, None] * (au - U0), V0 + mid[:, None] * (av - V0))
            ok = inst.slack(Xm, Ym) >= 0
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        Xm, Ym = full(U0 + hi[:, None] * (au - U0), V0 + hi[:, None] * (av - V0))
        ok = inst.slack(Xm, Ym) >= 0
        outX.append(Xm[ok])
        outY.append(Ym[ok])
    return np.vstack(outX), np.vstack(outY)


@dataclass(frozen=True)
class LiftValidation:
    min_slack: float
    points_checked: int
    passed: bool
    bumps: int

    def to_json(self) -> dict:
        return {
            "min_slack": self.min_slack,
            "points_checked": self.points_checked,
            "passed": self.passed,
            "bumps": self.bumps,
        }


@dataclass(frozen=True)
class LiftResult:
    """Outcome of lifting one variable.

    ``estimate`` is the grid value of the supremum (a lower estimate);
    ``coefficient = estimate + margin``, possibly raised further by
    validation.  The lifted inequality is ``h + coefficient * xhat >= rhs``.
    """

    estimate: float
    coefficient: float
    margin: float
    argmax_xhat: float | None
    argmax_x: np.ndarray | None
    argmax_y: np.ndarray | None
    validation: LiftValidation
    var: str
    k: int
    fixed_value: float
    config: dict

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "coefficient": self.coefficient,
            "margin": self.margin,
            "var": self.var,
            "k": self.k + 1,
            "fixed_value": self.fixed_value,
            "argmax": None
            if self.argmax_xhat is None
            else {
                "xhat": self.argmax_xhat,
                "x": self.argmax_x.tolist(),
                "y": self.argmax_y.tolist(),
            },
            "validation": self.validation.to_json(),
            "config": self.config,
        }


def _parse_k(k):
    if isinstance(k, tuple):
        var, idx = k
        if var not in ("x", "y"):
            raise PreconditionViolated("lifted variable kind must be 'x' or 'y'")
        return var, int(idx)
    return "x", int(k)


def lifted_slack(instance, seed, k, coefficient, X, Y) -> np.ndarray:
    """Slack ``h + coefficient * xhat - r`` of the lifted inequality at full points."""
    var, idx = _parse_k(k)
    if var == "y":
        instance, seed = instance.transpose(), seed.transpose()
        X, Y = Y, X
    R = _Restriction(instance, seed, idx)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return R.h(X, Y) + coefficient * R.xhat_of(X) - seed.rhs


def _xhat_grid(R: _Restriction, grid: int, xhat_min: float) -> list[float]:
    pts = set(np.geomspace(xhat_min, 1.0, grid).tolist())
    for t in R.corner_breakpoints():
        if t >= xhat_min:
            pts.add(t)
        for off in (1 - 1e-9, 1 + 1e-9):
            s = t * off
            if xhat_min <= s <= 1.0:
                pts.add(s)
    return sorted(pts)


def lift_coefficient(
    instance: BipartiteInstance,
    seed: SeedInequality,
    k,
    grid: int = GRID_POINTS,
    xhat_min: float = XHAT_MIN,
    margin_rel: float = MARGIN_REL,
    margin_abs: float = MARGIN_ABS,
    validation_samples: int = 20_000,
    rng_seed: int = 0,
    refine: bool = True,
    check: bool = True,
) -> LiftResult:
    """Lift the fixed variable ``k`` (an x-index, or ``("y", j)``) into the seed.

    Raises :class:`RestrictionEmpty` when the seed restriction is infeasible
    and :class:`CapExceeded` when too many variables are free.
    """
    if grid < 2:
        raise PreconditionViolated("grid must have at least 2 points")
    var, idx = _parse_k(k)
    inst, sd = (instance.transpose(), seed.transpose()) if var == "y" else (instance, seed)
    if idx not in sd.fix_x or float(sd.fix_x[idx]) not in (0.0, 1.0):
        raise PreconditionViolated("the lifted variable must be fixed at 0 or 1")
    R = _Restriction(inst, sd, idx)
    if check:
        check_seed(inst, sd, rng_seed=rng_seed)
    X0, _ = R.candidates(R.fixed_value)
    if not len(X0):
        raise RestrictionEmpty("the seed restriction has no feasible point")

    xs = _xhat_grid(R, grid, xhat_min)
    workers = worker_count()

    def ratio_at(t):
        res = R.best_gap(t)
        if res is None:
            return -math.inf, None
        return res[0] / t, res

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            evals = list(ex.map(ratio_at, xs))
    else:
        evals = [ratio_at(t) for t in xs]

    best = -math.inf
    best_res = None
    best_t = None
    for t, (val, res) in zip(xs, evals):
        if val > best:
            best, best_res, best_t = val, res, t

    if refine and best_res is not None:
        order = np.argsort([-v for v, _ in evals])[:3]
        for r in order:
            if evals[r][1] is None:
                continue
            lo = xs[max(r - 1, 0)]
            hi = xs[min(r + 1, len(xs) - 1)]
            if not lo < hi:
                continue
            def objective(t):
                v = ratio_at(t)[0]
                return -v if math.isfinite(v) else 1e300

            opt = minimize_scalar(
                objective,
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-10 * max(hi, 1e-12)},
            )
            val, res = ratio_at(float(opt.x))
            if res is not None and val > best:
                best, best_res, best_t = val, res, float(opt.x)

    if best_res is None:
        # no feasible point with xhat > 0: the variable can never move, any coefficient is valid
        estimate = 0.0
        margin = 0.0
        coefficient = 0.0
    else:
        estimate = best
        margin = margin_rel * abs(estimate) + margin_abs
        coefficient = estimate + margin

    # validation by sampling with x_k unfixed, plus the grid candidates
    rng = np.random.default_rng(rng_seed)
    Xv, Yv = _sample_restriction(R, validation_samples, rng, lifted=True)
    bumps = 0
    min_slack = math.inf
    for _ in range(6):
        sl = R.h(Xv, Yv) + coefficient * R.xhat_of(Xv) - sd.rhs if len(Xv) else np.empty(0)
        min_slack = float(sl.min()) if len(sl) else math.inf
        if min_slack >= -VALIDATION_TOL:
            break
        bad = sl < -VALIDATION_TOL
        xh = R.xhat_of(Xv)[bad]
        need = R.gap(Xv[bad], Yv[bad]) / xh
        coefficient = float(need.max())
        coefficient += margin_rel * abs(coefficient) + margin_abs
        bumps += 1
    validation = LiftValidation(min_slack, len(Xv), min_slack >= -VALIDATION_TOL, bumps)

    ax = ay = None
    if best_res is not None:
        ax, ay = best_res[1], best_res[2]
        if var == "y":
            ax, ay = ay, ax
    config = {
        "grid": grid,
        "xhat_min": xhat_min,
        "arc_samples": ARC_SAMPLES,
        "margin_rel": margin_rel,
        "margin_abs": margin_abs,
        "validation_samples": validation_samples,
        "validation_tol": VALIDATION_TOL,
        "seed": rng_seed,
    }
    return LiftResult(
        estimate=estimate,
        coefficient=coefficient,
        margin=coefficient - estimate,
        argmax_xhat=best_t,
        argmax_x=ax,
        argmax_y=ay,
        validation=validation,
        var=var,
        k=idx,
        fixed_value=R.fixed_value,
        config=config,
    )


# ---------------------------------------------------------------------------
# interior fixings


@dataclass(frozen=True)
class Certificate:
    """Two feasible points whose implied coefficient bounds conflict.

    The lifted form ``h + alpha * (x_k - value) >= r`` needs
    ``alpha >= lower`` (from ``lower_point``, where ``x_k > value``) and
    ``alpha <= upper`` (from ``upper_point``, where ``x_k < value``), with
    ``lower > upper``.  Points and bounds are exact fractions.
    """

    lower: Fraction
    upper: Fraction
    lower_point: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]
    upper_point: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]
    var: str
    k: int
    value: Fraction

    def to_json(self) -> dict:
        def pt(p):
            return {"x": [str(v) for v in p[0]], "y": [str(v) for v in p[1]]}

        return {
            "var": self.var,
            "k": self.k + 1,
            "value": str(self.value),
            "alpha_at_least": str(self.lower),
            "alpha_at_most": str(self.upper),
            "lower_witness": pt(self.lower_point),
            "upper_witness": pt(self.upper_point),
        }


def _exact_bound(R: _Restriction, inst: BipartiteInstance, sd: SeedInequality, x, y, value):
    xs = tuple(Fraction(float(v)) for v in x)
    ys = tuple(Fraction(float(v)) for v in y)
    if inst.exact_slack(xs, ys) < 0:
        return None
    diff = xs[R.k] - value
    if diff == 0:
        return None
    hval = sd.exact_value([xs[i] for i in R.C], [ys[j] for j in R.D])
    return (Fraction(sd.rhs) - hval) / diff, (xs, ys)


def _find_conflict(R, inst, sd, X, Y, value):
    if not len(X):
        return None
    fval = float(value)
    xk = X[:, R.k]
    g = R.gap(X, Y)
    above = xk > fval
    below = xk < fval
    if not (np.any(above) and np.any(below)):
        return None
    lo_f = np.where(above, g / np.where(above, xk - fval, 1.0), -np.inf)
    up_f = np.where(below, g / np.where(below, xk - fval, 1.0), np.inf)
    if not lo_f.max() > up_f.min():
        return None
    # confirm with exact arithmetic, trying the strongest float candidates first
    lowers = []
    for r in np.argsort(-lo_f)[:20]:
        if not above[r]:
            break
        b = _exact_bound(R, inst, sd, X[r], Y[r], value)
        if b is not None:
            lowers.append(b)
    uppers = []
    for r in np.argsort(up_f)[:20]:
        if not below[r]:
            break
        b = _exact_bound(R, inst, sd, X[r], Y[r], value)
        if b is not None:
            uppers.append(b)
    if not lowers or not uppers:
        return None
    lo = max(lowers, key=lambda b: b[0])
    up = min(uppers, key=lambda b: b[0])
    if lo[0] > up[0]:
        return lo, up
    return None


def nonliftable_certificate(
    instance: BipartiteInstance,
    seed: SeedInequality,
    k,
    samples: int = 20_000,
    rng_seed: int = 0,
    grid: int = 17,
) -> Certificate | None:
    """Two-point proof that no finite coefficient lifts ``k`` from an interior value.

    Returns ``None`` for bound fixings and when the search finds no conflict.
    Stages: binary vertices of the unfixed variables, pattern candidates on
    an ``x_k`` grid, then random feasible samples.
    """
    var, idx = _parse_k(k)
    inst, sd = (instance.transpose(), seed.transpose()) if var == "y" else (instance, seed)
    if idx not in sd.fix_x:
        raise PreconditionViolated(f"{var}[{idx}] must be fixed by the seed")
    value = Fraction(float(sd.fix_x[idx]))
    if value <= 0 or value >= 1:
        return None
    R = _Restriction(inst, sd, idx)
    fval = float(value)

    def stage_vertices():
        p, q = len(R.C), len(R.D)
        nb = 1 << (p + q + 1)
        bits = ((np.arange(nb)[:, None] >> np.arange(p + q + 1)) & 1).astype(float)
        X = np.tile(R.base_x, (nb, 1))
        Y = np.tile(R.base_y, (nb, 1))
        if p:
            X[:, R.C] = bits[:, :p]
        if q:
            Y[:, R.D] = bits[:, p : p + q]
        X[:, R.k] = bits[:, -1]
        ok = inst.slack(X, Y) >= 0
        return X[ok], Y[ok]

    def stage_patterns():
        Xs, Ys = [], []
        for t in np.linspace(0.0, 1.0, grid):
            if t == fval:
                continue
            X, Y = R.candidates(float(t))
            Xs.append(X)
            Ys.append(Y)
        return np.vstack(Xs), np.vstack(Ys)

    def stage_samples():
        rng = np.random.default_rng(rng_seed)
        return _sample_restriction(R, samples, rng, lifted=True)

    Xacc = np.empty((0, inst.m))
    Yacc = np.empty((0, inst.n))
    for stage in (stage_vertices, stage_patterns, stage_samples):
        X, Y = stage()
        Xacc = np.vstack([Xacc, X])
        Yacc = np.vstack([Yacc, Y])
        found = _find_conflict(R, inst, sd, Xacc, Yacc, value)
        if found is not None:
            (lo, lp), (up, upt) = found
            if var == "y":
                lp, upt = (lp[1], lp[0]), (upt[1], upt[0])
            return Certificate(lo, up, lp, upt, var, idx, value)
    return None
