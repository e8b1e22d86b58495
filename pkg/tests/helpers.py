"""Instance generators and brute-force oracles shared by the tests.

The oracles deliberately avoid the library's own formulas: they search
products or box points numerically and only use the problem definitions.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize_scalar

from bilift import Partition, SeparableInstance


def random_cover(rng, n, delta=None):
    """Minimal cover instance with ``a_i`` in ``[delta, 5 delta]`` and ``d = sum a - delta``."""
    if delta is None:
        delta = float(rng.uniform(0.2, 2.0))
    a = delta * rng.uniform(1.0, 5.0, size=n)
    return SeparableInstance(tuple(a), float(a.sum() - delta))


def brute_phi(a, c, d_lambda, delta):
    """Largest ``-1 - sum c_i (r_i - 1)`` over roots ``r_i = sqrt(x_i y_i)`` with
    ``sum a_i r_i^2 >= d_lambda - delta``.

    One pair is solved exactly for the smallest feasible root; the others run
    over a 201-point root grid that contains 0 and 1.  Every pair takes a turn
    as the exact one.
    """
    a = np.asarray(a, float)
    c = np.asarray(c, float)
    k = len(a)
    grid = np.linspace(0.0, 1.0, 201)
    need = d_lambda - delta
    best = -math.inf
    for j in range(k):
        others = [i for i in range(k) if i != j]
        if others:
            mesh = np.stack(np.meshgrid(*[grid] * len(others), indexing="ij"), -1).reshape(-1, len(others))
        else:
            mesh = np.zeros((1, 0))
        rest = (mesh**2) @ a[others]
        w = (need - rest) / a[j]
        ok = w <= 1.0 + 1e-12
        if not np.any(ok):
            continue
        rj = np.sqrt(np.clip(w[ok], 0.0, 1.0))
        val = -1.0 - ((mesh[ok] - 1.0) @ c[others]) - c[j] * (rj - 1.0)
        best = max(best, float(val.max()))
    return best


def min_cost_on_curve(p, q, t):
    """``min p x + q y`` over the box with ``x y >= t`` (numerically)."""
    if t <= 0:
        return 0.0
    if p == 0 or q == 0:
        return (p + q) * t
    f = lambda x: p * x + q * t / x
    res = minimize_scalar(f, bounds=(t, 1.0), method="bounded", options={"xatol": 1e-13})
    return float(min(res.fun, f(t), f(1.0)))


def brute_z_star(instance, p, q):
    """Minimum of ``p x + q y`` over the set via its extreme structure."""
    a = np.asarray(instance.a)
    n = len(a)
    best = math.inf
    for pattern in itertools.product((0, 1), repeat=n):
        if np.dot(a, pattern) >= instance.d:
            best = min(best, sum((p[i] + q[i]) * pattern[i] for i in range(n)))
    for i in range(n):
        rest = [j for j in range(n) if j != i]
        for pattern in itertools.product((0, 1), repeat=n - 1):
            act = sum(a[j] * s for j, s in zip(rest, pattern))
            t = (instance.d - act) / a[i]
            if t > 1:
                continue
            cost = sum((p[j] + q[j]) * s for j, s in zip(rest, pattern))
            best = min(best, cost + min_cost_on_curve(p[i], q[i], t))
    return best


def grid_theta(p, q, alpha, pts=200_001):
    """``min p x + q y`` with ``x y >= alpha^2`` by a dense grid over ``y``."""
    if alpha == 0:
        return 0.0
    y = np.linspace(alpha * alpha, 1.0, pts)
    return float(np.min(p * alpha * alpha / y + q * y))


def grid_relax(theta_fns, c, target, pts=100_001):
    """Two-coordinate relaxation oracle: grid ``alpha_1``, complete ``alpha_2`` exactly."""
    a1 = np.linspace(0.0, 1.0, pts)
    a2 = np.maximum((target - c[0] * a1) / c[1], 0.0)
    ok = a2 <= 1.0 + 1e-15
    vals = [theta_fns[0](u) + theta_fns[1](min(v, 1.0)) for u, v in zip(a1[ok], a2[ok])]
    return float(min(vals))


def all_partitions_with_cover(instance):
    """Every ``(I, J0, J1)`` split whose ``I`` is a minimal cover of ``d_lambda`` (3^n search)."""
    a = instance.a
    n = instance.n
    out = []
    for labels in itertools.product((0, 1, 2), repeat=n):
        I = [i for i in range(n) if labels[i] == 2]
        if not I:
            continue
        J1 = [i for i in range(n) if labels[i] == 1]
        dl = instance.d - sum(a[i] for i in J1)
        vals = [a[i] for i in I]
        if dl <= 0 or min(vals) <= 0:
            continue
        if sum(vals) > dl and sum(vals) - min(vals) <= dl:
            out.append((tuple(I), tuple(J1)))
    return out


def mixed_instance(rng, k=None):
    """Cover on the first ``k`` pairs plus one pair per gamma class."""
    k = int(rng.integers(1, 4)) if k is None else k
    delta = float(rng.uniform(0.2, 2.0))
    cover = list(delta * rng.uniform(1.05, 5.0, size=k))
    d_lambda = sum(cover) - delta
    a_i0 = min(cover)
    j0p = float(rng.uniform(0.0, 5.0) * delta)
    j0m = -float(rng.uniform(0.1, 5.0) * delta)
    j1_large = float(a_i0 * rng.uniform(1.0, 2.0))
    j1_small = float(a_i0 * rng.uniform(0.0, 1.0))
    j1m = -float(rng.uniform(0.1, 5.0) * delta)
    a = cover + [j0p, j0m, j1_large, j1_small, j1m]
    d = d_lambda + j1_large + j1_small + j1m
    inst = SeparableInstance(tuple(a), d)
    part = Partition.build(inst, range(k), [k, k + 1], [k + 2, k + 3, k + 4])
    return inst, part
