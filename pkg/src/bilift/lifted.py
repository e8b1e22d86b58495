"""Lifted bilinear cover inequality.

Pairs outside the cover enter through concave terms ``gamma_i(x_i, y_i)`` that
dominate the two-slope bound composed with the pair's contribution:
``gamma_i(x, y) >= psi(a_i x y)`` for pairs fixed at ``(0, 0)`` and
``gamma_i(x, y) >= psi(a_i x y - a_i)`` for pairs fixed at ``(1, 1)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassMismatch
from .instance import CoverContext, Partition, SeparableInstance, cover_context
from .seed import SeedCut, build_seed


class GammaClass(str, enum.Enum):
    J0plus = "J0plus"
    J0minus = "J0minus"
    J1plus_large = "J1plus_large"
    J1plus_small = "J1plus_small"
    J1minus = "J1minus"

    @property
    def fixed_at_one(self) -> bool:
        return self.value.startswith("J1")


@dataclass(frozen=True)
class GammaTerm:
    """Concave lifting term of one fixed pair."""

    index: int
    class_tag: GammaClass
    a_i: float
    l_plus: float
    l_minus: float
    delta: float

    def fixing_point(self) -> tuple[float, float]:
        return (1.0, 1.0) if self.class_tag.fixed_at_one else (0.0, 0.0)

    def value(self, x, y) -> np.ndarray:
        """Evaluate at arrays (or scalars) ``x``, ``y`` in ``[0, 1]``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a, lp, lm, D = self.a_i, self.l_plus, self.l_minus, self.delta
        if a == 0:
            return np.zeros(np.broadcast(x, y).shape)
        tag = self.class_tag
        # l_plus * delta >= 1 in exact arithmetic
        kappa = max(lp * D - 1.0, 0.0)
        if tag is GammaClass.J0plus:
            return lp * a * np.minimum(x, y)
        if tag is GammaClass.J1minus:
            return -lp * a * np.minimum(2.0 - x - y, 1.0)
        if tag is GammaClass.J0minus:
            s = x + y - 1.0
            return np.minimum(np.minimum(lm * a * s, lp * a * s + kappa), 0.0)
        m = np.minimum(x, y) - 1.0
        out = np.minimum(lp * a * m + kappa, lm * a * m)
        if tag is GammaClass.J1plus_large:
            rad = np.sqrt(np.maximum(x * y, 0.0))
            rest = a - D
            ra, rr = math.sqrt(a), math.sqrt(rest)
            slope = rr * ra * lp
            # offset is >= 0 for a >= a_i0 and vanishes at a = a_i0; clamp rounding
            offset = max(slope - lp * rest - 1.0, 0.0)
            g = slope * (rad - 1.0) + offset
            h = ra / (ra - rr) * (rad - 1.0)
            out = np.minimum(out, np.minimum(g, h))
        return out

    def to_json(self) -> dict:
        return {"i": self.index + 1, "class": self.class_tag.value, "a": self.a_i}


def build_gamma(cover: CoverContext, i: int, a_i: float, class_tag) -> GammaTerm:
    """Lifting term for pair ``i``; raises :class:`ClassMismatch` on an inconsistent tag."""
    tag = GammaClass(class_tag)
    a_i = float(a_i)
    if i in cover.index:
        raise ClassMismatch(f"index {i} belongs to the cover")
    if tag in (GammaClass.J0plus, GammaClass.J1plus_small) and a_i < 0:
        raise ClassMismatch(f"{tag.value} needs a_i >= 0, got {a_i!r}")
    if tag in (GammaClass.J0minus, GammaClass.J1minus) and a_i >= 0:
        raise ClassMismatch(f"{tag.value} needs a_i < 0, got {a_i!r}")
    if tag is GammaClass.J1plus_large:
        if cover.i0 is None:
            raise ClassMismatch("J1plus_large needs a nonempty set of strict cover indices")
        if a_i < cover.a_i0:
            raise ClassMismatch(f"J1plus_large needs a_i >= a_i0={cover.a_i0!r}, got {a_i!r}")
    return GammaTerm(i, tag, a_i, cover.l_plus, cover.l_minus, cover.delta)


def classify(cover: CoverContext, partition: Partition, i: int, a_i: float) -> GammaClass:
    if i in partition.J0:
        return GammaClass.J0plus if a_i >= 0 else GammaClass.J0minus
    if i in partition.J1:
        if a_i < 0:
            return GammaClass.J1minus
        if cover.i0 is not None and a_i > 0 and a_i >= cover.a_i0:
            return GammaClass.J1plus_large
        return GammaClass.J1plus_small
    raise ClassMismatch(f"index {i} is not fixed by the partition")


@dataclass(frozen=True)
class LiftedCut:
    """Seed cut on the cover plus one lifting term per fixed pair; ``lhs >= rhs``."""

    seed: SeedCut
    gammas: tuple[GammaTerm, ...]
    n: int
    cover: CoverContext
    rhs: float = -1.0

    def slack(self, X, Y) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = self.seed.lhs(X, Y) - self.rhs
        for g in self.gammas:
            out = out + g.value(X[:, g.index], Y[:, g.index])
        return out

    def to_json(self) -> dict:
        obj = self.seed.to_json()
        obj["type"] = "lifted_bilinear_cover" if self.gammas else "bilinear_cover"
        obj["n"] = self.n
        obj["cover"] = {
            "d_lambda": self.cover.d_lambda,
            "delta": self.cover.delta,
            "l_plus": self.cover.l_plus,
            "l_minus": self.cover.l_minus,
            "i0": None if self.cover.i0 is None else self.cover.i0 + 1,
        }
        obj["gammas"] = [g.to_json() for g in self.gammas]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "LiftedCut":
        seed = SeedCut.from_json(obj)
        cov = obj["cover"]
        i0 = cov.get("i0")
        d_i = seed.d_i
        cover = CoverContext(
            index=seed.index,
            a=seed.a,
            d_lambda=float(cov["d_lambda"]),
            delta=float(cov["delta"]),
            d_i=d_i,
            i_strict=tuple(i for i, di in zip(seed.index, d_i) if di > 0),
            i0=None if i0 is None else int(i0) - 1,
            l_plus=float(cov["l_plus"]),
            l_minus=float(cov["l_minus"]),
        )
        gammas = tuple(
            GammaTerm(
                int(g["i"]) - 1,
                GammaClass(g["class"]),
                float(g["a"]),
                cover.l_plus,
                cover.l_minus,
                cover.delta,
            )
            for g in obj.get("gammas", [])
        )
        return cls(seed=seed, gammas=gammas, n=int(obj["n"]), cover=cover, rhs=float(obj.get("rhs", -1.0)))


def build_lifted_cut(
    instance: SeparableInstance, partition: Partition, eps_cover: float = 0.0
) -> LiftedCut:
    """Lifted bilinear cover inequality of ``partition``; raises ``NotMinimalCover``."""
    cover = cover_context(instance, partition, eps_cover)
    seed = build_seed(cover)
    gammas = []
    for i in sorted(partition.J0 + partition.J1):
        a_i = instance.a[i]
        gammas.append(build_gamma(cover, i, a_i, classify(cover, partition, i, a_i)))
    return LiftedCut(seed=seed, gammas=tuple(gammas), n=instance.n, cover=cover)


def eval_lifted(cut: LiftedCut, point) -> float:
    """Slack of ``cut`` at a single point (anything with ``.x`` and ``.y``)."""
    return float(cut.slack(point.x, point.y)[0])
