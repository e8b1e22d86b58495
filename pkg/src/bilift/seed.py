"""The bilinear cover inequality and the relaxed-set inequality it improves on.

For a minimal cover ``a_I`` of ``d`` with ``d_i = a_i - delta`` the cut reads

    sum_{i in I} c_i (sqrt(x_i y_i) - 1) >= -1,   c_i = sqrt(a_i) / (sqrt(a_i) - sqrt(d_i)).

Both cuts are second-order-cone representable with one auxiliary variable
``w_i <= sqrt(x_i y_i)`` per pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionViolated
from .instance import CoverContext, SeparableInstance


def _root_products(X, Y, index) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    idx = list(index)
    return np.sqrt(np.maximum(X[:, idx] * Y[:, idx], 0.0))


@dataclass(frozen=True)
class SeedCut:
    """``sum_i coeffs[i] * (sqrt(x_i y_i) - 1) >= rhs`` over the pairs in ``index``."""

    index: tuple[int, ...]
    coeffs: tuple[float, ...]
    a: tuple[float, ...]
    d_i: tuple[float, ...]
    rhs: float = -1.0

    def lhs(self, X, Y) -> np.ndarray:
        r = _root_products(X, Y, self.index)
        return (r - 1.0) @ np.asarray(self.coeffs, dtype=float)

    def slack(self, X, Y) -> np.ndarray:
        """Vectorised slack; nonnegative means the cut is satisfied."""
        return self.lhs(X, Y) - self.rhs

    def to_json(self) -> dict:
        return {
            "type": "bilinear_cover",
            "I": [i + 1 for i in self.index],
            "coeffs": list(self.coeffs),
            "rhs": self.rhs,
            "a": list(self.a),
            "d_i": list(self.d_i),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SeedCut":
        return cls(
            index=tuple(int(i) - 1 for i in obj["I"]),
            coeffs=tuple(float(c) for c in obj["coeffs"]),
            a=tuple(float(v) for v in obj.get("a", ())),
            d_i=tuple(float(v) for v in obj.get("d_i", ())),
            rhs=float(obj.get("rhs", -1.0)),
        )


def cover_coefficient(a_i: float, d_i: float) -> float:
    if d_i == 0:
        return 1.0
    ra = math.sqrt(a_i)
    return ra / (ra - math.sqrt(d_i))


def build_seed(cover: CoverContext) -> SeedCut:
    """Bilinear cover inequality for the cover described by ``cover``."""
    coeffs = tuple(cover_coefficient(a, d) for a, d in zip(cover.a, cover.d_i))
    return SeedCut(index=cover.index, coeffs=coeffs, a=cover.a, d_i=cover.d_i)


def eval_seed(cut: SeedCut, point) -> float:
    """Slack of ``cut`` at a single point (anything with ``.x`` and ``.y``)."""
    return float(cut.slack(point.x, point.y)[0])


@dataclass(frozen=True)
class ComparisonCut:
    """``sum_i coeffs[i] * sqrt(x_i y_i) >= rhs`` for the set with upper bounds dropped."""

    index: tuple[int, ...]
    coeffs: tuple[float, ...]
    rhs: float = 1.0

    def slack(self, X, Y) -> np.ndarray:
        r = _root_products(X, Y, self.index)
        return r @ np.asarray(self.coeffs, dtype=float) - self.rhs

    def to_json(self) -> dict:
        return {
            "type": "relaxed_cover",
            "I": [i + 1 for i in self.index],
            "coeffs": list(self.coeffs),
            "rhs": self.rhs,
        }


def build_crt(instance: SeparableInstance) -> ComparisonCut:
    """Inequality ``sum sqrt(a_i / d) sqrt(x_i y_i) >= 1``; needs all ``a_i > 0`` and ``d > 0``."""
    if instance.d <= 0 or any(v <= 0 for v in instance.a):
        raise PreconditionViolated("comparison cut needs a_i > 0 for all i and d > 0")
    sd = math.sqrt(instance.d)
    coeffs = tuple(math.sqrt(v) / sd for v in instance.a)
    return ComparisonCut(index=tuple(range(instance.n)), coeffs=coeffs)
