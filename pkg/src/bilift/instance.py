"""Problem data for one separable bipartite bilinear constraint.

The set is ``{(x, y) in [0,1]^n x [0,1]^n : sum_i a_i x_i y_i >= d}``.  This
module holds the instance, index partitions ``(I, J0, J1)`` that fix pairs to
``(0, 0)`` or ``(1, 1)``, the derived minimal-cover quantities, and the search
for minimal-cover-yielding partitions.

Indices are 0-based everywhere in the library; files use 1-based indices (see
:mod:`bilift.serialize`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import Infeasible, NotMinimalCover, PreconditionViolated, SearchCapExceeded

#: Exhaustive partition search is run when at most this many coefficients are nonzero.
EXHAUSTIVE_CAP = 20


@dataclass(frozen=True)
class SeparableInstance:
    """Coefficients ``a`` and right-hand side ``d`` of ``sum a_i x_i y_i >= d``."""

    a: tuple[float, ...]
    d: float

    def __post_init__(self):
        a = tuple(float(v) for v in np.ravel(self.a))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", float(self.d))
        if len(a) < 1:
            raise PreconditionViolated("instance needs at least one pair")
        if not all(math.isfinite(v) for v in a) or not math.isfinite(self.d):
            raise PreconditionViolated("coefficients and right-hand side must be finite")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def coeffs(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    def slack(self, X, Y) -> np.ndarray:
        """Constraint slack ``sum a_i x_i y_i - d`` for each row of ``X``, ``Y``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return (X * Y) @ self.coeffs - self.d

    def max_activity(self) -> float:
        """Largest attainable value of ``sum a_i x_i y_i`` over the box."""
        return math.fsum(v for v in self.a if v > 0)

    def is_empty(self) -> bool:
        return self.max_activity() < self.d


@dataclass(frozen=True)
class Partition:
    """Split of ``[n]`` into the cover ``I`` and pairs fixed at zero (``J0``) or one (``J1``).

    Zero coefficients are filed under the ``plus`` subsets.
    """

    I: tuple[int, ...]
    J0: tuple[int, ...]
    J1: tuple[int, ...]
    J0plus: tuple[int, ...]
    J0minus: tuple[int, ...]
    J1plus: tuple[int, ...]
    J1minus: tuple[int, ...]
    d_lambda: float

    @classmethod
    def build(
        cls,
        instance: SeparableInstance,
        I: Iterable[int],
        J0: Iterable[int] | None = None,
        J1: Iterable[int] = (),
    ) -> "Partition":
        n = instance.n
        I = tuple(sorted(int(i) for i in I))
        J1 = tuple(sorted(int(i) for i in J1))
        if J0 is None:
            taken = set(I) | set(J1)
            J0 = tuple(i for i in range(n) if i not in taken)
        else:
            J0 = tuple(sorted(int(i) for i in J0))
        everything = I + J0 + J1
        if len(everything) != len(set(everything)):
            raise PreconditionViolated("I, J0, J1 must be pairwise disjoint")
        if set(everything) != set(range(n)):
            raise PreconditionViolated(f"I, J0, J1 must cover all {n} indices")
        if not I:
            raise PreconditionViolated("the cover index set I must be nonempty")
        a = instance.a
        return cls(
            I=I,
            J0=J0,
            J1=J1,
            J0plus=tuple(i for i in J0 if a[i] >= 0),
            J0minus=tuple(i for i in J0 if a[i] < 0),
            J1plus=tuple(i for i in J1 if a[i] >= 0),
            J1minus=tuple(i for i in J1 if a[i] < 0),
            d_lambda=instance.d - math.fsum(a[i] for i in J1),
        )

    @classmethod
    def trivial(cls, instance: SeparableInstance) -> "Partition":
        """All indices in the cover."""
        return cls.build(instance, range(instance.n), (), ())

    def sort_key(self):
        return (self.I, self.J0, self.J1)


@dataclass(frozen=True)
class CoverContext:
    """Quantities derived from a minimal cover ``a_I`` of ``d_lambda``.

    ``index`` holds the instance positions of the cover; ``i_strict`` and ``i0``
    are instance positions as well, ``a`` and ``d_i`` are aligned with ``index``.
    """

    index: tuple[int, ...]
    a: tuple[float, ...]
    d_lambda: float
    delta: float
    d_i: tuple[float, ...]
    i_strict: tuple[int, ...]
    i0: int | None
    l_plus: float
    l_minus: float

    @property
    def a_i0(self) -> float | None:
        if self.i0 is None:
            return None
        return self.a[self.index.index(self.i0)]

    @property
    def a_array(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    @property
    def d_array(self) -> np.ndarray:
        return np.asarray(self.d_i, dtype=float)

    @property
    def k(self) -> int:
        return len(self.index)


def is_minimal_cover(a_sub: Sequence[float], d: float, eps_cover: float = 0.0) -> bool:
    """True iff the entries of ``a_sub`` form a minimal cover of ``d``.

    Conditions: every entry and ``d`` positive, the total exceeds ``d``, and
    dropping the smallest entry brings the total to at most ``d``.  The
    comparisons are exact except for the opt-in slack ``eps_cover`` on the
    last condition.
    """
    a_sub = [float(v) for v in a_sub]
    if not a_sub:
        raise PreconditionViolated("a_sub must be nonempty")
    if any(v <= 0 for v in a_sub) or d <= 0:
        return False
    total = math.fsum(a_sub)
    if not total > d:
        return False
    return total - min(a_sub) <= d + eps_cover


def cover_context(
    instance: SeparableInstance, partition: Partition, eps_cover: float = 0.0
) -> CoverContext:
    """Derive the cover quantities of ``partition`` (computed with ``d_lambda``)."""
    I = partition.I
    a_I = [instance.a[i] for i in I]
    dl = partition.d_lambda
    if not is_minimal_cover(a_I, dl, eps_cover):
        raise NotMinimalCover(
            f"coefficients {a_I} do not form a minimal cover of d_lambda={dl!r}"
        )
    delta = math.fsum(a_I) - dl
    # a_i >= delta holds exactly in real arithmetic; clamp ulp-level noise
    d_i = tuple(max(ai - delta, 0.0) for ai in a_I)
    i_strict = tuple(i for i, di in zip(I, d_i) if di > 0)
    l_minus = 1.0 / delta
    if i_strict:
        # lowest index among the minimizers (I is sorted)
        i0 = min(i_strict, key=lambda i: (instance.a[i], i))
        a0 = instance.a[i0]
        d0 = d_i[I.index(i0)]
        l_plus = (math.sqrt(a0) + math.sqrt(d0)) / (delta * math.sqrt(d0))
    else:
        i0 = None
        l_plus = l_minus
    return CoverContext(
        index=I,
        a=tuple(a_I),
        d_lambda=dl,
        delta=delta,
        d_i=d_i,
        i_strict=i_strict,
        i0=i0,
        l_plus=l_plus,
        l_minus=l_minus,
    )


@dataclass(frozen=True)
class NoCoverCertificate:
    """Outcome of a partition search that found no minimal-cover-yielding partition.

    ``exhaustive`` is True when every candidate ``J1`` was tried, which makes the
    certificate a proof (the convex hull is then polyhedral).
    """

    instance: SeparableInstance
    candidates_checked: int
    exhaustive: bool = True
    note: str = field(
        default="no minimal-cover-yielding partition exists; the set is packing-like "
        "and its convex hull is polyhedral (McCormick inequalities suffice)"
    )


def _greedy_cover(a: Sequence[float], pool: Sequence[int], d_lambda: float, eps_cover: float):
    """Grow ``I`` from ``pool`` (largest coefficient first) until its sum exceeds ``d_lambda``."""
    if d_lambda <= 0:
        return None
    order = sorted(pool, key=lambda i: (-a[i], i))
    chosen: list[int] = []
    total = 0.0
    for i in order:
        chosen.append(i)
        total += a[i]
        if total > d_lambda:
            break
    else:
        return None
    if is_minimal_cover([a[i] for i in chosen], d_lambda, eps_cover):
        return tuple(sorted(chosen))
    return None


def _candidate_j1(nonzero: Sequence[int], exhaustive: bool):
    if exhaustive:
        for r in range(len(nonzero) + 1):
            yield from itertools.combinations(nonzero, r)
    else:
        yield ()
        for i in nonzero:
            yield (i,)


def _search(instance, candidates, positive, eps_cover) -> dict:
    a = instance.a
    found: dict[tuple, Partition] = {}
    for J1 in candidates:
        in_j1 = set(J1)
        d_lambda = instance.d - math.fsum(a[i] for i in J1)
        pool = [i for i in positive if i not in in_j1]
        I = _greedy_cover(a, pool, d_lambda, eps_cover)
        if I is None:
            continue
        key = (I, tuple(sorted(J1)))
        if key not in found:
            found[key] = Partition.build(instance, I, None, J1)
    return found


def find_cover_partitions(
    instance: SeparableInstance,
    cap: int = EXHAUSTIVE_CAP,
    eps_cover: float = 0.0,
) -> list[Partition]:
    """Minimal-cover-yielding partitions reached by the greedy search.

    Each candidate ``J1`` fixes some pairs at one and sets ``d_lambda``; ``I``
    is then grown greedily (largest coefficient first) from the remaining
    positive coefficients.  Candidates are subsets of the positive
    coefficients; only when none of those succeeds are subsets that also
    contain negative coefficients (which raise ``d_lambda``) tried, so an
    empty result covers every sign pattern.  The result is sorted
    lexicographically by ``(I, J0, J1)``.

    Raises :class:`Infeasible` for an empty set and
    :class:`SearchCapExceeded` when the heuristic used above ``cap`` finds
    nothing.
    """
    a = instance.a
    if instance.is_empty():
        raise Infeasible(
            f"max attainable activity {instance.max_activity()!r} < d={instance.d!r}"
        )
    nonzero = [i for i in range(instance.n) if a[i] != 0]
    positive = [i for i in nonzero if a[i] > 0]
    found = _search(instance, _candidate_j1(positive, len(positive) <= cap), positive, eps_cover)
    exhaustive = len(nonzero) <= cap
    if not found and len(nonzero) > len(positive):
        found = _search(instance, _candidate_j1(nonzero, exhaustive), positive, eps_cover)
    if not found and not exhaustive:
        raise SearchCapExceeded(
            f"{len(nonzero)} nonzero coefficients exceed the exhaustive cap {cap}; "
            "heuristic search found no cover"
        )
    return sorted(found.values(), key=Partition.sort_key)


def find_cover_partition(
    instance: SeparableInstance,
    cap: int = EXHAUSTIVE_CAP,
    eps_cover: float = 0.0,
) -> Partition | NoCoverCertificate:
    """Lexicographically first minimal-cover-yielding partition, or a certificate of none."""
    parts = find_cover_partitions(instance, cap, eps_cover)
    if parts:
        return parts[0]
    return no_cover_certificate(instance)


def no_cover_certificate(instance: SeparableInstance) -> NoCoverCertificate:
    """Certificate for an instance whose exhaustive search came back empty."""
    nonzero = sum(1 for v in instance.a if v != 0)
    positive = sum(1 for v in instance.a if v > 0)
    checked = 2**positive + (2**nonzero if nonzero > positive else 0)
    return NoCoverCertificate(instance=instance, candidates_checked=checked)
