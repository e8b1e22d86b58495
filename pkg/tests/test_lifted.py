import math

import numpy as np
import pytest

from bilift import (
    ClassMismatch,
    GammaClass,
    LiftedCut,
    NotMinimalCover,
    Partition,
    PointPair,
    SeparableInstance,
    build_gamma,
    build_lifted_cut,
    check_validity,
    cover_context,
    eval_lifted,
    psi,
)
from bilift.verify import ValidityOptions

from helpers import mixed_instance

R2 = math.sqrt(2.0)


@pytest.fixture
def cover22():
    inst = SeparableInstance((2.0, 2.0), 3.0)
    return cover_context(inst, Partition.trivial(inst))


def test_gamma_examples(cover22):
    g = build_gamma(cover22, 2, 1.5, "J0plus")
    assert float(g.value(0.4, 0.6)) == pytest.approx(1.5 * (1 + R2) * 0.4, abs=1e-12)
    assert float(g.value(0.4, 0.6)) == pytest.approx(1.448528137423857, abs=1e-12)
    g = build_gamma(cover22, 2, -1.0, "J0minus")
    assert float(g.value(1.0, 1.0)) == pytest.approx(-1.0, abs=1e-15)
    g = build_gamma(cover22, 2, 3.0, "J1plus_large")
    assert float(g.value(1.0, 1.0)) == 0.0


@pytest.mark.parametrize(
    "i, a_i, tag",
    [
        (0, 1.0, "J0plus"),
        (2, -1.0, "J0plus"),
        (2, -1.0, "J1plus_small"),
        (2, 1.0, "J0minus"),
        (2, 0.0, "J1minus"),
        (2, 1.5, "J1plus_large"),
    ],
)
def test_class_mismatch(cover22, i, a_i, tag):
    with pytest.raises(ClassMismatch):
        build_gamma(cover22, i, a_i, tag)


def test_large_class_needs_strict_indices():
    inst = SeparableInstance((1.0, 1.0), 1.0)
    cov = cover_context(inst, Partition.trivial(inst))
    with pytest.raises(ClassMismatch):
        build_gamma(cov, 5, 2.0, GammaClass.J1plus_large)


def test_builder_assigns_classes():
    cases = [
        ((2.0, 2.0, 1.5), 3.0, [0, 1], [2], [], GammaClass.J0plus),
        ((2.0, 2.0, -1.0), 3.0, [0, 1], [2], [], GammaClass.J0minus),
        ((2.0, 2.0, 3.0), 6.0, [0, 1], [], [2], GammaClass.J1plus_large),
        ((2.0, 2.0, 1.0), 4.0, [0, 1], [], [2], GammaClass.J1plus_small),
        ((2.0, 2.0, -1.0), 2.0, [0, 1], [], [2], GammaClass.J1minus),
    ]
    for a, d, I, J0, J1, tag in cases:
        inst = SeparableInstance(a, d)
        cut = build_lifted_cut(inst, Partition.build(inst, I, J0, J1))
        assert [g.class_tag for g in cut.gammas] == [tag]
        np.testing.assert_allclose(cut.seed.coeffs, [2 + R2] * 2, rtol=1e-14)


def test_equal_coefficient_cover_uses_small_form():
    inst = SeparableInstance((1.0, 1.0, 5.0), 6.0)
    cut = build_lifted_cut(inst, Partition.build(inst, [0, 1], [], [2]))
    assert cut.gammas[0].class_tag is GammaClass.J1plus_small


def test_zero_coefficient_gamma_is_zero():
    inst = SeparableInstance((2.0, 2.0, 0.0), 3.0)
    cut = build_lifted_cut(inst, Partition.build(inst, [0, 1], [2], []))
    np.testing.assert_array_equal(cut.gammas[0].value(np.random.default_rng(0).random(50), 0.3), 0.0)


def test_eval_lifted_examples():
    inst = SeparableInstance((2.0, 2.0, 1.5), 3.0)
    cut = build_lifted_cut(inst, Partition.build(inst, [0, 1], [2], []))
    pt = PointPair.of(inst, [0, 1, 1], [1, 1, 1])
    # -(2 + sqrt 2) + 1.5 (1 + sqrt 2) + 1
    assert eval_lifted(cut, pt) == pytest.approx(1.2071067811865475, abs=1e-12)
    fixing = PointPair.of(inst, [1, 1, 0], [1, 1, 0])
    assert eval_lifted(cut, fixing) == pytest.approx(1.0, abs=1e-15)
    origin = PointPair.of(inst, [0, 0, 0], [0, 0, 0])
    assert eval_lifted(cut, origin) == pytest.approx(-2 * (2 + R2) + 1, abs=1e-12)


def test_builder_propagates_not_minimal():
    inst = SeparableInstance((2.0, 2.0, 2.0), 3.0)
    with pytest.raises(NotMinimalCover):
        build_lifted_cut(inst, Partition.trivial(inst))


def test_json_round_trip():
    inst, part = mixed_instance(np.random.default_rng(0))
    cut = build_lifted_cut(inst, part)
    obj = cut.to_json()
    assert obj["type"] == "lifted_bilinear_cover"
    assert {g["class"] for g in obj["gammas"]} == {t.value for t in GammaClass}
    back = LiftedCut.from_json(obj)
    X = np.random.default_rng(1).random((100, inst.n))
    np.testing.assert_array_equal(back.slack(X, X[::-1]), cut.slack(X, X[::-1]))


def test_gamma_dominates_psi_and_is_concave():
    rng = np.random.default_rng(7)
    for _ in range(10):
        inst, part = mixed_instance(rng)
        cut = build_lifted_cut(inst, part)
        assert {g.class_tag for g in cut.gammas} == set(GammaClass)
        for g in cut.gammas:
            x, y = rng.random(5000), rng.random(5000)
            shift = g.a_i * x * y - (g.a_i if g.class_tag.fixed_at_one else 0.0)
            assert np.all(g.value(x, y) >= psi(cut.cover, shift) - 1e-9)
            u, v = rng.random(5000), rng.random(5000)
            mid = g.value(0.5 * (x + u), 0.5 * (y + v))
            assert np.all(mid >= 0.5 * (g.value(x, y) + g.value(u, v)) - 1e-12)
            assert float(g.value(*g.fixing_point())) == 0.0


def test_restriction_reproduces_seed():
    rng = np.random.default_rng(8)
    for _ in range(10):
        inst, part = mixed_instance(rng)
        cut = build_lifted_cut(inst, part)
        X, Y = rng.random((500, inst.n)), rng.random((500, inst.n))
        X[:, list(part.J0)] = Y[:, list(part.J0)] = 0.0
        X[:, list(part.J1)] = Y[:, list(part.J1)] = 1.0
        np.testing.assert_array_equal(cut.slack(X, Y), cut.seed.slack(X, Y))


def test_mixed_cut_valid():
    rng = np.random.default_rng(12)
    for _ in range(5):
        inst, part = mixed_instance(rng)
        rep = check_validity(build_lifted_cut(inst, part), inst, ValidityOptions(samples=5000))
        assert not rep.violated, rep.min_slack
