import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilift import (
    NEG_INFINITY,
    CapExceeded,
    Partition,
    SeparableInstance,
    binary_points,
    build_seed,
    cover_context,
    phi_exact,
    psi,
    sample_lifting,
)
from bilift.lifting import lifting_csv, phi_enumerate, read_lifting_csv

from helpers import brute_phi, random_cover

R2 = math.sqrt(2.0)


def cover_of(a, d):
    inst = SeparableInstance(a, d)
    return cover_context(inst, Partition.trivial(inst))


def _ac(inst):
    return inst.a, inst.d


@pytest.fixture
def c22():
    return cover_of((2.0, 2.0), 3.0)


def test_phi_examples(c22):
    assert phi_exact(c22, 0.0) == 0.0
    # grid oracle in root space, frozen
    assert phi_exact(c22, -0.5) == pytest.approx(-0.5425821165873712, abs=1e-12)
    assert phi_exact(c22, 1.0) == pytest.approx(1 + R2, abs=1e-12)
    assert phi_exact(c22, -1.0) == pytest.approx(-1.0, abs=1e-15)


def test_phi_negative_infinity(c22):
    assert phi_exact(c22, -1.0000001) is NEG_INFINITY
    assert NEG_INFINITY < -1e300
    assert float(NEG_INFINITY) == -math.inf
    assert str(NEG_INFINITY) == "-inf"


def test_closed_form_matches_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(30):
        cov = cover_of(*_ac(random_cover(rng, int(rng.integers(1, 5)))))
        for t in np.linspace(-cov.delta, 0.0, 7):
            assert phi_exact(cov, t) == pytest.approx(phi_enumerate(cov, t), abs=1e-9)


def test_equal_coefficients_case():
    # a_n equal to delta: -sqrt(-delta)/sqrt(Delta)
    cov = cover_of((1.0, 1.0), 1.0)
    assert phi_exact(cov, -0.25) == pytest.approx(-0.5, abs=1e-15)


def test_psi_examples(c22):
    assert psi(c22, 0.0) == 0.0
    assert psi(c22, -2.0) == pytest.approx(-2 - R2, abs=1e-12)
    assert psi(cover_of((1.0, 1.0), 1.0), 0.5) == 0.5
    np.testing.assert_allclose(psi(c22, np.array([-1.0, 0.0, 1.0])), [-1.0, 0.0, 1 + R2])


def test_psi_continuous_at_breakpoints(c22):
    D = c22.delta
    for b in (-D, 0.0):
        assert psi(c22, b - 1e-12) == pytest.approx(psi(c22, b), abs=1e-10)


def test_slope_order():
    rng = np.random.default_rng(4)
    for _ in range(100):
        cov = cover_of(*_ac(random_cover(rng, int(rng.integers(1, 7)))))
        assert cov.l_plus >= cov.l_minus > 0


def test_phi_matches_brute_force():
    rng = np.random.default_rng(9)
    for _ in range(8):
        inst = random_cover(rng, int(rng.integers(1, 4)))
        cov = cover_of(*_ac(inst))
        c = build_seed(cov).coeffs
        hi = sum(cov.a) - cov.delta
        for t in rng.uniform(-cov.delta, hi, size=50):
            want = brute_phi(cov.a, c, cov.d_lambda, t)
            assert phi_exact(cov, t) == pytest.approx(want, abs=1e-3)


def test_psi_dominates_phi_on_grid():
    rng = np.random.default_rng(1)
    for _ in range(30):
        cov = cover_of(*_ac(random_cover(rng, int(rng.integers(1, 7)))))
        for s in sample_lifting(cov, -cov.delta - 1, sum(cov.a) - cov.delta + 1, 200):
            if s.phi is not NEG_INFINITY:
                assert s.psi >= s.phi - 1e-9


@settings(max_examples=200, deadline=None)
@given(
    a=st.lists(st.floats(1.01, 5.0), min_size=1, max_size=4),
    delta=st.floats(0.2, 2.0),
    u=st.floats(-3.0, 3.0),
    v=st.floats(-3.0, 3.0),
)
def test_psi_subadditive(a, delta, u, v):
    a = tuple(delta * x for x in a)
    cov = cover_of(a, sum(a) - delta)
    u, v = u * cov.delta, v * cov.delta
    assert psi(cov, u) + psi(cov, v) >= psi(cov, u + v) - 1e-12


def test_local_convexity_at_interior_optima():
    rng = np.random.default_rng(6)
    eta = 1e-3
    for _ in range(20):
        cov = cover_of(*_ac(random_cover(rng, int(rng.integers(2, 5)))))
        for t in rng.uniform(0.05, sum(cov.a) - cov.delta - 0.05, size=10):
            if any(abs(t - b) < 2 * eta for b in binary_points(cov)):
                continue
            lo, mid, hi = (phi_exact(cov, t + s) for s in (-eta, 0.0, eta))
            assert mid <= 0.5 * (lo + hi) + 1e-9


def test_binary_points_and_equal_coefficient_values():
    cov = cover_of((1.0, 1.0), 1.0)
    pts = binary_points(cov)
    assert pts == [-1.0, 0.0, 1.0]
    for t in pts:
        assert phi_exact(cov, t) == pytest.approx(t / cov.delta, abs=1e-12)


def test_sample_lifting_examples(c22):
    rows = sample_lifting(c22, -1.0, 1.0, 5)
    assert [r.delta for r in rows] == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert all(r.psi >= r.phi - 1e-9 for r in rows)
    assert all(r.phi is NEG_INFINITY for r in sample_lifting(c22, -3.0, -1.5, 4))
    merged = sample_lifting(c22, -1.0, 1.0, 2, extra=[0.25, 7.0])
    assert [r.delta for r in merged] == [-1.0, 0.25, 1.0]


@pytest.mark.parametrize("lo, hi, steps", [(1.0, 1.0, 3), (0.0, 1.0, 1)])
def test_sample_lifting_preconditions(c22, lo, hi, steps):
    with pytest.raises(ValueError):
        sample_lifting(c22, lo, hi, steps)


def test_csv_round_trip(c22):
    rows = sample_lifting(c22, -2.0, 2.0, 9)
    text = lifting_csv(rows)
    assert text.splitlines()[0] == "delta,phi,psi"
    assert "-inf" in text
    back = read_lifting_csv("# header\n" + text)
    assert back == rows


def test_enumeration_cap():
    cov = cover_of((1.0,) * 25, 24.5)
    with pytest.raises(CapExceeded):
        phi_exact(cov, 0.5)
    # the closed form needs no enumeration
    assert phi_exact(cov, -0.25) < 0
