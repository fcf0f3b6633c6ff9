import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dyadic_duality import reference as ref
from dyadic_duality.haar import (
    StepFunction,
    ValidationError,
    average,
    bmo_norm,
    expand,
    haar_coefficient,
    haar_step_function,
    l2_deviation,
    make_atom,
    reconstruct,
    tl_norm,
)
from dyadic_duality.lattice import LatticeError, LatticeSpec, iter_nodes


def sf(values):
    return StepFunction.from_values(values)


def test_average_examples():
    f = sf([1.0, 0.0, 0.0, 0.0])
    assert average(f, (1, 0)) == 0.5
    assert average(sf([1.0, -1.0, 1.0, -1.0]), (0, 0)) == 0.0
    c = sf([3.5] * 8)
    assert all(average(c, n) == 3.5 for n in iter_nodes(c.spec))


def test_haar_coefficient_examples():
    spec = LatticeSpec(1, 4)
    h = haar_step_function(spec, (2, 1))
    assert haar_coefficient(h, (2, 1)) == pytest.approx(1.0, abs=1e-15)
    assert haar_coefficient(sf([2.0] * 16), (1, 1)) == 0.0
    assert haar_coefficient(sf([1.0, 0.0]), (0, 0)) == 0.5
    with pytest.raises(LatticeError):
        haar_coefficient(h, (4, 0))


def test_haar_function_matches_reference():
    for node in [(0, 0), (1, 1), (2, 3)]:
        h = haar_step_function(LatticeSpec(1, 3), node)
        assert h.values.tolist() == ref.haar_function(3, node)


def test_expand_zero():
    h = expand(sf(np.zeros(32)))
    assert h.mean == 0.0
    assert not np.any(h.flat())


def test_round_trip_depth8(rng):
    worst = 0.0
    for _ in range(1000):
        f = StepFunction(LatticeSpec(1, 8), rng.normal(size=256))
        g = reconstruct(expand(f))
        worst = max(worst, np.max(np.abs(g.values - f.values)))
    assert worst < 1e-12


def test_coefficients_match_inner_products(rng):
    f = StepFunction(LatticeSpec(1, 4), rng.normal(size=16))
    h = expand(f)
    for k in range(4):
        for i in range(2**k):
            assert h.coeffs[k][i] == pytest.approx(ref.haar_coefficient(f.values.tolist(), (k, i)), abs=1e-14)
            assert h.coeffs[k][i] == pytest.approx(haar_coefficient(f, (k, i)), abs=1e-15)


def test_expand_is_linear(rng):
    spec = LatticeSpec(1, 6)
    f = StepFunction(spec, rng.normal(size=64))
    g = StepFunction(spec, rng.normal(size=64))
    lhs = expand(2.5 * f + g).flat()
    rhs = 2.5 * expand(f).flat() + expand(g).flat()
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_mismatched_coefficients():
    h = expand(sf(np.arange(8.0)))
    bad = type(h)(LatticeSpec(1, 4), h.mean, h.coeffs)
    with pytest.raises(ValidationError):
        reconstruct(bad)


@pytest.mark.parametrize("depth", range(1, 11))
def test_parseval(rng, depth):
    for _ in range(20):
        f = StepFunction(LatticeSpec(1, depth), rng.standard_cauchy(size=2**depth))
        energy = np.sum(expand(f).flat() ** 2)
        assert energy == pytest.approx(l2_deviation(f) ** 2, rel=1e-10)


def test_bmo_examples():
    assert bmo_norm(sf([1.7] * 16)) == 0.0
    spec = LatticeSpec(1, 4)
    h = haar_step_function(spec, (2, 1))
    assert bmo_norm(h) == pytest.approx(4.0, rel=1e-14)
    assert ref.bmo_norm(h.values.tolist()) == pytest.approx(4.0, rel=1e-14)
    root = haar_step_function(spec, (0, 0))
    assert bmo_norm(root) == pytest.approx(2.0, rel=1e-14)
    assert ref.bmo_norm(root.values.tolist()) == pytest.approx(2.0, rel=1e-14)


def test_tl_examples():
    assert tl_norm(sf([-2.0] * 8)) == 0.0
    h = haar_step_function(LatticeSpec(1, 4), (2, 1))
    assert tl_norm(h) == pytest.approx(1.0, rel=1e-14)
    assert ref.tl_norm(h.values.tolist()) == pytest.approx(1.0, rel=1e-14)


def test_tl_bounded_by_twice_l2(rng):
    for _ in range(1000):
        f = StepFunction(LatticeSpec(1, 8), rng.normal(size=256) * rng.exponential(size=256))
        assert tl_norm(f) <= 2 * l2_deviation(f) * (1 + 1e-12)


finite = st.floats(-1e3, 1e3, allow_nan=False)
small_functions = st.integers(0, 4).flatmap(lambda d: arrays(np.float64, 2**d, elements=finite))


@settings(max_examples=60, deadline=None)
@given(small_functions)
def test_norms_match_brute_force(values):
    f = sf(values)
    assert bmo_norm(f) == pytest.approx(ref.bmo_norm(list(values)), rel=1e-9, abs=1e-9)
    assert tl_norm(f) == pytest.approx(ref.tl_norm(list(values)), rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(small_functions, finite, st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
def test_shift_invariance_and_homogeneity(values, c, lam):
    f = sf(values)
    b, t = bmo_norm(f), tl_norm(f)
    scale = 1e-9 * (1 + np.max(np.abs(values)) + abs(c))
    assert bmo_norm(f.shift(c)) == pytest.approx(b, rel=1e-7, abs=scale)
    assert tl_norm(f.shift(c)) == pytest.approx(t, rel=1e-7, abs=scale)
    assert bmo_norm(lam * f) == pytest.approx(abs(lam) * b, rel=1e-12, abs=1e-300)
    assert tl_norm(lam * f) == pytest.approx(abs(lam) * t, rel=1e-12, abs=1e-300)


def test_atoms():
    spec = LatticeSpec(1, 5)
    node = (2, 1)
    h = haar_step_function(spec, node)
    profile = h.values[8:16] / math.sqrt(0.25)
    atom = make_atom(spec, node, profile)
    assert tl_norm(atom) == pytest.approx(2.0, rel=1e-14)
    zero = make_atom(spec, node, np.zeros(8))
    assert tl_norm(zero) == 0.0
    with pytest.raises(ValidationError):
        make_atom(spec, node, profile * 1.01)
    with pytest.raises(ValidationError):
        make_atom(spec, node, np.full(8, 1.0))
    with pytest.raises(ValidationError):
        make_atom(spec, node, np.zeros(7))


def test_random_atoms_bounded(rng):
    spec = LatticeSpec(1, 8)
    for _ in range(200):
        k = int(rng.integers(0, 8))
        i = int(rng.integers(0, 2**k))
        width = 2 ** (8 - k)
        p = rng.uniform(-1, 1, size=width)
        p -= p.mean()
        p *= 2.0**k / np.max(np.abs(p))
        assert tl_norm(make_atom(spec, (k, i), p)) <= 2 + 1e-12
