import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from landau1d.errors import InvalidInputError
from landau1d.interactions import (SQRT2, CoefficientVector, det_coefficients, eval_w,
                                   oracle_w_direct, oracle_w_slater_pair, pair_coefficients,
                                   slater_amplitudes, slater_pair_coefficients, w_values)
from landau1d.potentials import eval_vm, vm


def test_ground_pair_reduces_to_v0():
    cv = pair_coefficients(0, 0)
    assert cv.weights == (1.0,)
    for x in (0.0, 0.4, 3.0):
        assert eval_w(cv, x) == pytest.approx(eval_vm(0, x / SQRT2) / SQRT2, rel=1e-14)
    assert eval_w(cv, 0.0) == pytest.approx(math.sqrt(math.pi) / SQRT2)


def test_pair_11_exact():
    assert pair_coefficients(1, 1).exact == (Fraction(1, 2), Fraction(0), Fraction(1, 2))


def test_pair_13_has_odd_terms():
    # a product of two odd states is not restricted to even indices
    cv = pair_coefficients(1, 3)
    assert any(cv.exact[j] != 0 for j in range(1, len(cv.exact), 2))


def test_slater_01_and_support():
    assert slater_pair_coefficients(0, 1).exact == (Fraction(0), Fraction(1))
    for j, k in ((0, 5), (1, 4), (2, 3)):
        assert set(slater_pair_coefficients(j, k).support) <= {1, 3, 5}


def test_slater_amplitude_antisymmetry():
    assert slater_amplitudes(2, 3) == [-a for a in slater_amplitudes(3, 2)]


def test_det_small_cases():
    assert det_coefficients([0, 1]).exact == slater_pair_coefficients(0, 1).exact
    cv = det_coefficients([0, 1, 2])
    assert set(cv.support) <= {1, 3}
    assert sum(cv.exact) == 1


@pytest.mark.parametrize("m1,m2,x", [(1, 1, 1.0), (2, 3, 2.0), (0, 4, 0.3), (3, 3, 7.0)])
def test_direct_oracle(m1, m2, x):
    assert oracle_w_direct(m1, m2, x) == pytest.approx(eval_w(pair_coefficients(m1, m2), x),
                                                       rel=1e-6)


@pytest.mark.parametrize("j,k,x", [(0, 1, 1.0), (1, 2, 0.5), (1, 2, 4.0), (2, 5, 2.0)])
def test_slater_oracle(j, k, x):
    assert oracle_w_slater_pair(j, k, x) == pytest.approx(
        eval_w(slater_pair_coefficients(j, k), x), rel=1e-6)
    if (j, k) == (0, 1):
        assert oracle_w_slater_pair(0, 1, x) == pytest.approx(eval_vm(1, x / SQRT2) / SQRT2,
                                                              rel=1e-8)


def test_coulomb_tail():
    for cv in (pair_coefficients(2, 5), slater_pair_coefficients(1, 4), det_coefficients([0, 1, 2, 3])):
        assert 1e4 * eval_w(cv, 1e4) == pytest.approx(1.0, abs=1e-6)


def test_vectorized_matches_scalar():
    cv = pair_coefficients(1, 2)
    xs = np.array([0.0, 0.5, 2.0])
    assert np.allclose(w_values(cv, xs), [eval_w(cv, x) for x in xs], rtol=1e-15)


def test_invalid():
    with pytest.raises(InvalidInputError):
        slater_pair_coefficients(2, 2)
    with pytest.raises(InvalidInputError):
        det_coefficients([0])
    with pytest.raises(InvalidInputError):
        det_coefficients([1, 0])
    with pytest.raises(InvalidInputError):
        det_coefficients([0, 0, 1])
    with pytest.raises(InvalidInputError):
        pair_coefficients(-1, 0)
    with pytest.raises(InvalidInputError):
        CoefficientVector((0.5, 0.6))
    with pytest.raises(InvalidInputError):
        CoefficientVector((1.5, -0.5))


@settings(max_examples=40, deadline=None)
@given(m1=st.integers(0, 12), m2=st.integers(0, 12))
def test_pair_convexity_property(m1, m2):
    cv = pair_coefficients(m1, m2)
    assert sum(cv.exact) == 1
    assert all(f >= 0 for f in cv.exact)
    assert cv.J == m1 + m2
    assert cv.exact == pair_coefficients(m2, m1).exact


@settings(max_examples=40, deadline=None)
@given(j=st.integers(0, 12), k=st.integers(0, 12))
def test_slater_odd_property(j, k):
    if j == k:
        return
    cv = slater_pair_coefficients(j, k)
    assert sum(cv.exact) == 1
    assert all(cv.exact[a] == 0 for a in range(0, len(cv.exact), 2))


def test_det_lower_envelope():
    xs = np.linspace(0, 30, 61)
    for N in range(2, 7):
        cv = det_coefficients(list(range(N)))
        floor = vm(2 * N - 3, xs / SQRT2) / SQRT2
        assert np.min(w_values(cv, xs) - floor) >= -1e-9
