import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import comb

from precession.errors import DomainError
from precession.sign_elements import (LOG_BINOMIAL, FockSignOperator, SpinSignOperator,
                                      limit_compare, sgn_jx_element, sgn_jx_matrix,
                                      sgn_x_element, sgn_x_matrix)
from precession.spin_core import SpinQuantum, build_jx, spectral_sign

from oracles import sgn_x_quadrature, sgn_x_quadrature_matrix


def test_log_binomial_exact_for_small_n():
    for n in range(61):
        for k in range(n + 1):
            exact = comb(n, k, exact=True)
            assert LOG_BINOMIAL.comb(n, k) == pytest.approx(exact, rel=1e-12)
    assert LOG_BINOMIAL.comb(0, 0) == 1.0


def test_spin_element_examples():
    half = SpinQuantum.from_j("1/2")
    assert sgn_jx_element(half, Fraction(-1, 2), Fraction(1, 2)) == pytest.approx(1.0, abs=1e-15)
    assert sgn_jx_element(SpinQuantum.from_j(2), 0, 0) == 0.0
    assert sgn_jx_element(SpinQuantum.from_j("3/2"), Fraction(-3, 2), Fraction(3, 2)) == \
        pytest.approx(-0.5, abs=1e-15)
    with pytest.raises(DomainError):
        sgn_jx_element(half, Fraction(3, 2), Fraction(1, 2))


def test_fock_element_examples():
    assert sgn_x_element(0, 1) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-12)
    assert sgn_x_element(0, 2) == 0.0
    assert sgn_x_element(2, 1) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-12)
    assert sgn_x_element(1, 0) == sgn_x_element(0, 1)


def test_matrix_examples():
    assert np.allclose(sgn_jx_matrix(SpinQuantum(1)), [[0, 1], [1, 0]], atol=1e-15)
    m = sgn_jx_matrix(SpinQuantum(3))
    assert m[0, 3] == pytest.approx(-0.5) and np.all(np.diag(m) == 0)
    s = math.sqrt(2 / math.pi)
    assert np.allclose(sgn_x_matrix(1), [[0, s], [s, 0]], atol=1e-12)
    assert sgn_x_matrix(2)[0, 2] == 0.0


@pytest.mark.parametrize("two_j", range(0, 200))
def test_closed_form_matches_spectral_oracle(two_j):
    spin = SpinQuantum(two_j)
    closed = sgn_jx_matrix(spin)
    assert np.array_equal(closed, closed.T)
    assert np.max(np.abs(closed - spectral_sign(build_jx(spin))), initial=0.0) <= 1e-9


def test_fock_matches_quadrature_oracle():
    assert np.max(np.abs(sgn_x_matrix(40) - sgn_x_quadrature_matrix(40))) <= 1e-8
    assert sgn_x_quadrature(0, 1) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-12)


@pytest.mark.parametrize("two_j", range(0, 101))
def test_parity_selection_rule(two_j):
    m = sgn_jx_matrix(SpinQuantum(two_j))
    i = np.arange(two_j + 1)
    assert np.all(m[(i[:, None] - i[None, :]) % 2 == 0] == 0.0)


@given(st.integers(0, 120), st.data())
def test_elements_symmetric_exactly(two_j, data):
    spin = SpinQuantum(two_j)
    i = data.draw(st.integers(0, two_j))
    k = data.draw(st.integers(0, two_j))
    m, mp = Fraction(2 * i - two_j, 2), Fraction(2 * k - two_j, 2)
    assert sgn_jx_element(spin, m, mp) == sgn_jx_element(spin, mp, m)


@pytest.mark.parametrize("two_j", range(0, 60))
def test_sign_spectrum(two_j):
    vals = np.linalg.eigvalsh(sgn_jx_matrix(SpinQuantum(two_j)))
    zeros = np.abs(vals) <= 1e-9
    assert np.all(zeros | (np.abs(np.abs(vals) - 1) <= 1e-9))
    assert zeros.sum() == (1 if two_j % 2 == 0 else 0)


def test_limit_compare():
    assert limit_compare(SpinQuantum.from_j("1/2"), 0, 1) == pytest.approx(
        1 - math.sqrt(2 / math.pi), abs=1e-12)
    assert limit_compare(SpinQuantum.from_j(200), 0, 1) < limit_compare(SpinQuantum.from_j(20), 0, 1)
    assert limit_compare(SpinQuantum.from_j(10000), 0, 1) < 1e-3
    with pytest.raises(DomainError):
        limit_compare(SpinQuantum(2), 0, 3)


def test_large_spin_elements_finite():
    spin = SpinQuantum(8000)
    block = SpinSignOperator(spin).submatrix(np.arange(0, 8001, 400), np.arange(1, 8001, 400))
    assert np.all(np.isfinite(block)) and np.max(np.abs(block)) <= 1.0


def test_lazy_operators_match_dense():
    op = SpinSignOperator(SpinQuantum(9))
    rows, cols = [0, 3, 6], [1, 2, 9]
    assert np.array_equal(op.submatrix(rows, cols), op.dense()[np.ix_(rows, cols)])
    fock = FockSignOperator(12)
    assert np.array_equal(fock.submatrix(rows, cols), fock.dense()[np.ix_(rows, cols)])
