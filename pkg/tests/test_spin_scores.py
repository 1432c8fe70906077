import math
import warnings

import numpy as np
import pytest
from scipy.special import comb

from precession.errors import DomainError, UnsupportedRangeError
from precession.measurement_sim import QuantumState, exact_expectation
from precession.spin_core import SpinQuantum, build_jx, spectral_sign
from precession.spin_scores import (DegenerateMaximumWarning, classical_bound, optimal_state,
                                    score_closed_form, score_numeric, violation_sweep)

from oracles import dense_score


def first_value(K):
    return 0.5 * (1 + comb(K - 1, (K - 1) // 2, exact=True) / 2 ** (K - 1))


def test_classical_bound_values():
    assert classical_bound(3) == 2 / 3
    assert classical_bound(7) == 4 / 7
    assert classical_bound(4) == 0.5
    with pytest.raises(DomainError):
        classical_bound(0)


@pytest.mark.parametrize("K", [2, 3, 4, 5, 6, 7])
def test_numeric_matches_dense_oracle(K):
    for dim in range(1, 41):
        s = spectral_sign(build_jx(SpinQuantum(dim - 1)))
        assert score_numeric(K, dim).score == pytest.approx(dense_score(s, K), abs=1e-10)


def test_score_examples():
    assert score_numeric(3, 4).score == 0.75
    assert score_numeric(3, 5).score == pytest.approx(0.625, abs=1e-12)
    for dim in (1, 2, 9, 30):
        assert score_numeric(4, dim).score == 0.5
    assert score_closed_form(3, 3).score == 0.5
    assert score_closed_form(5, 8).score == pytest.approx(score_numeric(5, 8).score, abs=1e-10)


@pytest.mark.parametrize("K", [3, 5, 7, 9])
def test_first_nontrivial_value(K):
    assert score_closed_form(K, K + 1).score == pytest.approx(first_value(K), abs=1e-12)
    assert score_numeric(K, K + 1).score == pytest.approx(first_value(K), abs=1e-10)


def test_closed_form_range_limit():
    with pytest.raises(UnsupportedRangeError):
        score_closed_form(3, 22)
    with pytest.raises(DomainError):
        score_numeric(3, 0)


@pytest.mark.parametrize("K", [3, 5, 7])
def test_first_value_is_largest_up_to_7K(K):
    first = score_numeric(K, K + 1).score
    for dim in range(K + 2, 7 * K + 1):
        assert score_numeric(K, dim).score < first


@pytest.mark.parametrize("K", [3, 5, 7])
def test_scores_within_envelope(K):
    for dim in range(1, 12 * K):
        r = score_numeric(K, dim)
        assert 0.5 - 1e-15 <= r.score <= classical_bound(K) + 0.1559
        assert r.gap == pytest.approx(r.score - r.classical_bound, abs=1e-15)


@pytest.mark.parametrize("K,dim", [(3, 4), (3, 10), (5, 17), (7, 40), (5, 33)])
def test_report_state_reaches_score(K, dim):
    r = score_numeric(K, dim)
    state = r.optimal_state
    assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-12)
    assert state[np.flatnonzero(np.abs(state) > 1e-12)[0]] > 0
    assert exact_expectation(QuantumState(state), K) == pytest.approx(r.score, abs=1e-9)


def test_optimal_state_closed_form():
    s = 1 / math.sqrt(2)
    assert np.allclose(optimal_state(3, 4), [-s, 0, 0, s])
    assert np.allclose(optimal_state(7, 8), [-s] + [0] * 6 + [s])
    assert np.allclose(optimal_state(5, 6), [s] + [0] * 4 + [s])
    numeric = score_numeric(3, 4).optimal_state
    assert abs(np.dot(numeric, optimal_state(3, 4))) ** 2 == pytest.approx(1.0, abs=1e-9)


def test_degenerate_maximum_is_flagged():
    # at d <= K every block is 1x1 and all attain 1/2
    r = score_numeric(5, 3)
    assert r.degenerate and len(r.maximizing_blocks) == 3
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        optimal_state(5, 3)
    assert any(issubclass(w.category, DegenerateMaximumWarning) for w in caught)


def test_sweep_small_patterns():
    s3 = violation_sweep(3, (4, 20))
    assert s3.violating_dims() == [4] + list(range(6, 21))
    s7 = violation_sweep(7, (8, 20))
    assert s7.violating_dims() == [8, 10, 12] + list(range(14, 21))
    assert s3.mean == pytest.approx(math.fsum(r.score for r in s3.reports) / 17)
    assert violation_sweep(3, (5, 4)).reports == []
