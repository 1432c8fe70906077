import math

import numpy as np
import pytest

from precession.averaging import average_over_orbit
from precession.errors import DomainError
from precession.oscillator_scores import (TruncationPolicy, fock_vector, lower_bound,
                                          lower_bound_constant, optimal_fock_coeffs,
                                          score_truncated, upper_bound, vacuum_series,
                                          wigner_function, wigner_grid)
from precession.sign_elements import sgn_x_matrix
from precession.spin_scores import classical_bound

from oracles import dense_score, hermite_function, sgn_x_quadrature_matrix, wigner_by_integral


def test_bound_values():
    assert round(lower_bound(3), 4) == 0.7087
    assert round(lower_bound(7), 4) == 0.6089
    assert lower_bound(1) == 1.0
    assert round(upper_bound(3), 4) == 0.8226
    assert round(upper_bound(7), 4) == 0.7273


@pytest.mark.parametrize("K", range(3, 100, 2))
def test_bound_ordering(K):
    assert classical_bound(K) < lower_bound(K) < upper_bound(K)


def test_policy_validation():
    with pytest.raises(DomainError):
        TruncationPolicy(0)
    with pytest.raises(DomainError):
        TruncationPolicy(30, convergence_overlap=1.5)
    with pytest.raises(DomainError):
        score_truncated(3, TruncationPolicy(31))
    with pytest.raises(DomainError):
        score_truncated(3, TruncationPolicy(3))
    with pytest.raises(DomainError):
        score_truncated(4, TruncationPolicy(40))


def test_small_truncation_exceeds_classical():
    r = score_truncated(3, TruncationPolicy(6))
    assert 2 / 3 < r.score <= 0.75


@pytest.mark.parametrize("K,n_max", [(3, 6), (3, 12), (3, 30), (5, 20), (5, 40), (7, 42)])
def test_matches_dense_quadrature_oracle(K, n_max):
    s = sgn_x_quadrature_matrix(n_max)
    full = score_truncated(K, TruncationPolicy(n_max), residues=None, check_convergence=False)
    assert full.score == pytest.approx(dense_score(s, K), abs=1e-9)


@pytest.mark.parametrize("K", [3, 5, 7])
def test_residue_zero_holds_the_maximum(K):
    for n_max in (10 * K, 100 * K, 1000 * K):
        policy = TruncationPolicy(n_max)
        default = score_truncated(K, policy, check_convergence=False)
        scan = score_truncated(K, policy, residues=None, check_convergence=False)
        assert default.score == scan.score


@pytest.mark.parametrize("K", [3, 7])
def test_nondecreasing_over_doubling_ladder(K):
    scores = [score_truncated(K, TruncationPolicy(K * 2 ** p), check_convergence=False).score
              for p in range(1, 15)]
    assert all(b >= a - 1e-13 for a, b in zip(scores, scores[1:]))


@pytest.mark.parametrize("K,n_max", [(3, 6000), (5, 9000), (7, 7000)])
def test_lanczos_route_matches_dense(K, n_max):
    policy = TruncationPolicy(n_max)
    dense = score_truncated(K, policy, solver="dense", check_convergence=False)
    fast = score_truncated(K, policy, solver="lanczos", check_convergence=False)
    assert fast.score == pytest.approx(dense.score, abs=1e-12)
    assert abs(np.dot(fast.optimal_state, dense.optimal_state)) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("K", [3, 5, 7])
def test_large_truncation_between_bounds(K):
    n_max = (100000 // K) * K
    r = score_truncated(K, TruncationPolicy(n_max))
    assert lower_bound(K) <= r.score <= upper_bound(K)
    assert r.converged


@pytest.mark.parametrize("K,n_max", [(3, 30), (3, 300), (5, 500), (7, 2100)])
def test_vacuum_series_matches_matrix(K, n_max):
    s = average_over_orbit(sgn_x_matrix(n_max), K)
    assert vacuum_series(K, n_max) == pytest.approx((s @ s)[0, 0], abs=1e-10)


@pytest.mark.parametrize("K", [3, 5, 7])
def test_vacuum_series_approaches_its_limit(K):
    limit = (1 + lower_bound_constant(K)) / K
    partial = [vacuum_series(K, n) for n in (10 ** 3, 10 ** 4, 10 ** 5)]
    assert partial[0] < partial[1] < partial[2] < limit
    # the missing tail shrinks like n**-1/2
    assert (limit - partial[2]) / (limit - partial[0]) == pytest.approx(0.1, abs=0.005)


def test_convergence_flag():
    loose = score_truncated(3, TruncationPolicy(30, convergence_overlap=0.5))
    strict = score_truncated(3, TruncationPolicy(30, convergence_overlap=1.0))
    assert loose.converged and not strict.converged
    assert loose.convergence_overlap == strict.convergence_overlap < 1.0


def test_optimal_coefficients_structure():
    policy = TruncationPolicy(300)
    coeffs = optimal_fock_coeffs(3, policy)
    assert math.fsum(c * c for _, c in coeffs) == pytest.approx(1.0, abs=1e-10)
    assert all(isinstance(c, float) and abs(c) >= 1e-8 for _, c in coeffs)
    state = score_truncated(3, policy, check_convergence=False).optimal_state
    rebuilt = fock_vector(3, coeffs, size=state.size)
    assert abs(np.dot(rebuilt, state)) == pytest.approx(1.0, abs=1e-10)
    assert np.all(rebuilt[np.arange(state.size) % 3 != 0] == 0)


@pytest.mark.parametrize("K,n_max", [(3, 300), (3, 6000), (7, 7000)])
def test_optimal_coefficients_uniform_sign(K, n_max):
    coeffs = optimal_fock_coeffs(K, TruncationPolicy(n_max))
    signs = {np.sign(c) for _, c in coeffs}
    assert len(signs) == 1, f"{sum(c < 0 for _, c in coeffs)} of {len(coeffs)} coefficients negative"


def test_wigner_reference_states():
    assert wigner_function([1.0], 0.0, 0.0) == pytest.approx(1 / math.pi)
    assert wigner_function([0.0, 1.0], 0.0, 0.0) == pytest.approx(-1 / math.pi)
    grid = wigner_grid([1.0], extent=4, resolution=41)
    assert grid.values.min() > 0
    assert grid.values.max() == pytest.approx(1 / math.pi)
    dx = grid.x[1] - grid.x[0]
    assert grid.values.sum() * dx * dx == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("coeffs", [[1, 1], [0.6, 0, 0.8j], [0.3, -0.5, 0.2, 0, 0.7], [0, 0, 0, 1]])
def test_wigner_matches_integral_oracle(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    c /= np.linalg.norm(c)
    psi = lambda x: sum(ck * hermite_function(n, x) for n, ck in enumerate(c))
    for x0, p0 in [(0.0, 0.0), (0.7, -0.3), (-1.2, 0.9), (2.0, 1.5)]:
        assert wigner_function(c, x0, p0) == pytest.approx(wigner_by_integral(psi, x0, p0), abs=1e-9)


def test_optimal_wigner_negative_and_symmetric():
    K = 3
    state = score_truncated(K, TruncationPolicy(150), check_convergence=False).optimal_state
    grid = wigner_grid(state, extent=5, resolution=41)
    assert grid.values.min() < 0
    r = np.linspace(0.1, 5, 9)
    t = np.linspace(0, 2 * np.pi, 13)
    rr, tt = np.meshgrid(r, t)
    base = wigner_function(state, rr * np.cos(tt), rr * np.sin(tt))
    for k in range(1, K):
        t2 = tt + 2 * np.pi * k / K
        turned = wigner_function(state, rr * np.cos(t2), rr * np.sin(t2))
        assert np.max(np.abs(turned - base)) <= 1e-6
