"""Harmonic-oscillator scores in a truncated Fock basis, bounds and Wigner data."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .averaging import block_maxima
from .errors import ConsistencyError, DomainError
from .sign_elements import FockSignOperator, fock_sign_block
from .spin_core import fix_phase
from .spin_scores import ScoreReport, classical_bound

# Largest negative weight a Wigner function can place on a pointed
# phase-space sector (R. Werner's bound), used as a published constant.
WERNER_SECTOR_BOUND = 0.1559


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock cutoff (inclusive) and the overlap threshold for convergence."""

    n_max: int
    convergence_overlap: float = 0.99

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {self.n_max}")
        if not 0.0 < self.convergence_overlap <= 1.0:
            raise DomainError("convergence_overlap must lie in (0, 1]")

    def doubled(self) -> "TruncationPolicy":
        return TruncationPolicy(2 * self.n_max, self.convergence_overlap)


def _check_odd(K: int):
    if not isinstance(K, (int, np.integer)) or K < 1 or K % 2 == 0:
        raise DomainError(f"K must be an odd positive integer, got {K!r}")


def _top_fock_state(K: int, n_max: int, residues, solver: str = "auto"):
    maxima = block_maxima(FockSignOperator(n_max), K, kind="fock", residues=residues,
                          vectors=True, solver=solver)
    best = max(maxima, key=lambda m: (m.singular_value, -m.block.residue))
    return best, maxima


def score_truncated(K: int, policy: TruncationPolicy, residues=(0,),
                    check_convergence: bool = True, solver: str = "auto") -> ScoreReport:
    """Largest eigenvalue of E_K[pos(X)] on Fock levels 0..n_max.

    By default only the residue-0 block is searched; pass ``residues=None``
    to scan every residue class.  With ``check_convergence`` the top state
    is recomputed at twice the cutoff and ``|<psi_n|psi_2n>|^2`` is stored.
    Large blocks use FFT-based Lanczos (``solver="auto"``, see
    ``averaging.block_maxima``); ``"dense"`` and ``"lanczos"`` force one route.
    """
    _check_odd(K)
    n_max = policy.n_max
    if n_max % K:
        raise DomainError(f"n_max={n_max} must be a multiple of K={K}")
    if n_max < 2 * K:
        raise DomainError(f"n_max={n_max} must be at least 2K={2 * K}")
    best, maxima = _top_fock_state(K, n_max, residues, solver)
    state = fix_phase(best.vector)
    overlap = converged = None
    if check_convergence:
        wide, _ = _top_fock_state(K, 2 * n_max, [best.block.residue], solver)
        overlap = float(abs(np.vdot(wide.vector[: n_max + 1], state)) ** 2)
        converged = overlap > policy.convergence_overlap
    winners = [m for m in maxima if m.singular_value >= best.singular_value - 1e-12]
    return ScoreReport.build(
        K, n_max + 1, 0.5 * (1.0 + best.singular_value), "numeric",
        optimal_state=state, basis="fock",
        maximizing_blocks=[str(m.block.label) for m in winners],
        degenerate=len(winners) > 1 or best.inner_gap <= 1e-12,
        converged=converged, convergence_overlap=overlap)


def lower_bound_constant(K: int) -> float:
    """F_K = (2/pi) sum_{k=1}^{(K-1)/2} (-1)^k arccos(2 sin(pi k / K) - 1)."""
    _check_odd(K)
    k = np.arange(1, (K - 1) // 2 + 1)
    terms = np.where(k % 2, -1.0, 1.0) * np.arccos(2 * np.sin(np.pi * k / K) - 1)
    return 2.0 / math.pi * math.fsum(terms)


def lower_bound(K: int) -> float:
    """Closed-form lower bound 1/2 (1 + sqrt((1 + F_K) / K)) on the oscillator score."""
    return 0.5 * (1.0 + math.sqrt((1.0 + lower_bound_constant(K)) / K))


def vacuum_series(K: int, n_max: int) -> float:
    """sum over odd multiples (2k+1)K <= n_max of <0|sgn X|(2k+1)K>^2.

    This is <0|(E_K[sgn X])^2|0> in the truncated basis; its limit is
    (1 + F_K) / K.
    """
    _check_odd(K)
    levels = np.arange(K, n_max + 1, 2 * K)
    if levels.size == 0:
        return 0.0
    return math.fsum(fock_sign_block([0], levels)[0] ** 2)


def upper_bound(K: int) -> float:
    """Classical bound plus the sector-negativity constant."""
    _check_odd(K)
    if K < 3:
        raise DomainError("the sector upper bound needs K >= 3")
    return classical_bound(K) + WERNER_SECTOR_BOUND


def _pattern_sign(m: np.ndarray) -> np.ndarray:
    """(-1)**ceil(m/2) for non-negative integers m."""
    return np.where(((m + 1) // 2) % 2 == 0, 1.0, -1.0)


def optimal_fock_coeffs(K: int, policy: TruncationPolicy, threshold: float = 1e-8,
                        leak_tol: float = 1e-10) -> list[tuple[int, float]]:
    """Real c_m in |psi> = sum_m (-1)**ceil(m/2) c_m |mK>, for |c_m| >= threshold.

    Raises ConsistencyError if the top state has weight above ``leak_tol``
    on levels that are not multiples of K.
    """
    report = score_truncated(K, policy, check_convergence=False)
    vec = np.asarray(report.optimal_state)
    levels = np.arange(vec.size)
    off = np.abs(vec[levels % K != 0])
    if off.size and off.max() > leak_tol:
        raise ConsistencyError(f"optimal state leaks {off.max():.3e} outside multiples of K")
    m = np.arange(0, vec.size, K) // K
    coeffs = vec[m * K].real * _pattern_sign(m)
    if coeffs[np.argmax(np.abs(coeffs))] < 0:
        coeffs = -coeffs
    return [(int(mi), float(c)) for mi, c in zip(m, coeffs) if abs(c) >= threshold]


def fock_vector(K: int, coeffs, size: int | None = None) -> np.ndarray:
    """Rebuild the Fock vector from (m, c_m) pairs with the alternating pattern."""
    pairs = list(coeffs)
    top = max(m for m, _ in pairs) * K
    vec = np.zeros(size if size is not None else top + 1)
    for m, c in pairs:
        vec[m * K] = _pattern_sign(np.array(m)) * c
    return vec


def wigner_function(coeffs, x, p) -> np.ndarray:
    """Wigner function W(x, p) of the pure state sum_n coeffs[n] |n>.

    Normalised so that the integral over dx dp is 1 (vacuum peak 1/pi), with
    the quadratures x = (a + a^dag)/sqrt 2 and p = (a - a^dag)/(i sqrt 2).
    The Fock kernel is summed one off-diagonal distance L at a time, using
    the normalised associated-Laguerre recurrence in n, seeded in log-space.
    Only distances L between occupied levels are evaluated.
    """
    c = np.asarray(coeffs, dtype=complex)
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    s = 2.0 * (x ** 2 + p ** 2)
    theta = np.arctan2(p, x)
    occupied = np.flatnonzero(c != 0)
    total = np.zeros(x.shape)
    if occupied.size == 0:
        return total
    distances = np.unique(np.subtract.outer(occupied, occupied))
    log_s = np.log(np.where(s > 0, s, 1.0))
    for L in distances[distances >= 0]:
        starts = occupied[np.isin(occupied + L, occupied)]
        rho = c[starts] * np.conj(c[starts + L]) * np.where(starts % 2, -1.0, 1.0)
        n_top = int(starts.max())
        weights = np.zeros(n_top + 1, dtype=complex)
        weights[starts] = rho
        if L == 0:
            f_prev = np.exp(-s / 2)
        else:
            f_prev = np.where(s > 0, np.exp(0.5 * L * log_s - s / 2 - 0.5 * gammaln(L + 1)), 0.0)
        acc = weights[0] * f_prev
        if n_top >= 1:
            f_cur = (L + 1 - s) * f_prev / math.sqrt(L + 1)
            acc = acc + weights[1] * f_cur
            for n in range(1, n_top):
                f_next = ((2 * n + L + 1 - s) * f_cur - math.sqrt(n * (n + L)) * f_prev) \
                    / math.sqrt((n + 1) * (n + L + 1))
                f_prev, f_cur = f_cur, f_next
                if weights[n + 1] != 0:
                    acc = acc + weights[n + 1] * f_cur
        term = (np.exp(1j * L * theta) * acc).real
        total += term if L == 0 else 2.0 * term
    return total / math.pi


@dataclass(frozen=True)
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray   # values[i, k] = W(x[k], p[i])
    extent: float
    resolution: int


def wigner_grid(coeffs, extent: float = 7.0, resolution: int = 141) -> WignerGrid:
    """Sample the Wigner function on a square grid [-extent, extent]^2."""
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    axis = np.linspace(-extent, extent, resolution)
    xx, pp = np.meshgrid(axis, axis)
    return WignerGrid(axis, axis, wigner_function(coeffs, xx, pp), float(extent), resolution)
