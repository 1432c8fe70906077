"""Spin-j precession scores: numeric block diagonalisation and closed forms."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .averaging import block_maxima
from .errors import DomainError, UnsupportedRangeError
from .sign_elements import LOG_BINOMIAL, SpinSignOperator, spin_sign_block
from .spin_core import SpinQuantum, fix_phase

TIE_TOLERANCE = 1e-12


class DegenerateMaximumWarning(UserWarning):
    """The top eigenvalue of Q_K is degenerate; the returned state is one member."""


def classical_bound(K: int) -> float:
    """Largest score reachable by a classical density: (K+1)/2K for odd K, 1/2 for even K."""
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    return (K + 1) / (2 * K) if K % 2 else 0.5


@dataclass
class ScoreReport:
    K: int
    dim: int
    score: float
    method: str
    classical_bound: float
    gap: float
    optimal_state: np.ndarray | None = None
    maximizing_blocks: list[str] = field(default_factory=list)
    degenerate: bool = False
    basis: str = "spin"
    converged: bool | None = None
    convergence_overlap: float | None = None
    standard_error: float | None = None

    @classmethod
    def build(cls, K, dim, score, method, **extra) -> "ScoreReport":
        bound = classical_bound(K)
        return cls(K=K, dim=dim, score=float(score), method=method,
                   classical_bound=bound, gap=float(score) - bound, **extra)

    def to_dict(self, include_state: bool = True) -> dict:
        out = asdict(self)
        state = out.pop("optimal_state")
        if include_state and state is not None:
            out["optimal_state"] = [float(c) for c in np.asarray(state).real]
        return out


def _check(K: int, dim: int):
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise DomainError(f"dimension must be a positive integer, got {dim!r}")


def score_numeric(K: int, dim: int, with_state: bool = True) -> ScoreReport:
    """Largest eigenvalue of Q_K at dimension ``dim`` by block diagonalisation.

    Only one block of each mirror pair (m -> -m) is diagonalised; the report
    lists every block label reaching the maximum within 1e-12 and the state
    is taken from the lowest such label.
    """
    _check(K, dim)
    spin = SpinQuantum.from_dimension(dim)
    maxima = block_maxima(SpinSignOperator(spin), K, kind="spin", vectors=with_state, mirror=True)
    best = max(m.singular_value for m in maxima)
    winners = [m for m in maxima if m.singular_value >= best - TIE_TOLERANCE]
    score = 0.5 * (1.0 + best)
    degenerate = len(winners) > 1 or winners[0].inner_gap <= TIE_TOLERANCE
    state = None
    if with_state:
        state = fix_phase(winners[0].vector)
    return ScoreReport.build(K, dim, score, "numeric", optimal_state=state,
                             maximizing_blocks=[str(m.block.label) for m in winners],
                             degenerate=degenerate)


# -- closed forms -----------------------------------------------------------

def _central(n: int) -> float:
    return float(LOG_BINOMIAL.log_central(n))


def first_nontrivial_score(K: int) -> float:
    """1/2 [1 + 2**-(K-1) C(K-1, (K-1)/2)], the score at d = K + 1."""
    return 0.5 * (1.0 + math.exp(_central((K - 1) // 2) - (K - 1) * math.log(2.0)))


def _edge_magnitude(two_j: int, K: int) -> float:
    """|<-j| sgn(J_x) |-j+K>| from the edge-element formula."""
    d = two_j + 1
    factor = two_j / K - (d % 2)
    if factor <= 0:
        return 0.0
    log_val = (math.log(factor) + _central((K - 1) // 2) + _central(two_j // 2)
               + _central((two_j - K) // 2))
    return math.exp(0.5 * log_val - (two_j - 1) * math.log(2.0))


def _tan_phi_squared(two_j: int, K: int) -> float:
    """tan^2 of the mixing angle of the three-level block, (y1 / y2)^2.

    For odd d the factor (j - K) appears in both numerator and denominator
    and is cancelled, which keeps d = 2K + 1 (j = K) finite.
    """
    j = two_j / 2
    log_ratio = _central(two_j // 2) - _central((two_j - 2 * K) // 2) - _central(K)
    ratio = math.exp(log_ratio)
    if two_j % 2:
        ratio *= j / (j - K)
    return ratio


def _z_values(spin: SpinQuantum, K: int, n_odd: int, n_even: int) -> np.ndarray:
    """Entries of the reduced odd block of the m-bar = -j block.

    z[a, b] = sum_k <-j+(2a+1)K|S|-j+2kK> <-j+(2b+1)K|S|-j+2kK>, with the
    sum running over the ``n_even`` even levels of the block.
    """
    odd = (2 * np.arange(n_odd) + 1) * K
    even = 2 * np.arange(n_even) * K
    cross = spin_sign_block(spin, odd, even)
    return cross @ cross.T


def _top_eigenvalue_2x2(z1: float, z2: float, z3: float) -> float:
    return (z1 + z3) / 2 + math.sqrt(((z1 - z3) / 2) ** 2 + z2 ** 2)


def _top_eigenvalue_3x3(z: np.ndarray) -> float:
    """Largest eigenvalue of a real symmetric 3x3 matrix by the trigonometric method."""
    z1, z3, z6 = z[0, 0], z[1, 1], z[2, 2]
    z2, z4, z5 = z[0, 1], z[0, 2], z[1, 2]
    u = (z1 ** 2 + z3 ** 2 + z6 ** 2 - z1 * z3 - z1 * z6 - z3 * z6
         + 3 * (z2 ** 2 + z4 ** 2 + z5 ** 2))
    if u <= 0:
        return (z1 + z3 + z6) / 3
    v = ((2 * z1 - z3 - z6) * (2 * z3 - z1 - z6) * (2 * z6 - z1 - z3)
         + 54 * z2 * z4 * z5 - 9 * z2 ** 2 * (2 * z6 - z1 - z3)
         - 9 * z4 ** 2 * (2 * z3 - z1 - z6) - 9 * z5 ** 2 * (2 * z1 - z3 - z6))
    # 3 phi in [0, pi]; atan2 covers both signs of v
    phi = math.atan2(math.sqrt(max(4 * u ** 3 - v ** 2, 0.0)), v) / 3
    return (z1 + z3 + z6 + 2 * math.sqrt(u) * math.cos(phi)) / 3


def _closed_form_value(K: int, dim: int) -> tuple[float, np.ndarray | None]:
    """Score and, where the closed form provides it, the optimal state."""
    if K % 2 == 0 or dim <= K:
        return 0.5, None
    if dim > 7 * K:
        raise UnsupportedRangeError(
            f"no closed form for d={dim} > 7K={7 * K}; use score_numeric instead")
    spin = SpinQuantum.from_dimension(dim)
    two_j = spin.two_j
    sign = -1.0 if (K - 1) // 2 % 2 else 1.0
    if dim <= 2 * K:
        y1 = _edge_magnitude(two_j, K)
        state = np.zeros(dim)
        state[0], state[K] = sign, 1.0
        return 0.5 * (1.0 + y1), fix_phase(state / math.sqrt(2.0))
    if dim <= 3 * K:
        y1 = _edge_magnitude(two_j, K)
        phi = math.atan(math.sqrt(_tan_phi_squared(two_j, K)))
        sigma = y1 / math.sin(phi)
        state = np.zeros(dim)
        state[0], state[K], state[2 * K] = math.sin(phi), sign, math.cos(phi)
        return 0.5 * (1.0 + sigma), fix_phase(state / math.sqrt(2.0))
    if dim <= 5 * K:
        n_even = 2 if dim <= 4 * K else 3
        z = _z_values(spin, K, 2, n_even)
        lam = _top_eigenvalue_2x2(z[0, 0], z[0, 1], z[1, 1])
        return 0.5 * (1.0 + math.sqrt(lam)), None
    n_even = 3 if dim <= 6 * K else 4
    z = _z_values(spin, K, 3, n_even)
    lam = _top_eigenvalue_3x3(z)
    return 0.5 * (1.0 + math.sqrt(lam)), None


def score_closed_form(K: int, dim: int) -> ScoreReport:
    """P_K^d from the analytical expressions, available for d <= 7K."""
    _check(K, dim)
    score, state = _closed_form_value(K, dim)
    return ScoreReport.build(K, dim, score, "closed_form", optimal_state=state)


def optimal_state(K: int, dim: int) -> np.ndarray:
    """Coefficients (z-basis, ascending m) of a state reaching P_K^d.

    At d = K + 1 this is (|j> + (-1)**((K-1)/2) |-j>) / sqrt(2); otherwise
    the top eigenvector is computed, with a DegenerateMaximumWarning if the
    maximum is degenerate.
    """
    _check(K, dim)
    if K % 2 and dim == K + 1:
        state = np.zeros(dim)
        state[-1] = 1.0
        state[0] = -1.0 if (K - 1) // 2 % 2 else 1.0
        return state / math.sqrt(2.0)
    report = score_numeric(K, dim)
    if report.degenerate:
        warnings.warn(f"top eigenvalue of Q_{K} at d={dim} is degenerate "
                      f"(blocks {report.maximizing_blocks})", DegenerateMaximumWarning,
                      stacklevel=2)
    return report.optimal_state


@dataclass
class SweepResult:
    K: int
    reports: list[ScoreReport]

    @property
    def mean(self) -> float:
        if not self.reports:
            return float("nan")
        return math.fsum(r.score for r in self.reports) / len(self.reports)

    def violating_dims(self) -> list[int]:
        return [r.dim for r in self.reports if r.gap > 0]


def violation_sweep(K: int, dim_range: tuple[int, int], with_states: bool = False,
                    progress=None) -> SweepResult:
    """Numeric scores for every d in the inclusive range ``dim_range``."""
    lo, hi = dim_range
    reports = []
    for dim in range(lo, hi + 1):
        reports.append(score_numeric(K, dim, with_state=with_states))
        if progress is not None:
            progress(dim)
    return SweepResult(K, reports)
