"""Round-by-round quantum simulation of the precession protocol."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .averaging import average_over_orbit
from .classical_protocol import CHUNK_ROUNDS
from .errors import DomainError
from .sign_elements import sgn_jx_matrix, sgn_x_matrix
from .spin_core import SpinQuantum, build_jx, eigensolve

NORM_TOL = 1e-12
ZERO_EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class QuantumState:
    """Pure state in the J_z basis (ascending m) or the Fock basis (n = 0, 1, ...)."""

    coefficients: np.ndarray
    basis: str = "spin"

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).ravel()
        if self.basis not in ("spin", "fock"):
            raise DomainError(f"basis must be 'spin' or 'fock', got {self.basis!r}")
        if c.size == 0:
            raise DomainError("state has no coefficients")
        norm = float(np.vdot(c, c).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state norm^2 is {norm!r}, expected 1")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def normalized(cls, coefficients, basis: str = "spin") -> "QuantumState":
        c = np.asarray(coefficients, dtype=complex).ravel()
        norm = np.linalg.norm(c)
        if norm == 0:
            raise DomainError("cannot normalise the zero vector")
        return cls(c / norm, basis)

    @property
    def dimension(self) -> int:
        return self.coefficients.size

    def phase_labels(self) -> np.ndarray:
        """Eigenvalues of the rotation generator: m for spin, n for Fock."""
        if self.basis == "spin":
            return SpinQuantum.from_dimension(self.dimension).m_values()
        return np.arange(self.dimension, dtype=float)

    def rotated(self, theta: float) -> np.ndarray:
        """Coefficients of exp(i theta G) |psi>, G = J_z or the number operator."""
        return np.exp(1j * theta * self.phase_labels()) * self.coefficients


@lru_cache(maxsize=32)
def _sign_matrix(basis: str, dim: int) -> np.ndarray:
    if basis == "spin":
        out = sgn_jx_matrix(SpinQuantum.from_dimension(dim))
    else:
        out = sgn_x_matrix(dim - 1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpinProjectors:
    """Spectral projectors of J_x onto its positive, zero and negative eigenspaces."""

    positive: np.ndarray
    zero: np.ndarray | None
    negative: np.ndarray


@lru_cache(maxsize=32)
def spin_projectors(dim: int) -> SpinProjectors:
    system = eigensolve(build_jx(SpinQuantum.from_dimension(dim)))
    vals, vecs = system.eigenvalues, system.eigenvectors

    def proj(mask):
        v = vecs[:, mask]
        p = v @ v.T
        p.setflags(write=False)
        return p

    zero = np.abs(vals) <= ZERO_EIGENVALUE_TOL
    return SpinProjectors(proj(vals > ZERO_EIGENVALUE_TOL),
                          proj(zero) if zero.any() else None,
                          proj(vals < -ZERO_EIGENVALUE_TOL))


def _expect(matrix, vec) -> float:
    return float(np.vdot(vec, matrix @ vec).real)


def _check_round(K, k):
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    if not 0 <= k < K:
        raise DomainError(f"round index k={k} outside [0, {K})")


def round_probability(state: QuantumState, K: int, k: int) -> float:
    """Probability-weighted positive reading in round k: <psi_k| pos |psi_k>.

    pos counts a zero outcome as 1/2, so this equals (1 + <sgn>)/2 with the
    sign operator of J_x (spin) or X (oscillator).
    """
    _check_round(K, k)
    vec = state.rotated(2 * math.pi * k / K)
    value = 0.5 * (1.0 + _expect(_sign_matrix(state.basis, state.dimension), vec))
    return min(max(value, 0.0), 1.0)


def exact_expectation(state: QuantumState, K: int) -> float:
    """<psi| Q_K |psi> with Q_K the orbit-averaged positivity operator."""
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    averaged = average_over_orbit(_sign_matrix(state.basis, state.dimension), K)
    return 0.5 * (1.0 + _expect(averaged, state.coefficients))


def outcome_table(state: QuantumState, K: int) -> np.ndarray:
    """(K, 3) Born probabilities of (positive, zero, negative) per round."""
    table = np.zeros((K, 3))
    if state.basis == "spin":
        proj = spin_projectors(state.dimension)
        for k in range(K):
            vec = state.rotated(2 * math.pi * k / K)
            table[k, 0] = _expect(proj.positive, vec)
            table[k, 1] = 0.0 if proj.zero is None else _expect(proj.zero, vec)
            table[k, 2] = _expect(proj.negative, vec)
    else:
        # X has no zero eigenvalue; the sign operator matrix elements are
        # exact on the state's support, so P(+) is exact too.
        for k in range(K):
            p = round_probability(state, K, k)
            table[k] = (p, 0.0, 1.0 - p)
    table = np.clip(table, 0.0, None)
    return table / table.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class SimulationResult:
    estimate: float
    standard_error: float
    rounds: int
    seed: int
    exact: float


def sample_rounds(state: QuantumState, K: int, rounds: int, seed: int) -> SimulationResult:
    """Simulate independent rounds: pick k uniformly, measure, score 1, 1/2 or 0.

    Seeding follows the classical sampler: chunk i of CHUNK_ROUNDS rounds
    draws from child i of SeedSequence(seed).
    """
    if rounds < 1:
        raise DomainError(f"rounds must be >= 1, got {rounds}")
    table = outcome_table(state, K)
    cumulative = np.cumsum(table, axis=1)
    n_chunks = -(-rounds // CHUNK_ROUNDS)
    total = total_sq = 0.0
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_chunks)):
        rng = np.random.default_rng(child)
        n = min(CHUNK_ROUNDS, rounds - i * CHUNK_ROUNDS)
        ks = rng.integers(0, K, n)
        u = rng.random(n)
        c = cumulative[ks]
        scores = np.where(u < c[:, 0], 1.0, np.where(u < c[:, 1], 0.5, 0.0))
        total += math.fsum(scores)
        total_sq += math.fsum(scores * scores)
    mean = total / rounds
    var = max(total_sq / rounds - mean * mean, 0.0) * rounds / (rounds - 1) if rounds > 1 else 0.0
    return SimulationResult(mean, math.sqrt(var / rounds), rounds, seed,
                            exact_expectation(state, K))
