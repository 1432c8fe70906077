"""Optimal precession states on composite spins: CG embeddings, Schmidt data, GHZ check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

from .averaging import average_over_orbit
from .errors import DomainError
from .spin_core import SpinQuantum, build_jplus, build_jx, doubled, eigensolve, spectral_sign
from .spin_scores import first_nontrivial_score

SCHMIDT_TOL = 1e-10
TIE_TOL = 1e-10


def _triangle(two_j1, two_j2, two_j):
    return abs(two_j1 - two_j2) <= two_j <= two_j1 + two_j2 and (two_j1 + two_j2 - two_j) % 2 == 0


@dataclass(frozen=True)
class CGTable:
    """Coefficients <j1 m1; j2 m2 | j m> for one coupled spin j.

    ``coefficients[i1, i2, i]`` uses ascending-m indices in each space.
    """

    j1: SpinQuantum
    j2: SpinQuantum
    j: SpinQuantum
    coefficients: np.ndarray

    def column(self, m) -> np.ndarray:
        """The (2j1+1, 2j2+1) matrix of |j m> in the product basis."""
        return self.coefficients[:, :, self.j.index_of(m)]


@lru_cache(maxsize=64)
def _coupled_states(two_j1: int, two_j2: int) -> dict[int, np.ndarray]:
    """All |j m> as product-basis vectors, keyed by 2j, shape (d1*d2, 2j+1).

    Each multiplet starts from its stretched state |j j>, taken orthogonal
    to the larger multiplets already built at that m and signed so that the
    m1 = j1 component is positive (Condon-Shortley).  The rest follows by
    applying the total lowering operator.
    """
    s1, s2 = SpinQuantum(two_j1), SpinQuantum(two_j2)
    d1, d2 = s1.dimension(), s2.dimension()
    lower = np.kron(build_jplus(s1).T, np.eye(d2)) + np.kron(np.eye(d1), build_jplus(s2).T)
    two_m_total = np.add.outer(s1.two_m_values(), s2.two_m_values()).ravel()
    states: dict[int, np.ndarray] = {}
    for two_j in range(two_j1 + two_j2, abs(two_j1 - two_j2) - 1, -2):
        sector = np.flatnonzero(two_m_total == two_j)
        taken = [states[tj][sector, (tj + two_j) // 2] for tj in states]
        if taken:
            basis = np.array(taken)
            _, _, vh = np.linalg.svd(basis)
            seed = vh[-1]
        else:
            seed = np.ones(1)
        top = np.zeros(d1 * d2)
        top[sector] = seed
        lead = sector[np.argmax(sector // d2)]   # the product state with m1 = j1
        if top[lead] < 0:
            top = -top
        top /= np.linalg.norm(top)
        cols = np.zeros((d1 * d2, two_j + 1))
        cols[:, two_j] = top
        vec = top
        for idx in range(two_j, 0, -1):
            two_m = idx * 2 - two_j
            step = math.sqrt(two_j * (two_j + 2) - two_m * (two_m - 2)) / 2
            vec = lower @ vec / step
            cols[:, idx - 1] = vec
        states[two_j] = cols
    return states


def cg_table(j1, j2, j) -> CGTable:
    two_j1, two_j2, two_j = doubled(j1), doubled(j2), doubled(j)
    if min(two_j1, two_j2, two_j) < 0 or not _triangle(two_j1, two_j2, two_j):
        raise DomainError(f"(j1, j2, j) = ({j1}, {j2}, {j}) violates the triangle rule")
    cols = _coupled_states(two_j1, two_j2)[two_j]
    coeffs = cols.reshape(two_j1 + 1, two_j2 + 1, two_j + 1)
    return CGTable(SpinQuantum(two_j1), SpinQuantum(two_j2), SpinQuantum(two_j), coeffs)


def clebsch_gordan(j1, j2, j, m1, m2) -> float:
    """<j1 m1; j2 m2 | j, m1 + m2> in the Condon-Shortley convention."""
    table = cg_table(j1, j2, j)
    i1, i2 = table.j1.index_of(m1), table.j2.index_of(m2)
    two_m = doubled(m1) + doubled(m2)
    if abs(two_m) > table.j.two_j:
        return 0.0
    return float(table.coefficients[i1, i2, (two_m + table.j.two_j) // 2])


def embed_optimal_state(j1, j2, K: int) -> np.ndarray:
    """(|j j> + (-1)**((K-1)/2) |j -j>)/sqrt 2 with j = K/2, as a (2j1+1, 2j2+1) matrix."""
    if K < 1 or K % 2 == 0:
        raise DomainError(f"K must be odd and positive, got {K}")
    two_j1, two_j2 = doubled(j1), doubled(j2)
    if not _triangle(two_j1, two_j2, K):
        raise DomainError(f"spin K/2 = {Fraction(K, 2)} cannot be formed from j1={j1}, j2={j2}")
    table = cg_table(j1, j2, Fraction(K, 2))
    sign = -1.0 if (K - 1) // 2 % 2 else 1.0
    half = Fraction(K, 2)
    return (table.column(half) + sign * table.column(-half)) / math.sqrt(2.0)


@dataclass(frozen=True)
class SchmidtSpectrum:
    values: np.ndarray
    rank: int
    entropy_bits: float


def schmidt_spectrum(coeffs) -> SchmidtSpectrum:
    """Singular values of a bipartite coefficient matrix, descending."""
    values = np.linalg.svd(np.asarray(coeffs), compute_uv=False)
    weights = values[values > SCHMIDT_TOL] ** 2
    entropy = -float(np.sum(weights * np.log2(weights)))
    return SchmidtSpectrum(values, int(weights.size), max(entropy, 0.0))


def _chain_operator(single: np.ndarray, K: int) -> np.ndarray:
    d = single.shape[0]
    eye = np.eye(d)
    total = np.zeros((d ** K, d ** K))
    for site in range(K):
        factors = [single if s == site else eye for s in range(K)]
        total += reduce(np.kron, factors)
    return total


@dataclass
class GHZReport:
    K: int
    score: float
    target: float
    ghz_overlap: float
    ghz_expectation: float
    maximizers: list[tuple[float, float]] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return len(self.maximizers) > 1


def ghz_state(K: int) -> np.ndarray:
    """(|up...up> + (-1)**((K-1)/2) |down...down>)/sqrt 2, with index bit 1 = spin up."""
    state = np.zeros(2 ** K)
    state[-1] = 1.0
    state[0] = -1.0 if (K - 1) // 2 % 2 else 1.0
    return state / math.sqrt(2.0)


def ghz_check(K: int) -> GHZReport:
    """Top eigenvector of Q_K for a chain of K spin-1/2 particles vs the GHZ state."""
    if K < 1 or K % 2 == 0:
        raise DomainError(f"K must be odd and positive, got {K}")
    if K > 12:
        raise DomainError(f"K={K} too large for the 2^K construction (max 12)")
    jx = _chain_operator(build_jx(SpinQuantum(1)), K)
    ups = np.array([bin(i).count("1") for i in range(2 ** K)])
    q = 0.5 * (np.eye(2 ** K) + average_over_orbit(spectral_sign(jx), K, levels=ups))
    system = eigensolve(q)
    vals, vecs = system.eigenvalues, system.eigenvectors
    top = vals[-1]
    ghz = ghz_state(K)
    tied = np.flatnonzero(vals >= top - TIE_TOL)
    maximizers = [(float(vals[i]), float(np.dot(vecs[:, i], ghz) ** 2)) for i in tied[::-1]]
    return GHZReport(K, float(top), first_nontrivial_score(K),
                     math.fsum(o for _, o in maximizers), float(ghz @ q @ ghz), maximizers)
