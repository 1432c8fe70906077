"""Spin bookkeeping, angular-momentum matrices and the dense eigensolver.

All matrices are expressed in the J_z eigenbasis ordered by ascending m, so
that row/column ``i`` corresponds to ``m = i - j``.  Units have hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import linalg

from .errors import DomainError, EigensolverError

RESIDUAL_TOLERANCE = 1e-10


def doubled(value) -> int:
    """Return ``2 * value`` as an exact integer, rejecting non half-integers.

    Accepts ints, floats, Fractions and strings such as ``"3/2"``.
    """
    try:
        twice = 2 * Fraction(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"cannot read {value!r} as a half-integer") from exc
    if twice.denominator != 1:
        raise DomainError(f"{value!r} is not an integer or half-integer")
    return int(twice)


@dataclass(frozen=True, order=True)
class SpinQuantum:
    """A spin quantum number j, stored exactly as the integer 2j."""

    two_j: int

    def __post_init__(self):
        if not isinstance(self.two_j, (int, np.integer)) or self.two_j < 0:
            raise DomainError(f"two_j must be a non-negative integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @classmethod
    def from_j(cls, j) -> "SpinQuantum":
        return cls(doubled(j))

    @classmethod
    def from_dimension(cls, dim: int) -> "SpinQuantum":
        if dim < 1:
            raise DomainError(f"dimension must be >= 1, got {dim}")
        return cls(dim - 1)

    @property
    def j(self) -> Fraction:
        return Fraction(self.two_j, 2)

    def dimension(self) -> int:
        return self.two_j + 1

    def two_m_values(self) -> np.ndarray:
        """Doubled magnetic quantum numbers -2j, -2j+2, ..., 2j."""
        return np.arange(-self.two_j, self.two_j + 1, 2)

    def m_values(self) -> np.ndarray:
        return self.two_m_values() / 2.0

    def index_of(self, m) -> int:
        """Basis index ``i = j + m`` of the state |m_z>, validating the range."""
        two_m = doubled(m)
        if abs(two_m) > self.two_j or (two_m - self.two_j) % 2:
            raise DomainError(f"m={m} is not a magnetic quantum number of j={self.j}")
        return (two_m + self.two_j) // 2

    def __str__(self):
        return f"j={self.j}"


@dataclass(frozen=True)
class Eigensystem:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def top(self) -> tuple[float, np.ndarray]:
        return float(self.eigenvalues[-1]), self.eigenvectors[:, -1]


def symmetric(a) -> np.ndarray:
    """Return ``a`` as a float array with its symmetry made exact.

    The strictly lower triangle is mirrored from the upper one after checking
    that the two agree to rounding level.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    scale = max(float(np.abs(a).max(initial=0.0)), 1.0)
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
        raise DomainError("matrix is not symmetric")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def hermitian(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.conj().T):
        raise DomainError("matrix is not Hermitian")
    return a


def _ladder(spin: SpinQuantum) -> np.ndarray:
    """Superdiagonal of J_+ : <m+1|J_+|m> = sqrt(j(j+1) - m(m+1))."""
    tj = spin.two_j
    two_m = spin.two_m_values()[:-1]
    # 4 * (j(j+1) - m(m+1)) = (2j)(2j+2) - (2m)(2m+2), exact in integers
    return np.sqrt((tj * (tj + 2) - two_m * (two_m + 2)).astype(float)) / 2.0


def build_jz(spin: SpinQuantum) -> np.ndarray:
    return np.diag(spin.m_values())


def build_jplus(spin: SpinQuantum) -> np.ndarray:
    return np.diag(_ladder(spin), -1)


def build_jx(spin: SpinQuantum) -> np.ndarray:
    off = _ladder(spin) / 2.0
    return np.diag(off, 1) + np.diag(off, -1)


def build_jy(spin: SpinQuantum) -> np.ndarray:
    """J_y = (J_+ - J_-) / 2i as a complex Hermitian matrix."""
    jp = build_jplus(spin)
    return (jp - jp.T) / 2j


def _residual(a: np.ndarray, w: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(a @ v - v * w, axis=0).max(initial=0.0))


def eigensolve(a, *, check: bool = True) -> Eigensystem:
    """Full eigendecomposition of a real-symmetric or complex-Hermitian matrix.

    Raises EigensolverError when LAPACK does not converge or when a residual
    ``||A v - lambda v||`` exceeds ``1e-10 * ||A||_F``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {a.shape}")
    try:
        w, v = linalg.eigh(a)
    except linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh failed: {exc}") from exc
    if check:
        res = _residual(a, w, v)
        limit = RESIDUAL_TOLERANCE * max(float(np.linalg.norm(a)), 1.0)
        if not res <= limit:
            raise EigensolverError("residual contract violated", residual=res)
    return Eigensystem(w, v)


def top_eigenpair(a: np.ndarray, *, vectors: bool = True):
    """Largest eigenvalue (and eigenvector) of a symmetric matrix.

    Returns ``(value, vector, gap)`` where ``gap`` is the distance to the
    next eigenvalue (``inf`` for 1x1 input) and ``vector`` is None when not
    requested.
    """
    n = a.shape[0]
    lo = max(n - 2, 0)
    try:
        if vectors:
            w, v = linalg.eigh(a, subset_by_index=[lo, n - 1], driver="evr")
        else:
            w = linalg.eigh(a, eigvals_only=True, subset_by_index=[lo, n - 1],
                            driver="evr")
            v = None
    except linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh failed: {exc}") from exc
    gap = float(w[-1] - w[-2]) if len(w) > 1 else float("inf")
    if v is None:
        return float(w[-1]), None, gap
    vec = v[:, -1]
    res = float(np.linalg.norm(a @ vec - w[-1] * vec))
    limit = RESIDUAL_TOLERANCE * max(float(np.linalg.norm(a)), 1.0)
    if not res <= limit:
        raise EigensolverError("residual contract violated", residual=res)
    return float(w[-1]), vec, gap


def spectral_sign(a, *, zero_tol: float = 1e-9) -> np.ndarray:
    """Operator sign function sum_i sgn(lambda_i) v_i v_i^T, with sgn(0) = 0.

    Eigenvalues within ``zero_tol * max(1, ||A||_2)`` of zero count as zero.
    """
    es = eigensolve(a)
    w, v = es.eigenvalues, es.eigenvectors
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    s = np.where(np.abs(w) <= zero_tol * scale, 0.0, np.sign(w))
    out = (v * s) @ v.conj().T
    return out.real if np.isrealobj(a) else out


def fix_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rescale so that the first coefficient above ``tol`` is real positive."""
    nz = np.flatnonzero(np.abs(vec) > tol)
    if nz.size == 0:
        return vec
    first = vec[nz[0]]
    return vec * (abs(first) / first)
