"""Closed-form matrix elements of sgn(J_x) and sgn(X).

Both operators are evaluated element by element in log-space, so the spin
formulas stay finite at 2j of several thousand.  The spin element between
basis indices l = j + m and l' = j + m' factorises as

    s(k) / k * exp(h(l) + h(l')),      k = l' - l odd,

with s(k) = (-1)**((k - 1) / 2); the oscillator elements factorise the same
way with one weight for the even and one for the odd Fock index.  The
matrices below are assembled from those weights.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .spin_core import SpinQuantum

LOG2 = math.log(2.0)


class LogBinomial:
    """Binomial coefficients in log-space backed by a growing log n! table."""

    def __init__(self, size: int = 256):
        self._table = gammaln(np.arange(size, dtype=float) + 1.0)

    def _ensure(self, n_max: int):
        if n_max >= self._table.size:
            size = max(n_max + 1, 2 * self._table.size)
            self._table = gammaln(np.arange(size, dtype=float) + 1.0)

    def log_factorial(self, n):
        n = np.asarray(n, dtype=np.int64)
        self._ensure(int(n.max(initial=0)))
        return self._table[n]

    def log_comb(self, n, k):
        n = np.asarray(n, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        if np.any(k < 0) or np.any(k > n):
            raise DomainError("binomial C(n, k) needs 0 <= k <= n")
        return self.log_factorial(n) - self.log_factorial(k) - self.log_factorial(n - k)

    def log_central(self, half):
        """log C(2h, h)."""
        half = np.asarray(half, dtype=np.int64)
        return self.log_comb(2 * half, half)

    def comb(self, n, k):
        return np.exp(self.log_comb(n, k))


LOG_BINOMIAL = LogBinomial()


def _odd_power_log(x: np.ndarray) -> np.ndarray:
    """log of x**(x mod 2), with the 0**0 = 1 convention."""
    return np.where(x % 2 == 1, np.log(np.maximum(x, 1)), 0.0)


def _signed_reciprocal(k: np.ndarray) -> np.ndarray:
    """(-1)**((k-1)/2) / k for odd k, 0 for even k (k may be negative)."""
    odd = k % 2 == 1
    safe = np.where(odd, k, 1)
    sign = np.where(((safe - 1) // 2) % 2 == 0, 1.0, -1.0)
    return np.where(odd, sign / safe, 0.0)


def _reciprocal_table(diff: np.ndarray) -> np.ndarray:
    """_signed_reciprocal evaluated once per distinct difference, then gathered."""
    if diff.size == 0:
        return np.zeros(diff.shape)
    lo = int(diff.min())
    table = _signed_reciprocal(np.arange(lo, int(diff.max()) + 1))
    return table[diff - lo]


def spin_log_weight(two_j: int, index) -> np.ndarray:
    """Log weight h(l) of basis index l = j + m in the sgn(J_x) elements."""
    l = np.asarray(index, dtype=np.int64)
    r = two_j - l
    lb = LOG_BINOMIAL
    out = lb.log_central(l // 2) + lb.log_central(r // 2) + _odd_power_log(l) + _odd_power_log(r)
    return 0.5 * out - 0.5 * (two_j - 1) * LOG2


def spin_sign_block(spin: SpinQuantum, rows, cols) -> np.ndarray:
    """Sub-matrix of sgn(J_x) on the given row/column basis indices."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    tj = spin.two_j
    if rows.size and (rows.min() < 0 or rows.max() > tj):
        raise DomainError("row index outside the spin basis")
    if cols.size and (cols.min() < 0 or cols.max() > tj):
        raise DomainError("column index outside the spin basis")
    cr = _reciprocal_table(cols[None, :] - rows[:, None])
    # one exponential of a commutative sum keeps the matrix exactly symmetric
    return cr * np.exp(spin_log_weight(tj, rows)[:, None] + spin_log_weight(tj, cols)[None, :])


def sgn_jx_element(spin: SpinQuantum, m, m_prime) -> float:
    """<m_z| sgn(J_x) |m'_z> for half-integer m, m' with |m|, |m'| <= j."""
    i = spin.index_of(m)
    ip = spin.index_of(m_prime)
    return float(spin_sign_block(spin, [i], [ip])[0, 0])


def sgn_jx_matrix(spin: SpinQuantum) -> np.ndarray:
    idx = np.arange(spin.dimension())
    return spin_sign_block(spin, idx, idx)


def fock_log_weight(n) -> np.ndarray:
    """Log weight of Fock level n: even and odd levels use different forms."""
    n = np.asarray(n, dtype=np.int64)
    lb = LOG_BINOMIAL
    even = 0.5 * lb.log_central(n // 2) - 0.5 * n * LOG2
    odd = (0.5 * (np.log(np.maximum(n, 1)) - math.log(math.pi) + lb.log_central(np.maximum(n - 1, 0) // 2))
           - 0.5 * n * LOG2 + LOG2)
    return np.where(n % 2 == 0, even, odd)


def fock_sign_block(rows, cols) -> np.ndarray:
    """Sub-matrix of sgn(X) in the Fock basis on the given levels."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if (rows.size and rows.min() < 0) or (cols.size and cols.min() < 0):
        raise DomainError("Fock levels must be non-negative")
    # signed difference odd-level minus even-level, whichever side is odd
    diff = np.where(cols[None, :] % 2 == 1, cols[None, :] - rows[:, None], rows[:, None] - cols[None, :])
    cr = _reciprocal_table(diff)
    return cr * np.exp(fock_log_weight(rows)[:, None] + fock_log_weight(cols)[None, :])


def sgn_x_element(n: int, n_prime: int) -> float:
    """<n| sgn(X) |n'>; zero when n and n' share parity."""
    return float(fock_sign_block([n], [n_prime])[0, 0])


def sgn_x_matrix(n_max: int) -> np.ndarray:
    """Truncation of sgn(X) to Fock levels 0..n_max."""
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    idx = np.arange(n_max + 1)
    return fock_sign_block(idx, idx)


def limit_compare(spin: SpinQuantum, n: int, n_prime: int) -> float:
    """|<n~|sgn(J_x)|n~'> - <n|sgn(X)|n'>| under the relabelling m = n~ - j."""
    dim = spin.dimension()
    if not (0 <= n < dim and 0 <= n_prime < dim):
        raise DomainError(f"levels ({n}, {n_prime}) exceed the spin dimension {dim}")
    spin_value = spin_sign_block(spin, [n], [n_prime])[0, 0]
    return float(abs(spin_value - sgn_x_element(n, n_prime)))


class SpinSignOperator:
    """sgn(J_x) for one spin, evaluated lazily on requested sub-blocks."""

    def __init__(self, spin: SpinQuantum):
        self.spin = spin
        self.dim = spin.dimension()

    def submatrix(self, rows, cols) -> np.ndarray:
        return spin_sign_block(self.spin, rows, cols)

    def cross_factors(self, even, odd):
        """Weights and sign convention such that S[even, odd] = w_e T w_o.

        T[a, b] = _signed_reciprocal(flip * (odd[b] - even[a])).
        """
        tj = self.spin.two_j
        return np.exp(spin_log_weight(tj, even)), np.exp(spin_log_weight(tj, odd)), 1

    def dense(self) -> np.ndarray:
        return sgn_jx_matrix(self.spin)


class FockSignOperator:
    """sgn(X) truncated to levels 0..n_max, evaluated lazily."""

    def __init__(self, n_max: int):
        if n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {n_max}")
        self.n_max = n_max
        self.dim = n_max + 1

    def submatrix(self, rows, cols) -> np.ndarray:
        return fock_sign_block(rows, cols)

    def cross_factors(self, even, odd):
        """As for SpinSignOperator; the difference is always odd level minus even level."""
        even = np.asarray(even, dtype=np.int64)
        flip = 1 if even.size == 0 or even[0] % 2 == 0 else -1
        return np.exp(fock_log_weight(even)), np.exp(fock_log_weight(odd)), flip

    def dense(self) -> np.ndarray:
        return sgn_x_matrix(self.n_max)


class DenseOperator:
    """Adapter giving an explicit matrix the same interface as the lazy operators."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix)
        self.dim = self.matrix.shape[0]

    def submatrix(self, rows, cols) -> np.ndarray:
        return self.matrix[np.ix_(np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))]

    def dense(self) -> np.ndarray:
        return self.matrix


def as_operator(op):
    if hasattr(op, "submatrix"):
        return op
    return DenseOperator(op)
