"""The K-point orbit average E_K and its block-diagonal decomposition.

E_K[A] keeps exactly the matrix elements between levels whose difference is
a multiple of K.  Levels are basis indices (i = m + j for a spin, the Fock
number for the oscillator), so a block is a residue class of indices mod K.
Within a block, positions alternate between the even part (offsets 0, 2K,
4K, ...) and the odd part (K, 3K, ...); sgn-type operators only connect the
two parts, which is what the squared reduction exploits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import matmul_toeplitz
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import DomainError, EigensolverError
from .sign_elements import _signed_reciprocal, as_operator
from .spin_core import RESIDUAL_TOLERANCE, top_eigenpair

# Blocks whose smaller parity part exceeds this many levels are solved by
# Lanczos with FFT-based Toeplitz products instead of a dense Gram matrix.
DENSE_BLOCK_LIMIT = 400
LANCZOS_TOL = 1e-14


def _check_k(K: int):
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")


def orbit_mask(levels, K: int) -> np.ndarray:
    _check_k(K)
    levels = np.asarray(levels, dtype=np.int64)
    return (levels[:, None] - levels[None, :]) % K == 0


def average_over_orbit(a, K: int, levels=None) -> np.ndarray:
    """E_K[a] computed as an exact entrywise mask.

    ``levels`` gives the J_z (or number) eigenvalue of each basis vector as
    an integer; it defaults to ``0, 1, ..., dim-1``.
    """
    a = np.asarray(a)
    if levels is None:
        levels = np.arange(a.shape[0])
    return np.where(orbit_mask(levels, K), a, 0)


def rotation_average(a, K: int, levels=None) -> np.ndarray:
    """E_K[a] as the explicit mean of K conjugations by exp(-i theta_k N).

    Slow reference used to confirm the mask form.
    """
    _check_k(K)
    a = np.asarray(a, dtype=complex)
    if levels is None:
        levels = np.arange(a.shape[0])
    levels = np.asarray(levels, dtype=float)
    out = np.zeros_like(a)
    for k in range(K):
        phase = np.exp(-2j * np.pi * k / K * levels)
        out += phase[:, None] * a * phase.conj()[None, :]
    return out / K


@dataclass(frozen=True)
class Block:
    residue: int
    label: Fraction | int
    indices: np.ndarray
    even: np.ndarray = field(repr=False)
    odd: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class BlockDecomposition:
    K: int
    dim: int
    blocks: list[Block]
    kind: str = "spin"

    def sizes(self) -> list[int]:
        return [b.size for b in self.blocks]


def decompose_blocks(dim: int, K: int, kind: str = "spin") -> BlockDecomposition:
    """Partition ``0..dim-1`` into residue classes mod K.

    For ``kind="spin"`` blocks are labelled by m-bar = -j + residue (as a
    Fraction); for ``kind="fock"`` by the residue itself.
    """
    _check_k(K)
    if dim < 1:
        raise DomainError(f"dim must be >= 1, got {dim}")
    if kind not in ("spin", "fock"):
        raise DomainError(f"unknown basis kind {kind!r}")
    blocks = []
    for r in range(min(K, dim)):
        idx = np.arange(r, dim, K)
        label = Fraction(2 * r - (dim - 1), 2) if kind == "spin" else r
        blocks.append(Block(r, label, idx, idx[0::2], idx[1::2]))
    return BlockDecomposition(K, dim, blocks, kind)


@dataclass(frozen=True)
class ReducedBlock:
    """One parity part of a block of (E_K[S])^2."""

    block: Block
    parity: str
    indices: np.ndarray
    matrix: np.ndarray


def squared_block_reduce(sgn_op, K: int, parity: str = "odd", kind: str = "spin",
                         residues=None) -> list[ReducedBlock]:
    """Parity parts P S P' S P of every block, P being the chosen parity."""
    if parity not in ("odd", "even"):
        raise DomainError(f"parity must be 'odd' or 'even', got {parity!r}")
    op = as_operator(sgn_op)
    out = []
    for block in decompose_blocks(op.dim, K, kind).blocks:
        if residues is not None and block.residue not in residues:
            continue
        cross = op.submatrix(block.even, block.odd)
        if parity == "odd":
            out.append(ReducedBlock(block, "odd", block.odd, cross.T @ cross))
        else:
            out.append(ReducedBlock(block, "even", block.even, cross @ cross.T))
    return out


@dataclass(frozen=True)
class BlockMaximum:
    """Top eigenvalue of one block of E_K[S], found through the squared form."""

    block: Block
    singular_value: float
    vector: np.ndarray | None
    inner_gap: float

    @property
    def lambda2(self) -> float:
        return self.singular_value ** 2


def _dense_block_maximum(op, block: Block, vectors: bool) -> BlockMaximum:
    cross = op.submatrix(block.even, block.odd)
    use_odd = block.odd.size <= block.even.size
    gram = cross.T @ cross if use_odd else cross @ cross.T
    lam, u, gap = top_eigenpair(gram, vectors=vectors)
    sigma = float(np.sqrt(max(lam, 0.0)))
    vec = None
    if vectors:
        if sigma > 0:
            partner = cross @ u / sigma if use_odd else cross.T @ u / sigma
        else:
            partner = np.zeros(block.even.size if use_odd else block.odd.size)
        odd_part, even_part = (u, partner) if use_odd else (partner, u)
        vec = _lift(op.dim, block, even_part, odd_part)
    # gap measured on sigma rather than sigma**2
    inner_gap = sigma - float(np.sqrt(max(lam - gap, 0.0))) if np.isfinite(gap) else float("inf")
    return BlockMaximum(block, sigma, vec, inner_gap)


def _lift(dim, block, even_part, odd_part):
    vec = np.zeros(dim)
    vec[block.even] = even_part
    vec[block.odd] = odd_part
    return vec / np.linalg.norm(vec)


def toeplitz_block_maximum(op, block: Block, K: int, vectors: bool = False) -> BlockMaximum:
    """Top singular pair of S[even, odd] without forming the block.

    The cross block is diag(w_e) T diag(w_o) with T Toeplitz, because the
    signed reciprocal depends only on the level offset (2(b - a) + 1) K.
    Products with it cost one FFT convolution, so the top two eigenvalues of
    the odd-side Gram matrix come from Lanczos (ARPACK) with a fixed start
    vector, keeping results reproducible.
    """
    e, o = block.even, block.odd
    we, wo, flip = op.cross_factors(e, o)
    col = _signed_reciprocal(flip * (1 - 2 * np.arange(e.size)) * K)
    row = _signed_reciprocal(flip * (2 * np.arange(o.size) + 1) * K)

    def cross(x):
        return we * matmul_toeplitz((col, row), wo * x, check_finite=False)

    def cross_t(y):
        return wo * matmul_toeplitz((row, col), we * y, check_finite=False)

    gram = LinearOperator((o.size, o.size), dtype=float,
                          matvec=lambda x: cross_t(cross(np.ravel(x))))
    start = np.random.default_rng(0).uniform(0.5, 1.5, o.size)
    maxiter = 50 * o.size
    try:
        vals, vecs = eigsh(gram, k=2, which="LA", tol=LANCZOS_TOL, v0=start, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        raise EigensolverError("Lanczos did not converge on a block", iterations=maxiter) from exc
    order = np.argsort(vals)
    lam, second = float(vals[order[-1]]), float(vals[order[-2]])
    u = vecs[:, order[-1]]
    res = float(np.linalg.norm(cross_t(cross(u)) - lam * u))
    if res > 1e3 * RESIDUAL_TOLERANCE * max(lam, 1.0):
        raise EigensolverError("Lanczos residual contract violated", residual=res)
    sigma = float(np.sqrt(max(lam, 0.0)))
    vec = _lift(op.dim, block, cross(u) / sigma, u) if vectors and sigma > 0 else None
    return BlockMaximum(block, sigma, vec, sigma - float(np.sqrt(max(second, 0.0))))


def block_maxima(sgn_op, K: int, kind: str = "spin", residues=None,
                 vectors: bool = False, mirror: bool = False,
                 solver: str = "auto") -> list[BlockMaximum]:
    """For each block, the largest eigenvalue of E_K[S] restricted to it.

    The eigenproblem solved is the smaller of the two parity parts of the
    squared block.  With ``vectors=True`` the top eigenvector of the block of
    E_K[S] itself is lifted back to the full basis (length ``dim``).

    ``mirror=True`` uses the m -> -m symmetry of sgn(J_x): the block of
    residue r and that of residue (dim - 1 - r) mod K are unitarily similar,
    so only the lower residue of each pair is diagonalised and the other
    inherits its value (with ``vector=None``).

    ``solver`` picks dense Gram diagonalisation, Toeplitz Lanczos, or (auto)
    Lanczos for blocks beyond DENSE_BLOCK_LIMIT when the operator supports it.
    """
    if solver not in ("auto", "dense", "lanczos"):
        raise DomainError(f"solver must be auto, dense or lanczos, got {solver!r}")
    op = as_operator(sgn_op)
    structured = hasattr(op, "cross_factors")
    if solver == "lanczos" and not structured:
        raise DomainError("the Lanczos route needs an operator with cross_factors")
    out = []
    solved = {}
    for block in decompose_blocks(op.dim, K, kind).blocks:
        if residues is not None and block.residue not in residues:
            continue
        partner_residue = (op.dim - 1 - block.residue) % K
        if mirror and partner_residue in solved:
            twin = solved[partner_residue]
            out.append(BlockMaximum(block, twin.singular_value, None, twin.inner_gap))
            continue
        if block.odd.size == 0:
            vec = None
            if vectors:
                vec = np.zeros(op.dim)
                vec[block.indices[0]] = 1.0
            result = BlockMaximum(block, 0.0, vec, 0.0 if block.size == 1 else float("inf"))
            solved[block.residue] = result
            out.append(result)
            continue
        small = min(block.even.size, block.odd.size)
        iterative = structured and small >= 3 and K % 2 == 1 and (
            solver == "lanczos" or (solver == "auto" and small > DENSE_BLOCK_LIMIT))
        if iterative:
            result = toeplitz_block_maximum(op, block, K, vectors)
        else:
            result = _dense_block_maximum(op, block, vectors)
        solved[block.residue] = result
        out.append(result)
    return out
