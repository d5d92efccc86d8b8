"""Sparse symmetric matrices: storage, construction and spectral bounds.

Matrices are held in CSR form and treated as immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp


class MatrixFormatError(ValueError):
    """Raised when a matrix file or array cannot be used as a symmetric operator."""


@dataclass(frozen=True)
class SparseSymMatrix:
    """Real symmetric matrix in compressed sparse row form.

    Construct through :meth:`from_scipy` or the loaders below; these
    canonicalize the CSR arrays (sorted columns, no duplicates) and check
    exact symmetry.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for arr in (self.row_ptr, self.col_idx, self.values):
            arr.setflags(write=False)

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @classmethod
    def from_scipy(cls, mat, check_symmetric: bool = True) -> "SparseSymMatrix":
        mat = sp.csr_matrix(mat, dtype=float)
        if mat.shape[0] != mat.shape[1]:
            raise MatrixFormatError(f"matrix is not square: {mat.shape}")
        mat.sum_duplicates()
        mat.eliminate_zeros()
        mat.sort_indices()
        if check_symmetric and (mat != mat.T).nnz:
            raise MatrixFormatError("matrix is not symmetric")
        return cls(
            n=mat.shape[0],
            row_ptr=mat.indptr.astype(np.int64),
            col_idx=mat.indices.astype(np.int64),
            values=mat.data.copy(),
        )

    @classmethod
    def from_dense(cls, a) -> "SparseSymMatrix":
        return cls.from_scipy(sp.csr_matrix(np.asarray(a, dtype=float)))

    @cached_property
    def _csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_idx, self.row_ptr), shape=self.shape
        )

    def to_scipy(self) -> sp.csr_matrix:
        return self._csr.copy()

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def scaled(self, factor: float) -> "SparseSymMatrix":
        if factor == 1:
            return self
        return SparseSymMatrix.from_scipy(self.to_scipy() * float(factor))

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def gershgorin_bound(self) -> float:
        """Upper bound on the spectral radius, max_i sum_j |a_ij|."""
        if not self.nnz:
            return 0.0
        return float(abs(self._csr).sum(axis=1).max())

    def matvec(self, x) -> np.ndarray:
        return matvec(self, x)

    def __matmul__(self, x):
        return matvec(self, x)


@dataclass(frozen=True)
class SpectralInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty spectral interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.hi + self.lo)

    def to_unit(self, z):
        """Affine map of [lo, hi] onto [-1, 1]."""
        return (np.asarray(z, dtype=float) - self.center) * (2.0 / self.width)

    def from_unit(self, t):
        return np.asarray(t, dtype=float) * (0.5 * self.width) + self.center

    def contains(self, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        pad = tol * max(1.0, abs(self.lo), abs(self.hi))
        return bool(np.all((z >= self.lo - pad) & (z <= self.hi + pad)))

    @classmethod
    def widened(cls, lo: float, hi: float) -> "SpectralInterval":
        """Build an interval, widening it symmetrically if it is degenerate."""
        scale = max(1.0, abs(hi))
        if hi - lo < 1e-12 * scale:
            mid = 0.5 * (lo + hi)
            eps = 1e-8 * scale
            return cls(mid - eps, mid + eps)
        return cls(lo, hi)


def matvec(A: SparseSymMatrix, x) -> np.ndarray:
    """CSR product ``A @ x`` for a vector or a block of column vectors."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != A.n:
        raise ValueError(f"dimension mismatch: matrix is {A.n}x{A.n}, vector has {x.shape[0]}")
    return A._csr @ x


def load_matrix_market(path, symmetrize: bool = False) -> SparseSymMatrix:
    """Read a real ``general`` or ``symmetric`` coordinate Matrix Market file.

    With ``symmetrize`` the result is ``(A + A.T) / 2``; otherwise the file
    must already describe a symmetric matrix.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").split()
    if len(header) < 5 or header[0].lower() != "%%matrixmarket":
        raise MatrixFormatError(f"{path}: missing %%MatrixMarket header")
    obj, fmt, field, symmetry = (h.lower() for h in header[1:5])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixFormatError(f"{path}: only coordinate matrices are supported")
    if field not in ("real", "integer"):
        raise MatrixFormatError(f"{path}: unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise MatrixFormatError(f"{path}: unsupported symmetry {symmetry!r}")
    try:
        mat = scipy.io.mmread(path)
    except Exception as exc:  # scipy raises a mix of ValueError/IndexError
        raise MatrixFormatError(f"{path}: parse failure: {exc}") from exc
    mat = sp.csr_matrix(mat, dtype=float)
    if mat.shape[0] != mat.shape[1]:
        raise MatrixFormatError(f"{path}: matrix is not square: {mat.shape}")
    if symmetrize:
        mat = (mat + mat.T) * 0.5
    return SparseSymMatrix.from_scipy(mat)


def save_matrix_market(path, A: SparseSymMatrix, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), A.to_scipy(), comment=comment, symmetry="symmetric")


def laplacian_from_offdiagonal(A: SparseSymMatrix) -> SparseSymMatrix:
    """Graph Laplacian ``D - W`` with edge weights ``|a_ij|`` for ``i != j``."""
    W = A.to_scipy().tocoo()
    off = W.row != W.col
    W = sp.csr_matrix(
        (np.abs(W.data[off]), (W.row[off], W.col[off])), shape=A.shape
    )
    return SparseSymMatrix.from_scipy(_laplacian(W))


def _laplacian(W: sp.csr_matrix) -> sp.csr_matrix:
    W = sp.csr_matrix(W)
    W.eliminate_zeros()
    degrees = np.asarray(W.sum(axis=1)).ravel()
    L = (sp.diags(degrees) - W).tocsr()
    L.eliminate_zeros()
    return L


def gen_erdos_renyi_laplacian(n: int, p: float, seed: int) -> SparseSymMatrix:
    """Combinatorial Laplacian of a G(n, p) graph, deterministic in ``seed``."""
    if not 0 < p < 1:
        raise ValueError("edge probability must lie in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    rows = np.concatenate([iu[keep], ju[keep]])
    cols = np.concatenate([ju[keep], iu[keep]])
    W = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    return SparseSymMatrix.from_scipy(_laplacian(W))


def spectral_interval(
    A: SparseSymMatrix, margin: float = 0.01, iters: int = 60, seed: int = 0
) -> SpectralInterval:
    """Estimate an interval enclosing the spectrum from Lanczos Ritz values.

    The extremal Ritz values after ``iters`` steps are pushed outward by
    ``margin`` times their spread on each side.
    """
    from .krylov import lanczos_factor, symtridiag_eig

    if iters < 2:
        raise ValueError("spectral_interval needs at least 2 Lanczos steps")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    start = rng.standard_normal(A.n)
    fac = lanczos_factor(A, start, min(iters, A.n) - 1)
    ritz, _ = symtridiag_eig(fac.alpha, fac.gamma)
    lo, hi = float(ritz[0]), float(ritz[-1])
    pad = margin * (hi - lo)
    return SpectralInterval.widened(lo - pad, hi + pad)
