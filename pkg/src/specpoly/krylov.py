"""Lanczos approximation of f(A)b and the symmetric eigensolvers behind it.

``symtridiag_eig`` is an implicit QL iteration with Wilkinson-type shifts
(the classic ``tql2``/``tqli`` scheme). ``dense_sym_eig`` reduces a dense
symmetric matrix to tridiagonal form with Householder reflections and hands
the result to the QL solver; above a modest size it defers to LAPACK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matcore import SparseSymMatrix, matvec

MAX_DENSE_N = 10_000
INHOUSE_MAX_N = 256


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LanczosFactorization:
    """``A Q = Q T + (residual)`` with ``Q[:, 0] = b / ||b||``.

    ``alpha`` is the diagonal of T and ``gamma`` its off-diagonal. When the
    Krylov space became invariant before reaching the requested size,
    ``breakdown`` is set and T is the (smaller) exact projection.
    """

    Q: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    bnorm: float
    breakdown: bool = False
    matvecs: int = 0

    @property
    def size(self) -> int:
        return self.alpha.size

    @property
    def T(self) -> np.ndarray:
        return (
            np.diag(self.alpha)
            + np.diag(self.gamma, 1)
            + np.diag(self.gamma, -1)
        )


def lanczos_factor(A, b, K: int, reorth: bool = True) -> LanczosFactorization:
    """Run K Lanczos steps from ``b``, producing a (K+1)-column basis.

    Forming the last diagonal entry of T needs one more product with A,
    so a complete factorization costs K+1 matvecs.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        raise ValueError("Lanczos start vector must be nonzero")
    if K < 0 or K + 1 > n:
        raise ValueError(f"need 0 <= K <= n-1, got K={K}, n={n}")
    tol = 1e-13 * max(_norm_bound(A), np.finfo(float).tiny)

    Q = np.zeros((n, K + 1))
    alpha = np.zeros(K + 1)
    gamma = np.zeros(K)
    Q[:, 0] = b / bnorm
    nmv = 0
    size = K + 1
    breakdown = False
    for j in range(K + 1):
        w = _apply(A, Q[:, j])
        nmv += 1
        alpha[j] = Q[:, j] @ w
        if j == K:
            break
        w -= alpha[j] * Q[:, j]
        if j > 0:
            w -= gamma[j - 1] * Q[:, j - 1]
        if reorth:
            # two passes of classical Gram-Schmidt are enough in practice
            for _ in range(2):
                w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
        g = float(np.linalg.norm(w))
        if g < tol:
            size = j + 1
            breakdown = True
            break
        gamma[j] = g
        Q[:, j + 1] = w / g
    return LanczosFactorization(
        Q=Q[:, :size],
        alpha=alpha[:size],
        gamma=gamma[: size - 1],
        bnorm=bnorm,
        breakdown=breakdown,
        matvecs=nmv,
    )


def lanczos_fAb(A, b, K: int, f, reorth: bool = True) -> np.ndarray:
    """Lanczos approximation ``||b|| Q f(T) e_1`` of f(A)b."""
    fac = lanczos_factor(A, b, K, reorth=reorth)
    theta, S = symtridiag_eig(fac.alpha, fac.gamma)
    y = S @ (np.asarray(f(theta), dtype=float) * S[0, :])
    return fac.bnorm * (fac.Q @ y)


def symtridiag_eig(diag, offdiag, z0=None):
    """Eigen-decomposition of a symmetric tridiagonal matrix.

    Parameters
    ----------
    diag : array_like, shape (n,)
    offdiag : array_like, shape (n-1,)
    z0 : ndarray, shape (p, n), optional
        Transform to accumulate the rotations into; defaults to the
        identity, giving the eigenvectors of T itself. Passing the
        orthogonal factor of a tridiagonal reduction yields eigenvectors of
        the original matrix.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, shape (p, n), columns matching ``eigenvalues``
    """
    d = np.array(diag, dtype=float)
    n = d.size
    e = np.zeros(n)
    off = np.asarray(offdiag, dtype=float)
    if off.size != max(n - 1, 0):
        raise ValueError("offdiag must have length len(diag) - 1")
    e[: n - 1] = off
    z = np.eye(n) if z0 is None else np.array(z0, dtype=float)
    if z.shape[1] != n:
        raise ValueError("z0 must have len(diag) columns")
    eps = np.finfo(float).eps
    budget = 30 * max(n, 1)
    sweeps = 0

    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > budget:
                raise EigenSolverError(
                    f"QL iteration did not converge after {budget} sweeps"
                )
            # shift from the trailing 2x2 block at l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                zi1 = z[:, i + 1]
                z[:, i] = c * zi - s * zi1
                z[:, i + 1] = s * zi + c * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def householder_tridiagonalize(a):
    """Reduce symmetric ``a`` to ``Q T Q^T`` with Householder reflections.

    Returns the diagonal, off-diagonal and the orthogonal factor Q.
    """
    A = np.array(a, dtype=float)
    n = A.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1 :, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0 or xnorm == abs(x[0]) and np.all(x[1:] == 0):
            continue
        alpha = -math.copysign(xnorm, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)

        S = A[k + 1 :, k + 1 :]
        p = 2.0 * (S @ v)
        q = p - (v @ p) * v
        S -= np.outer(v, q) + np.outer(q, v)
        A[k + 1 :, k] = 0.0
        A[k, k + 1 :] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha

        Qs = Q[:, k + 1 :]
        Qs -= 2.0 * np.outer(Qs @ v, v)
    return np.diag(A).copy(), np.diag(A, 1).copy(), Q


def dense_sym_eig(A, backend: str = "auto"):
    """Full eigendecomposition ``A = V diag(lam) V^T`` (ascending ``lam``).

    ``backend`` is ``"householder-ql"`` for the in-house solver,
    ``"lapack"`` for ``numpy.linalg.eigh``, or ``"auto"`` which uses the
    in-house solver up to ``INHOUSE_MAX_N`` rows.
    """
    if isinstance(A, SparseSymMatrix):
        A = A.to_dense()
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("dense_sym_eig expects a square matrix")
    if n > MAX_DENSE_N:
        raise ValueError(f"matrix too large for dense eigendecomposition (n={n} > {MAX_DENSE_N})")
    if backend == "auto":
        backend = "householder-ql" if n <= INHOUSE_MAX_N else "lapack"
    if backend == "lapack":
        lam, V = np.linalg.eigh(A)
        return V, lam
    if backend != "householder-ql":
        raise ValueError(f"unknown eigensolver backend {backend!r}")
    d, e, Q = householder_tridiagonalize(A)
    lam, V = symtridiag_eig(d, e, z0=Q)
    return V, lam


def _apply(A, x):
    if isinstance(A, SparseSymMatrix):
        return matvec(A, x)
    if hasattr(A, "matvec"):
        return np.asarray(A.matvec(x), dtype=float)
    return np.asarray(A @ x, dtype=float)


def _norm_bound(A) -> float:
    if hasattr(A, "gershgorin_bound"):
        return A.gershgorin_bound()
    if isinstance(A, np.ndarray):
        return float(np.abs(A).sum(axis=1).max())
    return 1.0
