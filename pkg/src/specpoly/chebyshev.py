"""First-kind Chebyshev series on a spectral interval."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import SpectralInterval
from .krylov import _apply


@dataclass(frozen=True)
class ChebySeries:
    """``sum_k coeffs[k] T_k(t)`` with ``t`` the image of λ in [-1, 1]."""

    interval: SpectralInterval
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return clenshaw(self.coeffs, self.interval.to_unit(z))

    def apply(self, A, b) -> np.ndarray:
        """``p(A) b`` by the three-term recurrence, ``degree`` matvecs."""
        out = None
        for k, v in enumerate(cheb_vectors(A, b, self.interval, self.degree)):
            out = self.coeffs[k] * v if out is None else out + self.coeffs[k] * v
        return out


def clenshaw(coeffs, t):
    """Evaluate a Chebyshev series at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * t * b1 - b2 + c, b1
    return t * b1 - b2 + coeffs[0]


def cheb_vectors(A, b, interval: SpectralInterval, K: int):
    """Yield ``T_k(Ã) b`` for k = 0..K, with Ã the matrix mapped to [-1, 1].

    Exactly K products with A are performed.
    """
    c, s = interval.center, 2.0 / interval.width

    def mapped(v):
        return (_apply(A, v) - c * v) * s

    prev = np.asarray(b, dtype=float)
    yield prev
    if K == 0:
        return
    cur = mapped(prev)
    yield cur
    for _ in range(2, K + 1):
        prev, cur = cur, 2.0 * mapped(cur) - prev
        yield cur


def gauss_coeffs(f, interval: SpectralInterval, K: int) -> np.ndarray:
    """Coefficients of the degree-K interpolant of ``f`` at the K+1 Chebyshev-Gauss points."""
    n = K + 1
    theta = np.pi * (np.arange(n) + 0.5) / n
    fx = np.asarray(f(interval.from_unit(np.cos(theta))), dtype=float)
    k = np.arange(n)[:, None]
    coeffs = (2.0 / n) * (np.cos(k * theta[None, :]) @ fx)
    coeffs[0] *= 0.5
    return coeffs
