"""Polynomial approximants of a scalar function and their action on matrices.

Three representations are supported:

* :class:`ChebyTruncated` -- plain Chebyshev expansion on the spectral interval,
* :class:`NewtonInterp` -- Newton-form interpolant, used with nodes warped
  through the inverse of an estimated spectral CDF,
* :class:`OrthoExpansion` -- weighted least-squares fit expressed in the
  polynomials orthogonal with respect to a discrete measure built from the
  estimated spectral density.

Every approximant evaluates at scalars (``p(z)``) and applies to a matrix
and vector (``p.apply(A, b)``) with exactly ``degree`` matrix-vector
products.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chebyshev import ChebySeries, cheb_vectors, gauss_coeffs
from .densest import SpectralCDF
from .krylov import _apply
from .matcore import SpectralInterval


class BasisBreakdown(ArithmeticError):
    """The measure cannot support orthogonal polynomials of the requested degree."""

    def __init__(self, k: int, msg: str = ""):
        self.k = k
        super().__init__(msg or f"three-term recurrence broke down at k={k}")


@dataclass(frozen=True)
class DiscreteMeasure:
    abscissae: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.abscissae, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if x.shape != w.shape or x.ndim != 1:
            raise ValueError("abscissae and weights must be 1-D arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("abscissae must be strictly increasing")
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("weights must be nonnegative with a positive sum")
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.abscissae.size

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.weights > 0))

    def inner(self, u, v) -> float:
        return float(np.sum(self.weights * u * v))


@dataclass(frozen=True)
class OrthoBasis:
    """Recurrence coefficients of the monic orthogonal polynomials π_0..π_K.

    ``alpha`` holds α_0..α_{K-1} and ``beta`` holds β_0..β_K with
    β_0 = Σ w_m, so that ``<π_k, π_k> = β_0 β_1 ... β_k``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    measure: DiscreteMeasure | None = None

    @property
    def degree(self) -> int:
        return self.alpha.size

    def norms_sq(self) -> np.ndarray:
        return np.cumprod(self.beta)

    def orthonormal(self, x, K: int | None = None) -> np.ndarray:
        """Orthonormal polynomials p_0..p_K at ``x``, shape ``(K+1,) + x.shape``."""
        K = self.degree if K is None else K
        x = np.asarray(x, dtype=float)
        sb = np.sqrt(self.beta)
        out = np.empty((K + 1,) + x.shape)
        out[0] = 1.0 / sb[0]
        prev = np.zeros_like(x)
        for k in range(K):
            out[k + 1] = ((x - self.alpha[k]) * out[k] - (sb[k] * prev if k else 0.0)) / sb[k + 1]
            prev = out[k]
        return out

    def monic(self, x, K: int | None = None) -> np.ndarray:
        """Monic polynomials π_0..π_K at ``x`` via the three-term recurrence."""
        K = self.degree if K is None else K
        x = np.asarray(x, dtype=float)
        out = np.empty((K + 1,) + x.shape)
        out[0] = 1.0
        for k in range(K):
            out[k + 1] = (x - self.alpha[k]) * out[k] - (self.beta[k] * out[k - 1] if k else 0.0)
        return out


# --------------------------------------------------------------------------
# approximant types


@dataclass(frozen=True)
class ChebyTruncated:
    series: ChebySeries
    tag = "chebyshev"

    @property
    def degree(self) -> int:
        return self.series.degree

    @property
    def interval(self) -> SpectralInterval:
        return self.series.interval

    def __call__(self, z):
        return self.series(z)

    def apply(self, A, b) -> np.ndarray:
        return self.series.apply(A, b)

    def to_json(self) -> dict:
        iv = self.series.interval
        return {"tag": self.tag, "interval": [iv.lo, iv.hi], "coeffs": list(map(float, self.series.coeffs))}


@dataclass(frozen=True)
class NewtonInterp:
    """Newton-form interpolant in the scaled variable ``t = (λ - center) / scale``.

    ``nodes`` are kept in the (Leja) order used for the divided differences.
    """

    nodes: np.ndarray
    coeffs: np.ndarray
    center: float
    scale: float
    tag = "newton"

    @property
    def degree(self) -> int:
        return self.nodes.size - 1

    def _t(self, z):
        return (np.asarray(z, dtype=float) - self.center) / self.scale

    def __call__(self, z):
        t = self._t(z)
        tn = self._t(self.nodes)
        p = np.full_like(t, self.coeffs[-1])
        for k in range(self.degree - 1, -1, -1):
            p = self.coeffs[k] + (t - tn[k]) * p
        return p

    def apply(self, A, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        tn = self._t(self.nodes)
        x = self.coeffs[-1] * b
        for k in range(self.degree - 1, -1, -1):
            ax = (_apply(A, x) - self.center * x) / self.scale
            x = self.coeffs[k] * b + ax - tn[k] * x
        return x

    def to_json(self) -> dict:
        return {
            "tag": self.tag,
            "interval": [float(self.nodes.min()), float(self.nodes.max())],
            "nodes": self.nodes.tolist(),
            "coeffs": self.coeffs.tolist(),
            "center": self.center,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class OrthoExpansion:
    """``p = Σ_k c_k p_k`` in the orthonormal basis of a discrete measure.

    ``coeffs`` are the orthonormal-basis coefficients ``<f, p_k>``; the
    monic-basis coefficients ``<f, π_k> / <π_k, π_k>`` are exposed as
    :attr:`gamma`. Evaluation runs the normalized recurrence, which yields
    the same polynomial while keeping intermediate vectors bounded.
    """

    basis: OrthoBasis
    coeffs: np.ndarray
    tag = "ortho"

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def gamma(self) -> np.ndarray:
        return self.coeffs / np.sqrt(self.basis.norms_sq()[: self.degree + 1])

    def __call__(self, z):
        return np.tensordot(self.coeffs, self.basis.orthonormal(z, self.degree), axes=1)

    def apply(self, A, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        al, sb = self.basis.alpha, np.sqrt(self.basis.beta)
        cur = b / sb[0]
        prev = np.zeros_like(cur)
        out = self.coeffs[0] * cur
        for k in range(self.degree):
            nxt = (_apply(A, cur) - al[k] * cur - sb[k] * prev * (k > 0)) / sb[k + 1]
            prev, cur = cur, nxt
            out = out + self.coeffs[k + 1] * cur
        return out

    def to_json(self) -> dict:
        K = self.degree
        doc = {
            "tag": self.tag,
            "alpha": self.basis.alpha[:K].tolist(),
            "beta": self.basis.beta[: K + 1].tolist(),
            "gamma": self.gamma.tolist(),
            "coeffs_orthonormal": self.coeffs.tolist(),
        }
        if self.basis.measure is not None:
            x = self.basis.measure.abscissae
            doc["interval"] = [float(x[0]), float(x[-1])]
        return doc


PolyApproximant = ChebyTruncated | NewtonInterp | OrthoExpansion


def approximant_from_json(doc: dict) -> PolyApproximant:
    tag = doc["tag"]
    if tag == ChebyTruncated.tag:
        iv = SpectralInterval(*doc["interval"])
        return ChebyTruncated(ChebySeries(iv, np.asarray(doc["coeffs"], dtype=float)))
    if tag == NewtonInterp.tag:
        return NewtonInterp(
            nodes=np.asarray(doc["nodes"], dtype=float),
            coeffs=np.asarray(doc["coeffs"], dtype=float),
            center=float(doc["center"]),
            scale=float(doc["scale"]),
        )
    if tag == OrthoExpansion.tag:
        basis = OrthoBasis(np.asarray(doc["alpha"], dtype=float), np.asarray(doc["beta"], dtype=float))
        return OrthoExpansion(basis, np.asarray(doc["coeffs_orthonormal"], dtype=float))
    raise ValueError(f"unknown approximant tag {tag!r}")


def save_approximant(path, p: PolyApproximant) -> None:
    Path(path).write_text(json.dumps(p.to_json(), indent=2))


def load_approximant(path) -> PolyApproximant:
    return approximant_from_json(json.loads(Path(path).read_text()))


def eval_scalar(p: PolyApproximant, z):
    return p(z)


def apply_to_matrix(p: PolyApproximant, A, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    n = getattr(A, "n", None) or A.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, vector has {b.shape[0]}")
    return p.apply(A, b)


# --------------------------------------------------------------------------
# constructors


def cheby_truncated(f, interval: SpectralInterval, K: int) -> ChebyTruncated:
    """Degree-K Chebyshev expansion with (K+1)-point Gauss quadrature coefficients."""
    if K < 0:
        raise ValueError("degree must be nonnegative")
    return ChebyTruncated(ChebySeries(interval, gauss_coeffs(f, interval, K)))


def chebyshev_extrema01(K: int) -> np.ndarray:
    """Chebyshev extrema shifted to [0, 1], descending from 1 to 0."""
    return (np.cos(np.arange(K + 1) * np.pi / K) + 1.0) / 2.0


def warped_nodes(cdf: SpectralCDF, K: int) -> np.ndarray:
    """Chebyshev extrema on [0, 1] mapped through the inverse CDF.

    Nodes that collapse onto each other (flat CDF spans) are spread apart by
    a minimum gap of ``1e-8`` times the interval width.
    """
    if K < 1:
        raise ValueError("warped_nodes needs K >= 1")
    y = chebyshev_extrema01(K)
    y[0], y[-1] = 1.0, 0.0
    x = np.asarray(cdf.inverse(y), dtype=float)
    return _spread(x, cdf.lo, cdf.hi)


def _spread(x, lo, hi):
    gap = 1e-8 * (hi - lo)
    order = np.argsort(x, kind="stable")
    s = x[order].copy()
    if s.size > 1 and np.all(np.diff(s) >= gap):
        return x
    if (s.size - 1) * gap > hi - lo:
        raise ValueError(f"cannot place {s.size} distinct nodes in [{lo}, {hi}]")
    for i in range(1, s.size):
        s[i] = max(s[i], s[i - 1] + gap)
    s[-1] = min(s[-1], hi)
    for i in range(s.size - 2, -1, -1):
        s[i] = min(s[i], s[i + 1] - gap)
    if s[0] < lo - 1e-12 * (hi - lo):
        raise ValueError(f"cannot place {s.size} distinct nodes in [{lo}, {hi}]")
    out = np.empty_like(s)
    out[order] = s
    return out


def leja_order(t) -> np.ndarray:
    """Permutation putting points in Leja order (largest magnitude first)."""
    t = np.asarray(t, dtype=float)
    n = t.size
    perm = [int(np.argmax(np.abs(t)))]
    logprod = np.zeros(n)
    chosen = np.zeros(n, dtype=bool)
    chosen[perm[0]] = True
    for _ in range(1, n):
        with np.errstate(divide="ignore"):
            logprod += np.log(np.abs(t - t[perm[-1]]))
        cand = np.where(chosen, -np.inf, logprod)
        nxt = int(np.argmax(cand))
        perm.append(nxt)
        chosen[nxt] = True
    return np.asarray(perm)


def newton_interpolant(nodes, f) -> NewtonInterp:
    """Newton-form interpolant of ``f`` through ``nodes`` (Leja-ordered internally)."""
    x = np.asarray(nodes, dtype=float)
    if np.unique(x).size != x.size:
        raise ValueError("interpolation nodes must be distinct")
    lo, hi = float(x.min()), float(x.max())
    center = 0.5 * (lo + hi)
    # interval of length 4 has logarithmic capacity 1
    scale = (hi - lo) / 4.0 if hi > lo else 1.0
    t = (x - center) / scale
    perm = leja_order(t)
    x, t = x[perm], t[perm]
    d = np.asarray(f(x), dtype=float).copy()
    for j in range(1, x.size):
        d[j:] = (d[j:] - d[j - 1 : -1]) / (t[j:] - t[: -j])
    return NewtonInterp(nodes=x, coeffs=d, center=center, scale=scale)


def build_measure(cdf: SpectralCDF, interval: SpectralInterval, M: int = 2000) -> DiscreteMeasure:
    """M equispaced abscissae on ``interval`` weighted by the estimated density."""
    if M < 2:
        raise ValueError("need M >= 2 abscissae")
    x = np.linspace(interval.lo, interval.hi, M)
    w = np.maximum(cdf.derivative(np.clip(x, cdf.lo, cdf.hi)), 0.0)
    if np.count_nonzero(w > 0) < 2:
        raise ValueError("estimated density is positive at fewer than 2 abscissae")
    return DiscreteMeasure(x, w)


def stieltjes_basis(measure: DiscreteMeasure, K: int) -> OrthoBasis:
    """Recurrence coefficients for the orthogonal polynomials of ``measure``.

    Discretized Stieltjes procedure run on normalized vectors; the α_k and
    β_k returned are those of the monic recurrence.
    """
    x, w = measure.abscissae, measure.weights
    if K > measure.size - 1:
        raise ValueError(f"degree {K} exceeds M-1 = {measure.size - 1}")
    if measure.support_size < K + 1:
        raise BasisBreakdown(
            measure.support_size,
            f"measure has only {measure.support_size} positive weights, need {K + 1}",
        )
    alpha = np.zeros(K)
    beta = np.zeros(K + 1)
    beta[0] = w.sum()
    cur = np.full_like(x, 1.0 / np.sqrt(beta[0]))
    prev = np.zeros_like(x)
    scale = max(abs(x[0]), abs(x[-1]))
    for k in range(K):
        alpha[k] = np.sum(w * x * cur * cur)
        r = (x - alpha[k]) * cur - (np.sqrt(beta[k]) * prev if k else 0.0)
        beta[k + 1] = np.sum(w * r * r)
        if not beta[k + 1] > (1e-14 * scale) ** 2:
            raise BasisBreakdown(k + 1)
        prev, cur = cur, r / np.sqrt(beta[k + 1])
    return OrthoBasis(alpha, beta, measure)


def ortho_expand(f, basis: OrthoBasis, K: int | None = None) -> OrthoExpansion:
    """Weighted least-squares fit of ``f`` of degree K in the basis."""
    K = basis.degree if K is None else K
    if K > basis.degree:
        raise ValueError(f"basis only supports degree {basis.degree}")
    m = basis.measure
    if m is None:
        raise ValueError("basis carries no measure to project onto")
    P = basis.orthonormal(m.abscissae, K)
    fx = np.asarray(f(m.abscissae), dtype=float)
    coeffs = P @ (m.weights * fx)
    return OrthoExpansion(basis, coeffs)


def weighted_residual(p, measure: DiscreteMeasure, f) -> float:
    x = measure.abscissae
    return float(np.sum(measure.weights * (np.asarray(f(x)) - p(x)) ** 2))
