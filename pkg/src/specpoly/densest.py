"""Spectral density estimation by stochastic eigenvalue counting.

The number of eigenvalues below each threshold ξ is estimated with
Hutchinson's trace estimator applied to a Jackson-damped Chebyshev
expansion of the step ``1{λ <= ξ}``. A monotone cubic spline through the
normalized counts gives a CDF estimate whose derivative and inverse are
available in closed form / by safeguarded root finding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chebyshev import ChebySeries, cheb_vectors
from .matcore import SparseSymMatrix, SpectralInterval


def jackson_damping(K: int) -> np.ndarray:
    """Jackson kernel factors g_0..g_K (g_0 = 1)."""
    a = np.pi / (K + 2)
    k = np.arange(K + 1)
    return ((K - k + 2) * np.cos(k * a) + np.sin(k * a) / np.tan(a)) / (K + 2)


def _step_coeffs_raw(xi, interval: SpectralInterval, K: int) -> np.ndarray:
    m = np.clip(interval.to_unit(xi), -1.0, 1.0)
    phi = np.arccos(m)
    k = np.arange(1, K + 1)
    c = np.empty(np.shape(xi) + (K + 1,))
    c[..., 0] = 1.0 - phi / np.pi
    c[..., 1:] = -2.0 * np.sin(np.multiply.outer(phi, k)) / (k * np.pi)
    return c


def step_coeffs(
    xi: float, interval: SpectralInterval, K_theta: int, jackson: bool = True
) -> ChebySeries:
    """Chebyshev series of ``1{λ <= xi}`` on ``interval``, optionally Jackson-damped."""
    if not interval.lo <= xi <= interval.hi:
        raise ValueError(f"threshold {xi} outside [{interval.lo}, {interval.hi}]")
    c = _step_coeffs_raw(float(xi), interval, K_theta)
    if jackson:
        c = c * jackson_damping(K_theta)
    return ChebySeries(interval, c)


@dataclass(frozen=True)
class EigCountEstimate:
    xi: np.ndarray
    eta: np.ndarray
    J: int

    @property
    def T(self) -> int:
        return self.xi.size


def estimate_counts(
    A: SparseSymMatrix,
    interval: SpectralInterval,
    T: int = 10,
    J: int = 10,
    K_theta: int = 30,
    seed: int = 0,
    jackson: bool = True,
) -> EigCountEstimate:
    """Estimate eigenvalue counts at T equispaced thresholds covering ``interval``.

    Each probe vector is drawn from its own child stream of ``seed`` and
    drives a single Chebyshev recurrence; the moments ``x^T T_k(Ã) x`` it
    produces are shared by every threshold.
    """
    if T < 2 or J < 1:
        raise ValueError("need T >= 2 thresholds and J >= 1 probe vectors")
    if not interval.width > 0:
        raise ValueError("degenerate spectral interval")
    xi = np.linspace(interval.lo, interval.hi, T)
    coeffs = _step_coeffs_raw(xi, interval, K_theta)
    if jackson:
        coeffs = coeffs * jackson_damping(K_theta)

    streams = np.random.SeedSequence(seed).spawn(J)
    per_probe = np.empty((J, T))
    for j, ss in enumerate(streams):
        x = np.random.default_rng(ss).standard_normal(A.n)
        moments = np.array([x @ v for v in cheb_vectors(A, x, interval, K_theta)])
        per_probe[j] = coeffs @ moments
    eta = per_probe.mean(axis=0)
    return EigCountEstimate(xi=xi, eta=eta, J=J)


class SpectralCDF:
    """Monotone piecewise-cubic Hermite CDF estimate.

    Parameters
    ----------
    knots : ndarray
        Strictly increasing breakpoints; the first and last delimit the domain.
    values : ndarray
        Nondecreasing CDF values at the knots.
    slopes : ndarray
        Derivative values at the knots.
    """

    def __init__(self, knots, values, slopes):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.slopes = np.asarray(slopes, dtype=float)
        if self.knots.ndim != 1 or self.knots.size < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(self.knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        h = np.diff(self.knots)
        y0, y1 = self.values[:-1], self.values[1:]
        m0, m1 = self.slopes[:-1] * h, self.slopes[1:] * h
        # per-piece power basis in the local coordinate t = (z - knot) / h
        self._poly = np.stack(
            [y0, m0, 3 * (y1 - y0) - 2 * m0 - m1, 2 * (y0 - y1) + m0 + m1], axis=1
        )
        self._h = h

    @property
    def lo(self) -> float:
        return float(self.knots[0])

    @property
    def hi(self) -> float:
        return float(self.knots[-1])

    @property
    def interval(self) -> SpectralInterval:
        return SpectralInterval(self.lo, self.hi)

    def _locate(self, z):
        z = np.asarray(z, dtype=float)
        slack = 1e-12 * (self.hi - self.lo)
        if np.any(z < self.lo - slack) or np.any(z > self.hi + slack) or np.any(np.isnan(z)):
            raise ValueError(f"argument outside CDF domain [{self.lo}, {self.hi}]")
        z = np.clip(z, self.lo, self.hi)
        idx = np.clip(np.searchsorted(self.knots, z, side="right") - 1, 0, self._h.size - 1)
        t = (z - self.knots[idx]) / self._h[idx]
        return idx, t

    def __call__(self, z):
        idx, t = self._locate(z)
        c = self._poly[idx]
        p = c[..., 0] + t * (c[..., 1] + t * (c[..., 2] + t * c[..., 3]))
        # a monotone piece stays between its end values; clamping removes
        # the last-ulp overshoot at the knots
        y0, y1 = self.values[idx], self.values[idx + 1]
        p = np.where(t == 1.0, y1, p)
        return np.clip(p, np.minimum(y0, y1), np.maximum(y0, y1))

    def derivative(self, z):
        idx, t = self._locate(z)
        c = self._poly[idx]
        return (c[..., 1] + t * (2 * c[..., 2] + 3 * t * c[..., 3])) / self._h[idx]

    def inverse(self, y, tol: float = 1e-13, maxiter: int = 200):
        """Leftmost ``z`` with ``P(z) = y`` (safeguarded Newton + bisection)."""
        y = np.asarray(y, dtype=float)
        v0, v1 = self.values[0], self.values[-1]
        if np.any(np.isnan(y)) or np.any(y < v0 - 1e-12) or np.any(y > v1 + 1e-12):
            raise ValueError(f"CDF level outside [{v0}, {v1}]")
        scalar = y.ndim == 0
        y = np.atleast_1d(np.clip(y, v0, v1))

        idx = np.searchsorted(self.values, y, side="left")
        out = np.empty_like(y)
        at_knot = (idx == 0) | (self.values[np.minimum(idx, self.values.size - 1)] == y)
        out[at_knot] = self.knots[np.minimum(idx[at_knot], self.knots.size - 1)]

        sel = np.flatnonzero(~at_knot)
        if sel.size:
            piece = idx[sel] - 1
            c = self._poly[piece]
            target = y[sel]
            a = np.zeros(sel.size)
            b = np.ones(sel.size)
            span = self.values[piece + 1] - self.values[piece]
            t = (target - self.values[piece]) / span
            for _ in range(maxiter):
                val = c[:, 0] + t * (c[:, 1] + t * (c[:, 2] + t * c[:, 3])) - target
                if np.all(np.abs(val) <= tol):
                    break
                below = val < 0
                a = np.where(below, t, a)
                b = np.where(below, b, t)
                der = c[:, 1] + t * (2 * c[:, 2] + 3 * t * c[:, 3])
                with np.errstate(divide="ignore", invalid="ignore"):
                    step = t - val / der
                bad = ~(der > 0) | ~(step > a) | ~(step < b)
                t = np.where(bad, 0.5 * (a + b), step)
                if np.all(b - a <= 4 * np.finfo(float).eps):
                    break
            out[sel] = self.knots[piece] + t * self._h[piece]
        return out[0] if scalar else out

    def to_json(self) -> dict:
        return {
            "type": "SpectralCDF",
            "knots": self.knots.tolist(),
            "values": self.values.tolist(),
            "derivatives": self.slopes.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SpectralCDF":
        return cls(doc["knots"], doc["values"], doc["derivatives"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path) -> "SpectralCDF":
        return cls.from_json(json.loads(Path(path).read_text()))


def fritsch_carlson_slopes(x, y) -> np.ndarray:
    """Knot derivatives making the cubic Hermite interpolant of monotone data monotone."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = np.diff(x)
    delta = np.diff(y) / h
    m = np.empty_like(y)
    m[0], m[-1] = delta[0], delta[-1]
    if y.size > 2:
        hl, hr = h[:-1], h[1:]
        dl, dr = delta[:-1], delta[1:]
        m[1:-1] = np.where(dl * dr > 0, (hr * dl + hl * dr) / (hl + hr), 0.0)

    for i, d in enumerate(delta):
        if d == 0.0:
            m[i] = m[i + 1] = 0.0
            continue
        a, b = m[i] / d, m[i + 1] / d
        r = a * a + b * b
        if r > 9.0:
            tau = 3.0 / np.sqrt(r)
            m[i] = tau * a * d
            m[i + 1] = tau * b * d
    return m


def fit_cdf(counts: EigCountEstimate, n: int, interval: SpectralInterval) -> SpectralCDF:
    """Monotone cubic CDF through the repaired points ``(ξ_i, η_i / n)``.

    Normalized counts are clamped to [0, 1] and replaced by their running
    maximum; the curve is pinned to 0 at ``interval.lo`` and 1 at
    ``interval.hi``.
    """
    x = np.asarray(counts.xi, dtype=float)
    y = np.clip(np.asarray(counts.eta, dtype=float) / n, 0.0, 1.0)
    inside = (x > interval.lo) & (x < interval.hi)
    x = np.concatenate([[interval.lo], x[inside], [interval.hi]])
    y = np.concatenate([[0.0], y[inside], [1.0]])
    y = np.maximum.accumulate(y)
    return SpectralCDF(x, y, fritsch_carlson_slopes(x, y))


def estimate_cdf(
    A: SparseSymMatrix,
    interval: SpectralInterval,
    T: int = 10,
    J: int = 10,
    K_theta: int = 30,
    seed: int = 0,
) -> SpectralCDF:
    counts = estimate_counts(A, interval, T=T, J=J, K_theta=K_theta, seed=seed)
    return fit_cdf(counts, A.n, interval)


def cdf_eval(cdf: SpectralCDF, z):
    return cdf(z)


def pdf_eval(cdf: SpectralCDF, z):
    return cdf.derivative(z)


def cdf_inverse(cdf: SpectralCDF, y):
    return cdf.inverse(y)
