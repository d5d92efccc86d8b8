"""End-to-end comparison of f(A)b approximations against the exact oracle.

For each degree K the four methods (plain Chebyshev, warped-node
interpolation, density-weighted least squares, Lanczos) are applied to
``b = V 1`` and scored against ``V f(Λ) V^T b``. Results are written as CSV
and, optionally, rendered as figures next to them.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import polyfun
from .densest import SpectralCDF, estimate_cdf
from .krylov import dense_sym_eig, lanczos_factor, symtridiag_eig
from .matcore import (
    SparseSymMatrix,
    SpectralInterval,
    gen_erdos_renyi_laplacian,
    laplacian_from_offdiagonal,
    load_matrix_market,
    matvec,
    spectral_interval,
)

log = logging.getLogger(__name__)

METHODS = ("chebyshev", "interp", "ls", "lanczos")
SUP_SAMPLES = 10_000
ORACLE_MAX_N = 10_000

FUNCTIONS = {
    "exp-neg": lambda x: np.exp(-np.asarray(x, dtype=float)),
    "linear": lambda x: np.asarray(x, dtype=float),
}


def get_function(name: str):
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}") from None


# --------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class Preset:
    recipe: str  # "gnp" | "interior" | "laplacian" | "symmetrize" | "raw"
    n: int
    scale: float = 1.0
    filename: str | None = None


PRESETS = {
    "gnp": Preset("gnp", 500),
    "interior": Preset("interior", 769),
    "minnesota": Preset("laplacian", 2642, filename="minnesota.mtx"),
    "net25": Preset("laplacian", 9520, filename="net25.mtx"),
    "si2": Preset("raw", 769, filename="si2.mtx"),
    "cage9": Preset("symmetrize", 3534, filename="cage9.mtx"),
    "saylr4": Preset("laplacian", 3564, filename="saylr4.mtx"),
    "saylr4-scaled": Preset("laplacian", 3564, scale=1 / 2000, filename="saylr4.mtx"),
}


def interior_spectrum_matrix(n: int = 769, seed: int = 0) -> SparseSymMatrix:
    """Diagonal matrix with ``n`` distinct eigenvalues spread over [0, 20].

    Eigenvalues follow a bell-shaped (cosine-warped Beta(1.5, 1.5)) profile,
    so nearly all of them are interior points of the spectrum.
    """
    import scipy.sparse as sp

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    lam = np.sort(10.0 + 10.0 * np.cos(np.pi * rng.beta(1.5, 1.5, n)))
    return SparseSymMatrix.from_scipy(sp.diags(lam).tocsr())


def build_matrix(preset: str | None = None, path=None, scale: float = 1.0, seed: int = 0) -> SparseSymMatrix:
    """Construct the operator named by ``preset`` and/or ``path``.

    File presets read ``path`` (or the preset's default file name) and apply
    the preset's recipe. Without a preset, ``path`` is loaded as a symmetric
    Matrix Market file.
    """
    extra = 1.0
    if preset is None:
        if path is None:
            raise ValueError("need a preset or a matrix path")
        A = load_matrix_market(path)
    else:
        try:
            p = PRESETS[preset]
        except KeyError:
            raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
        extra = p.scale
        if p.recipe == "gnp":
            A = gen_erdos_renyi_laplacian(p.n, 0.2, seed)
        elif p.recipe == "interior":
            A = interior_spectrum_matrix(p.n, seed)
        else:
            src = Path(path) if path is not None else Path(p.filename)
            if not src.exists():
                raise FileNotFoundError(
                    f"preset {preset!r} needs a user-supplied Matrix Market file ({src})"
                )
            A = load_matrix_market(src, symmetrize=p.recipe == "symmetrize")
            if p.recipe == "laplacian":
                A = laplacian_from_offdiagonal(A)
    return A.scaled(extra * scale)


class CountingMatrix:
    """Wraps a matrix and counts products with it."""

    def __init__(self, A: SparseSymMatrix):
        self.A = A
        self.n = A.n
        self.shape = A.shape
        self.count = 0

    def matvec(self, x):
        self.count += 1
        return matvec(self.A, x)

    def __matmul__(self, x):
        return self.matvec(x)

    def gershgorin_bound(self):
        return self.A.gershgorin_bound()


# --------------------------------------------------------------------------
# oracle pieces


def make_b_spectral_ones(V) -> np.ndarray:
    """``b = V 1``: unit weight on every eigenvector."""
    return np.asarray(V, dtype=float).sum(axis=1)


def exact_fAb(A, f, b, eig=None) -> np.ndarray:
    """``V f(Λ) V^T b`` from a dense eigendecomposition (or a supplied one)."""
    if eig is None:
        n = A.n if isinstance(A, SparseSymMatrix) else np.shape(A)[0]
        if n > ORACLE_MAX_N:
            raise ValueError(f"oracle limited to n <= {ORACLE_MAX_N}")
        eig = dense_sym_eig(A)
    V, lam = eig
    return V @ (np.asarray(f(lam), dtype=float) * (V.T @ np.asarray(b, dtype=float)))


def discrete_ls_at_eigenvalues(eigs, f, K: int) -> polyfun.OrthoExpansion:
    """Equal-weight least-squares polynomial fit of ``f`` at the eigenvalues.

    Repeated eigenvalues are merged; the fit needs at least K+1 distinct ones.
    """
    lam = np.unique(np.asarray(eigs, dtype=float))
    if lam.size < K + 1:
        raise ValueError(f"only {lam.size} distinct eigenvalues, need {K + 1}")
    counts = np.ones_like(lam)
    basis = polyfun.stieltjes_basis(polyfun.DiscreteMeasure(lam, counts), K)
    return polyfun.ortho_expand(f, basis, K)


def lanczos_polynomial(fac, f) -> polyfun.NewtonInterp:
    """The degree-K polynomial implicit in a Lanczos approximation.

    It interpolates ``f`` at the Ritz values (eigenvalues of T).
    """
    theta, _ = symtridiag_eig(fac.alpha, fac.gamma)
    return polyfun.newton_interpolant(theta, f)


# --------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentConfig:
    preset: str | None = "gnp"
    matrix: str | None = None
    fn: str = "exp-neg"
    degrees: list[int] = field(default_factory=lambda: list(range(3, 26)))
    T: int = 10
    J: int = 10
    K_theta: int = 30
    M: int = 2000
    seed: int = 0
    scale: float = 1.0
    eig_K: int = 10
    bounds: str = "lanczos"  # "lanczos" | "oracle" | "lo,hi"
    lanczos_iters: int | None = None
    margin: float = 0.01
    reorth: bool = True
    out: str | None = None
    cdf_cache: str | None = None
    figures: bool = True
    record_timing: bool = True

    def validate(self) -> None:
        if not self.degrees or any(int(k) < 1 for k in self.degrees):
            raise ValueError("degrees must be a nonempty list of integers >= 1")
        for name in ("T", "J", "K_theta", "M"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.T < 2 or self.M < 2:
            raise ValueError("T and M must be at least 2")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        get_function(self.fn)


@dataclass
class ExperimentResult:
    rows: list[dict]
    eig_K: int
    eigenvalues: np.ndarray
    eig_errors: dict[str, np.ndarray]
    interval: SpectralInterval
    cdf: SpectralCDF
    files: list[Path] = field(default_factory=list)

    def get(self, method: str, K: int) -> dict:
        for r in self.rows:
            if r["method"] == method and r["K"] == K:
                return r
        raise KeyError((method, K))


ERRORS_COLUMNS = ["method", "K", "rel_err", "eig_max_err", "interval_sup_err", "matvecs", "wall_ms"]
EIG_COLUMNS = ["lambda", "abs_err_chebyshev", "abs_err_interp", "abs_err_ls", "abs_err_lanczos"]


def resolve_interval(cfg: ExperimentConfig, A: SparseSymMatrix, lam=None) -> SpectralInterval:
    if cfg.bounds == "oracle":
        return SpectralInterval.widened(float(lam[0]), float(lam[-1]))
    if cfg.bounds == "lanczos":
        iters = cfg.lanczos_iters or max(30, 2 * cfg.K_theta)
        return spectral_interval(A, margin=cfg.margin, iters=iters, seed=cfg.seed)
    lo, hi = (float(v) for v in cfg.bounds.split(","))
    return SpectralInterval.widened(lo, hi)


def load_or_estimate_cdf(cfg: ExperimentConfig, A, interval) -> SpectralCDF:
    if cfg.cdf_cache and Path(cfg.cdf_cache).exists():
        log.info("reusing CDF from %s", cfg.cdf_cache)
        return SpectralCDF.load(cfg.cdf_cache)
    cdf = estimate_cdf(A, interval, T=cfg.T, J=cfg.J, K_theta=cfg.K_theta, seed=cfg.seed)
    if cfg.cdf_cache:
        cdf.save(cfg.cdf_cache)
    return cdf


def _build(method, f, K, interval, cdf, basis):
    if method == "chebyshev":
        return polyfun.cheby_truncated(f, interval, K)
    if method == "interp":
        return polyfun.newton_interpolant(polyfun.warped_nodes(cdf, K), f)
    if method == "ls":
        return polyfun.ortho_expand(f, basis, K)
    raise ValueError(method)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every method at every degree and write the CSV (and figure) outputs."""
    cfg.validate()
    f = get_function(cfg.fn)
    degrees = sorted({int(k) for k in cfg.degrees})
    A = build_matrix(cfg.preset, cfg.matrix, cfg.scale, cfg.seed)
    if A.n > ORACLE_MAX_N:
        raise ValueError(f"matrix too large for the exact oracle (n={A.n})")

    V, lam = dense_sym_eig(A)
    b = make_b_spectral_ones(V)
    exact = exact_fAb(A, f, b, eig=(V, lam))
    exact_sq = float(exact @ exact)
    interval = resolve_interval(cfg, A, lam)
    cdf = load_or_estimate_cdf(cfg, A, interval)
    zs = np.linspace(interval.lo, interval.hi, SUP_SAMPLES)
    fz, flam = f(zs), f(lam)

    eig_K = min(degrees, key=lambda k: (abs(k - cfg.eig_K), k))
    eig_errors: dict[str, np.ndarray] = {}
    rows: list[dict] = []
    out = Path(cfg.out) if cfg.out else None
    files: list[Path] = []
    try:
        measure = polyfun.build_measure(cdf, interval, cfg.M)
        basis = polyfun.stieltjes_basis(measure, min(max(degrees), measure.support_size - 1))
        for method in METHODS:
            for K in degrees:
                counted = CountingMatrix(A)
                t0 = time.perf_counter()
                if method == "lanczos":
                    fac = lanczos_factor(counted, b, min(K, A.n - 1), reorth=cfg.reorth)
                    theta, S = symtridiag_eig(fac.alpha, fac.gamma)
                    approx = fac.bnorm * (fac.Q @ (S @ (f(theta) * S[0, :])))
                    wall = time.perf_counter() - t0
                    p = polyfun.newton_interpolant(theta, f)
                else:
                    if method == "ls" and K > basis.degree:
                        raise polyfun.BasisBreakdown(basis.degree + 1)
                    p = _build(method, f, K, interval, cdf, basis)
                    approx = p.apply(counted, b)
                    wall = time.perf_counter() - t0
                diff = exact - approx
                eig_err = np.abs(flam - p(lam))
                rows.append(
                    {
                        "method": method,
                        "K": K,
                        "rel_err": float(diff @ diff) / exact_sq,
                        "eig_max_err": float(eig_err.max()),
                        "interval_sup_err": float(np.abs(fz - p(zs)).max()),
                        "matvecs": counted.count,
                        "wall_ms": wall * 1e3 if cfg.record_timing else None,
                    }
                )
                if K == eig_K:
                    eig_errors[method] = eig_err
    finally:
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            files.append(write_errors_csv(out / "errors_vs_K.csv", rows))
            if len(eig_errors) == len(METHODS):
                files.append(write_eig_csv(out / f"eigenvalue_errors_K{eig_K}.csv", lam, eig_errors))

    result = ExperimentResult(rows, eig_K, lam, eig_errors, interval, cdf, files)
    if out is not None and cfg.figures:
        from . import plotting

        files.extend(plotting.render_report(result, out, title=cfg.preset or Path(cfg.matrix).stem))
    return result


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_errors_csv(path: Path, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERRORS_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in ERRORS_COLUMNS])
    return path


def write_eig_csv(path: Path, lam, eig_errors) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EIG_COLUMNS)
        cols = [eig_errors[m] for m in METHODS]
        for i, x in enumerate(lam):
            w.writerow([repr(float(x))] + [repr(float(c[i])) for c in cols])
    return path


def read_errors_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["K"] = int(r["K"])
        r["matvecs"] = int(r["matvecs"])
        for c in ("rel_err", "eig_max_err", "interval_sup_err"):
            r[c] = float(r[c])
        r["wall_ms"] = float(r["wall_ms"]) if r["wall_ms"] else None
    return rows
