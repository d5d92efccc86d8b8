"""Figures for a bench run, written next to its CSV files."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib import rc_context
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}

LABELS = {
    "chebyshev": "Chebyshev",
    "interp": "spectrum-adapted interpolation",
    "ls": "spectrum-adapted weighted LS",
    "lanczos": "Lanczos",
}
MARKERS = {"chebyshev": "o", "interp": "s", "ls": "^", "lanczos": "d"}

# relative errors of exactly zero cannot go on a log axis
FLOOR = 1e-32


def _new():
    fig = Figure()
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(111)


def plot_errors_vs_K(rows, path, title=None) -> Path:
    with rc_context(STYLE):
        fig, ax = _new()
        for method in LABELS:
            pts = sorted((r["K"], r["rel_err"]) for r in rows if r["method"] == method)
            if not pts:
                continue
            K, err = np.array(pts).T
            ax.semilogy(K, np.maximum(err, FLOOR), marker=MARKERS[method], ms=3, label=LABELS[method])
        ax.set_xlabel("polynomial degree $K$")
        ax.set_ylabel(r"$\|f(A)b - p_K(A)b\|^2 / \|f(A)b\|^2$")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.savefig(path)
    return Path(path)


def plot_eigenvalue_errors(lam, eig_errors, K, path, title=None) -> Path:
    with rc_context(STYLE):
        fig, ax = _new()
        for method, err in eig_errors.items():
            ax.semilogy(lam, np.maximum(err, FLOOR), ".", ms=2, label=LABELS.get(method, method))
        ax.set_xlabel(r"eigenvalue $\lambda$")
        ax.set_ylabel(rf"$|f(\lambda) - p_{{{K}}}(\lambda)|$")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, markerscale=4)
        fig.savefig(path)
    return Path(path)


def plot_cdf(cdf, lam, path, title=None) -> Path:
    """Estimated spectral CDF against the empirical one."""
    with rc_context(STYLE):
        fig, ax = _new()
        z = np.linspace(cdf.lo, cdf.hi, 2000)
        lam = np.sort(lam)
        ax.step(lam, np.arange(1, lam.size + 1) / lam.size, where="post", color="0.4", label="actual")
        ax.plot(z, cdf(z), label="estimated")
        ax.plot(cdf.knots, cdf.values, "o", ms=3, color="C1")
        ax.set_xlabel(r"$z$")
        ax.set_ylabel(r"$P_\lambda(z)$")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, loc="lower right")
        fig.savefig(path)
    return Path(path)


def render_report(result, out, title=None) -> list[Path]:
    out = Path(out)
    files = [
        plot_errors_vs_K(result.rows, out / "errors_vs_K.png", title),
        plot_cdf(result.cdf, result.eigenvalues, out / "cdf.png", title),
    ]
    if result.eig_errors:
        files.append(
            plot_eigenvalue_errors(
                result.eigenvalues,
                result.eig_errors,
                result.eig_K,
                out / f"eigenvalue_errors_K{result.eig_K}.png",
                title,
            )
        )
    return files
