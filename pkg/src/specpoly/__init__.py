"""Spectrum-adapted polynomial approximation of f(A)b for sparse symmetric A."""

from .matcore import (
    SparseSymMatrix,
    SpectralInterval,
    gen_erdos_renyi_laplacian,
    laplacian_from_offdiagonal,
    load_matrix_market,
    matvec,
    spectral_interval,
)
from .densest import SpectralCDF, estimate_cdf, estimate_counts, fit_cdf, step_coeffs
from .polyfun import (
    DiscreteMeasure,
    OrthoBasis,
    apply_to_matrix,
    build_measure,
    cheby_truncated,
    eval_scalar,
    newton_interpolant,
    ortho_expand,
    stieltjes_basis,
    warped_nodes,
)
from .krylov import dense_sym_eig, lanczos_fAb, lanczos_factor, symtridiag_eig

__version__ = "0.1.0"
