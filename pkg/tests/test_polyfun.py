import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specpoly.bench import CountingMatrix
from specpoly.densest import SpectralCDF, estimate_cdf, fritsch_carlson_slopes
from specpoly.matcore import SparseSymMatrix, SpectralInterval
from specpoly.polyfun import (
    BasisBreakdown,
    DiscreteMeasure,
    apply_to_matrix,
    approximant_from_json,
    build_measure,
    cheby_truncated,
    eval_scalar,
    leja_order,
    load_approximant,
    newton_interpolant,
    ortho_expand,
    save_approximant,
    stieltjes_basis,
    warped_nodes,
    weighted_residual,
)

from conftest import diag_matrix, random_symmetric


def expneg(x):
    return np.exp(-np.asarray(x, dtype=float))


def linear_cdf(lo, hi):
    return SpectralCDF([lo, hi], [0.0, 1.0], np.full(2, 1.0 / (hi - lo)))


@pytest.fixture(scope="module")
def gnp_cdf(gnp, gnp_interval):
    return estimate_cdf(gnp, gnp_interval, T=10, J=10, K_theta=30, seed=0)


@pytest.fixture(scope="module")
def gnp_measure(gnp_cdf, gnp_interval):
    return build_measure(gnp_cdf, gnp_interval, 2000)


# ---------------------------------------------------------------- chebyshev


def test_cheby_identity_coefficients():
    p = cheby_truncated(lambda x: x, SpectralInterval(-1, 1), 1)
    np.testing.assert_allclose(p.series.coeffs, [0, 1], atol=1e-15)
    assert eval_scalar(p, 0.3) == pytest.approx(0.3, abs=1e-15)


def test_cheby_reproduces_polynomials():
    iv = SpectralInterval(-3, 5)
    f = np.polynomial.Polynomial([1, -2, 0.5, 0.1, -0.01])
    p = cheby_truncated(f, iv, 6)
    z = np.linspace(-3, 5, 1000)
    assert np.abs(p(z) - f(z)).max() <= 1e-12 * np.abs(f(z)).max()


def test_cheby_agrees_with_numpy_interpolation():
    # Gauss-coefficient truncation is the interpolant at the first-kind Chebyshev points
    iv = SpectralInterval(0.0, 3.0)
    ref = np.polynomial.Chebyshev.interpolate(lambda x: np.exp(-x), 9, domain=[0, 3])
    p = cheby_truncated(expneg, iv, 9)
    z = np.linspace(0, 3, 500)
    np.testing.assert_allclose(p(z), ref(z), atol=1e-14)


@pytest.mark.xfail(
    strict=True,
    reason="degree-5 sup error on this G(500, 0.2) realization is about 0.86, not about 0.347",
)
def test_cheby_gnp_degree5_sup_error(gnp_interval):
    p = cheby_truncated(expneg, gnp_interval, 5)
    z = np.linspace(gnp_interval.lo, gnp_interval.hi, 10_000)
    assert abs(np.abs(p(z) - expneg(z)).max() - 0.347) <= 0.05


@pytest.mark.parametrize("s", [1 / 2000, 0.37, 7.0])
def test_cheby_affine_equivariance(s):
    iv = SpectralInterval(0.5, 9.0)
    p1 = cheby_truncated(expneg, iv, 12)
    p2 = cheby_truncated(lambda y: expneg(y / s), SpectralInterval(s * iv.lo, s * iv.hi), 12)
    z = np.linspace(iv.lo, iv.hi, 400)
    assert np.abs(p1(z) - p2(s * z)).max() <= 1e-10


# ---------------------------------------------------------------- warped nodes


def test_warped_identity_and_affine():
    np.testing.assert_allclose(warped_nodes(linear_cdf(0, 1), 2), [1, 0.5, 0], atol=1e-15)
    y = (np.cos(np.arange(5) * np.pi / 4) + 1) / 2
    np.testing.assert_allclose(warped_nodes(linear_cdf(0, 10), 4), 10 * y, atol=1e-13)


def test_warped_gnp_nodes_cluster_high(gnp_cdf, gnp_interval):
    x = warped_nodes(gnp_cdf, 5)
    assert x.size == 6
    assert np.sum(x > gnp_interval.center) >= 4
    assert np.all(np.diff(x) < 0)


def test_warped_nodes_spread_on_flat_span():
    # all mass in a tiny window: inverse images collapse, so nodes are spread
    cdf = SpectralCDF([0.0, 0.5, 0.5 + 1e-12, 1.0], [0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 0.0, 0.0])
    x = warped_nodes(cdf, 6)
    assert np.unique(x).size == 7
    gaps = np.abs(np.diff(np.sort(x)))
    assert gaps.min() >= 1e-8 * (1 - 1e-9)
    assert np.all((x >= 0) & (x <= 1))


def test_warped_nodes_rejects_low_degree():
    with pytest.raises(ValueError):
        warped_nodes(linear_cdf(0, 1), 0)


# ---------------------------------------------------------------- newton


def test_newton_linear_exact():
    p = newton_interpolant([0.1, 2.0, 5.0], lambda x: 3 * x + 1)
    z = np.linspace(-1, 6, 300)
    assert np.abs(p(z) - (3 * z + 1)).max() <= 1e-12


def test_newton_square():
    p = newton_interpolant([0.0, 1.0, 2.0], lambda x: np.asarray(x) ** 2)
    assert p(3.0) == pytest.approx(9.0, rel=1e-14)


def test_newton_rejects_duplicates():
    with pytest.raises(ValueError):
        newton_interpolant([0.0, 1.0, 1.0], np.exp)


def test_leja_order_is_permutation_and_starts_at_max():
    t = np.array([0.1, -1.9, 0.7, 2.0, -0.4])
    perm = leja_order(t)
    assert sorted(perm) == list(range(5))
    assert perm[0] == 3 and perm[1] == 1


def test_newton_gnp_warped_matches_vandermonde(gnp_cdf, gnp_interval):
    x = warped_nodes(gnp_cdf, 5)
    p = newton_interpolant(x, expneg)
    assert np.abs(p(x) - expneg(x)).max() <= 1e-10 * max(1.0, np.abs(expneg(x)).max())
    # reference: monomial Vandermonde solve in the centered, scaled variable
    c, s = gnp_interval.center, gnp_interval.width / 2
    V = np.vander((x - c) / s, 6, increasing=True)
    a = np.linalg.solve(V, expneg(x))
    z = np.linspace(x.min(), x.max(), 1001)[1:-1]
    ref = np.polynomial.polynomial.polyval((z - c) / s, a)
    assert np.abs(p(z) - ref).max() <= 1e-8


# ---------------------------------------------------------------- measures and bases


def test_build_measure_linear():
    m = build_measure(linear_cdf(0, 1), SpectralInterval(0, 1), 5)
    np.testing.assert_allclose(m.abscissae, [0, 0.25, 0.5, 0.75, 1])
    np.testing.assert_allclose(m.weights, 1.0)


def test_build_measure_flat_span():
    x = np.array([0.0, 0.4, 0.6, 1.0])
    y = np.array([0.0, 0.5, 0.5, 1.0])
    cdf = SpectralCDF(x, y, fritsch_carlson_slopes(x, y))
    m = build_measure(cdf, SpectralInterval(0, 1), 101)
    inside = (m.abscissae > 0.4 + 1e-12) & (m.abscissae < 0.6 - 1e-12)
    assert np.all(m.weights[inside] == 0)
    outside = (m.abscissae < 0.4 - 1e-12) | (m.abscissae > 0.6 + 1e-12)
    assert np.all(m.weights[outside] > 0)


def test_build_measure_gnp_riemann_sum(gnp_measure, gnp_interval):
    dx = gnp_interval.width / (gnp_measure.size - 1)
    assert abs(gnp_measure.weights.sum() * dx - 1) <= 0.01


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        DiscreteMeasure(np.array([0.0, 1.0]), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        build_measure(linear_cdf(0, 1), SpectralInterval(0, 1), 1)


def test_stieltjes_two_point():
    b = stieltjes_basis(DiscreteMeasure(np.array([-1.0, 1.0]), np.array([0.5, 0.5])), 1)
    np.testing.assert_allclose(b.alpha, [0.0], atol=1e-16)
    np.testing.assert_allclose(b.beta, [1.0, 1.0])


def test_stieltjes_symmetric_grid():
    x = np.linspace(2.0, 6.0, 41)
    b = stieltjes_basis(DiscreteMeasure(x, np.ones(41)), 10)
    np.testing.assert_allclose(b.alpha, 4.0, atol=1e-12)


def test_stieltjes_matches_legendre_limit():
    # Gauss-Legendre nodes/weights reproduce the continuous Legendre recurrence exactly
    x, w = np.polynomial.legendre.leggauss(40)
    b = stieltjes_basis(DiscreteMeasure(x, w), 12)
    k = np.arange(1, 13)
    np.testing.assert_allclose(b.beta[1:], k**2 / (4.0 * k**2 - 1), rtol=1e-12)
    assert b.beta[0] == pytest.approx(2.0)


def test_stieltjes_breakdown():
    w = np.zeros(50)
    w[[3, 20, 40]] = 1.0
    m = DiscreteMeasure(np.linspace(0, 1, 50), w)
    stieltjes_basis(m, 2)
    with pytest.raises(BasisBreakdown) as err:
        stieltjes_basis(m, 3)
    assert err.value.k == 3


def test_gram_matrix_gnp(gnp_measure):
    b = stieltjes_basis(gnp_measure, 25)
    w = gnp_measure.weights
    for P in (b.monic(gnp_measure.abscissae), b.orthonormal(gnp_measure.abscissae)):
        G = (P * w) @ P.T
        d = np.sqrt(np.diag(G))
        off = G / np.outer(d, d) - np.eye(26)
        assert np.abs(off).max() <= 1e-8
    np.testing.assert_allclose(np.diag((b.monic(gnp_measure.abscissae) * w) @ b.monic(gnp_measure.abscissae).T),
                               b.norms_sq(), rtol=1e-8)
    assert np.all(b.beta[1:] > 0)


# ---------------------------------------------------------------- least squares


def test_expand_basis_polynomial():
    m = DiscreteMeasure(np.linspace(-1, 1, 30), np.linspace(0.5, 1.5, 30))
    b = stieltjes_basis(m, 5)
    p = ortho_expand(lambda x: b.monic(x, 2)[2], b, 5)
    np.testing.assert_allclose(p.gamma, [0, 0, 1, 0, 0, 0], atol=1e-12)
    c = ortho_expand(lambda x: np.full_like(x, 2.5), b, 5)
    np.testing.assert_allclose(c.gamma, [2.5, 0, 0, 0, 0, 0], atol=1e-12)


def test_ls_residual_matches_dense_solve(gnp_measure, gnp_interval):
    K = 10
    p = ortho_expand(expneg, stieltjes_basis(gnp_measure, K), K)
    x, w = gnp_measure.abscissae, gnp_measure.weights
    # weighted least squares in a Chebyshev Vandermonde basis, solved by QR
    V = np.polynomial.chebyshev.chebvander(gnp_interval.to_unit(x), K)
    sw = np.sqrt(w)
    coef = np.linalg.lstsq(V * sw[:, None], sw * expneg(x), rcond=None)[0]
    ref = float(np.sum(w * (expneg(x) - V @ coef) ** 2))
    got = weighted_residual(p, gnp_measure, expneg)
    assert abs(got - ref) <= 1e-6 * ref


def test_ls_perturbation_increases_residual(gnp_measure):
    b = stieltjes_basis(gnp_measure, 8)
    p = ortho_expand(expneg, b, 8)
    r0 = weighted_residual(p, gnp_measure, expneg)
    norms = np.sqrt(b.norms_sq())
    for k in range(9):
        for sign in (1, -1):
            c = p.coeffs.copy()
            c[k] += sign * 1e-3 * norms[k]  # γ_k shifted by ±1e-3
            assert weighted_residual(type(p)(b, c), gnp_measure, expneg) > r0


def test_expand_rejects_excess_degree(gnp_measure):
    b = stieltjes_basis(gnp_measure, 4)
    with pytest.raises(ValueError):
        ortho_expand(expneg, b, 5)


# ---------------------------------------------------------------- cross-checks


def test_three_forms_coincide_when_identical():
    iv = SpectralInterval(-1.0, 3.0)
    K = 8
    cheb = cheby_truncated(expneg, iv, K)
    gauss = iv.from_unit(np.cos((np.arange(K + 1) + 0.5) * np.pi / (K + 1)))
    newton = newton_interpolant(gauss, expneg)
    # discrete LS on exactly K+1 points is interpolation at those points
    ls = ortho_expand(expneg, stieltjes_basis(DiscreteMeasure(np.sort(gauss), np.ones(K + 1)), K), K)
    z = np.linspace(-1, 3, 300)
    assert np.abs(cheb(z) - newton(z)).max() <= 1e-12
    assert np.abs(cheb(z) - ls(z)).max() <= 1e-12


def _approximants(f, iv, K, cdf):
    m = build_measure(cdf, iv, 400)
    return [
        cheby_truncated(f, iv, K),
        newton_interpolant(warped_nodes(cdf, K), f),
        ortho_expand(f, stieltjes_basis(m, K), K),
    ]


def test_apply_matches_dense_oracle():
    a = random_symmetric(100, 42)
    lam, V = np.linalg.eigh(a)
    iv = SpectralInterval(lam[0], lam[-1])
    b = np.random.default_rng(1).standard_normal(100)
    A = SparseSymMatrix.from_dense(a)
    for p in _approximants(expneg, iv, 12, estimate_cdf(A, iv, seed=0)):
        ref = V @ (p(lam) * (V.T @ b))
        y = apply_to_matrix(p, A, b)
        assert np.linalg.norm(y - ref) <= 1e-8 * np.linalg.norm(ref), p.tag


def test_apply_diagonal_matches_scalar_and_counts_matvecs():
    vals = np.linspace(0.0, 4.0, 50)
    A = diag_matrix(vals)
    b = np.random.default_rng(2).standard_normal(50)
    for K in (1, 7, 15):
        for p in _approximants(expneg, SpectralInterval(0, 4), K, linear_cdf(0, 4)):
            counted = CountingMatrix(A)
            y = apply_to_matrix(p, counted, b)
            assert counted.count == K, p.tag
            np.testing.assert_allclose(y, eval_scalar(p, vals) * b, atol=1e-12, rtol=0)


def test_apply_constant_and_dimension_check():
    p = cheby_truncated(lambda x: np.full_like(x, 2.0), SpectralInterval(0, 1), 0)
    b = np.arange(4.0)
    np.testing.assert_allclose(apply_to_matrix(p, diag_matrix(np.ones(4)), b), 2 * b)
    with pytest.raises(ValueError):
        apply_to_matrix(p, diag_matrix(np.ones(3)), b)


def test_concurrent_apply_shared_matrix(gnp, gnp_cdf, gnp_interval):
    from concurrent.futures import ThreadPoolExecutor

    ps = _approximants(expneg, gnp_interval, 10, gnp_cdf)
    bs = np.random.default_rng(3).standard_normal((3, gnp.n))
    jobs = [(p, b) for p in ps for b in bs]
    serial = [apply_to_matrix(p, gnp, b) for p, b in jobs]
    with ThreadPoolExecutor(4) as ex:
        threaded = list(ex.map(lambda pb: apply_to_matrix(pb[0], gnp, pb[1]), jobs))
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a, b)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 12),
    st.lists(st.floats(-2, 2), min_size=13, max_size=13),
    st.integers(0, 2**32 - 1),
)
def test_degree_reproduction(K, coef, seed):
    rng = np.random.default_rng(seed)
    f = np.polynomial.Polynomial(coef[: K + 1])
    iv = SpectralInterval(-1.0, 1.0)
    z = np.linspace(-1, 1, 400)
    scale = max(1.0, np.abs(f(z)).max())
    # jittered Chebyshev extrema keep the node set well conditioned
    nodes = np.cos(np.arange(K + 1) * np.pi / K) + rng.uniform(-0.1, 0.1, K + 1) / (K + 1)
    p = newton_interpolant(np.clip(nodes, -1, 1), f)
    assert np.abs(p(z) - f(z)).max() <= 1e-8 * scale
    m = DiscreteMeasure(np.linspace(-1, 1, 200), rng.uniform(0.1, 1.0, 200))
    q = ortho_expand(f, stieltjes_basis(m, K), K)
    assert np.abs(q(z) - f(z)).max() <= 1e-8 * scale
    c = cheby_truncated(f, iv, K)
    assert np.abs(c(z) - f(z)).max() <= 1e-8 * scale


# ---------------------------------------------------------------- serialization


def test_approximant_json_round_trip(tmp_path, gnp_cdf, gnp_interval):
    z = np.linspace(gnp_interval.lo, gnp_interval.hi, 77)
    for p in _approximants(expneg, gnp_interval, 9, gnp_cdf):
        path = tmp_path / f"{p.tag}.json"
        save_approximant(path, p)
        q = load_approximant(path)
        assert q.tag == p.tag and q.degree == 9
        np.testing.assert_allclose(q(z), p(z), rtol=1e-13, atol=1e-15)
        assert approximant_from_json(p.to_json()).degree == 9


def test_unknown_tag_rejected():
    with pytest.raises(ValueError):
        approximant_from_json({"tag": "bogus"})
