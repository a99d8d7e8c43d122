import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.integrate import dblquad, quad

from twohciz import (
    BoundaryData,
    DegeneracyError,
    TimeParameter,
    batch_means,
    closed_form_moments,
    exact_linear_statistic,
    heat_kernel,
    km_log_density,
    km_normalization_log,
    km_normalization_quadrature,
    sample_km_mcmc,
    spectral_moment_estimate,
)
from twohciz.km import tilted_gaussian_moment

from conftest import within

small = st.floats(-1.5, 1.5, allow_nan=False)
times = st.floats(0.1, 0.9)


def full_km_log_density(lam, a, b, t):
    """Product of heat-kernel determinants, without any algebraic reduction."""
    P = heat_kernel(t, np.asarray(a)[:, None], np.asarray(lam)[None, :])
    Q = heat_kernel(1 - t, np.asarray(lam)[:, None], np.asarray(b)[None, :])
    return math.log(np.linalg.det(P) * np.linalg.det(Q))


def test_time_parameter():
    tp = TimeParameter(0.3)
    assert tp.sigma2 == pytest.approx(0.21)
    for bad in (0.0, 1.0, -0.2, float("nan")):
        with pytest.raises(ValueError):
            TimeParameter(bad)


def test_heat_kernel_examples():
    assert heat_kernel(1.0, 0.4, 0.4) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert quad(lambda y: heat_kernel(1.0, 0.0, y), -np.inf, np.inf, epsabs=1e-13)[0] == pytest.approx(1.0, abs=1e-10)
    conv = quad(lambda z: heat_kernel(0.5, 0.0, z) * heat_kernel(0.5, z, 1.0), -np.inf, np.inf, epsabs=1e-13)[0]
    assert conv == pytest.approx(heat_kernel(1.0, 0.0, 1.0), abs=1e-8)


def test_density_n2_direct_determinants():
    t = 0.5
    lam = np.array([0.0, 1.0])
    a = b = np.array([0.0, 1.0])
    d1 = np.linalg.det(np.exp(np.outer(a, lam) / t))
    d2 = np.linalg.det(np.exp(np.outer(b, lam) / (1 - t)))
    direct = math.log(d1 * d2) - lam @ lam / (2 * t * (1 - t))
    assert km_log_density(lam, BoundaryData.distinct(a), BoundaryData.distinct(b), t) == pytest.approx(direct, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=3, max_size=3), times)
def test_density_ratio_to_heat_kernels_is_constant(lam, t):
    a, b = [-0.8, 0.1, 1.0], [-0.5, 0.3, 0.9]
    lam2 = np.array(lam) + np.array([0.3, -0.2, 0.1])
    assume(min(abs(np.subtract.outer(lam, lam))[np.triu_indices(3, 1)]) > 0.05)
    assume(min(abs(np.subtract.outer(lam2, lam2))[np.triu_indices(3, 1)]) > 0.05)
    A, B = BoundaryData.distinct(a), BoundaryData.distinct(b)
    r1 = km_log_density(lam, A, B, t) - full_km_log_density(lam, a, b, t)
    r2 = km_log_density(lam2, A, B, t) - full_km_log_density(lam2, a, b, t)
    assert r1 == pytest.approx(r2, abs=1e-8)


cluster_data = st.lists(st.tuples(small, st.integers(1, 2)), min_size=1, max_size=2, unique_by=lambda c: round(c[0], 1))


@settings(max_examples=40, deadline=None)
@given(cluster_data, st.lists(small, min_size=4, max_size=4), st.permutations(range(4)), times)
def test_density_symmetric_and_nonnegative(ca, lam, perm, t):
    A = BoundaryData.from_clusters(sorted(ca))
    n = A.n
    B = BoundaryData.distinct(np.linspace(-0.7, 0.9, n)) if n > 1 else BoundaryData.distinct([0.3])
    lam = np.array(lam[:n])
    assume(n == 1 or min(abs(np.subtract.outer(lam, lam))[np.triu_indices(n, 1)]) > 0.05)
    v = km_log_density(lam, A, B, t)
    assert not math.isnan(v)  # real log or -inf: the determinant product is never negative
    p = [i for i in perm if i < n]
    assert km_log_density(lam[p], A, B, t) == pytest.approx(v, rel=1e-10, abs=1e-10) or v == -math.inf


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=3, max_size=3), small, times)
def test_translation_covariance(lam, c, t):
    A, B = BoundaryData((0.0, 1.0), (2, 1)), BoundaryData((-1.0, 0.5), (1, 2))
    lam = np.array(lam)
    assume(min(abs(np.subtract.outer(lam, lam))[np.triu_indices(3, 1)]) > 0.05)
    v0 = km_log_density(lam, A, B, t)
    assume(np.isfinite(v0) and v0 > -200)
    s2 = t * (1 - t)
    v1 = km_log_density(lam + c, A, B, t)
    expected = v0 + c / t * A.trace() + c / (1 - t) * B.trace() - c / s2 * lam.sum() - 3 * c * c / (2 * s2)
    assert v1 == pytest.approx(expected, rel=1e-10, abs=1e-9)


def test_coincident_points_have_zero_density():
    A, B = BoundaryData.distinct([0.0, 1.0]), BoundaryData.distinct([0.0, 1.0])
    assert km_log_density([0.3, 0.3], A, B, 0.5) == -math.inf


def test_tilted_moment_examples():
    assert tilted_gaussian_moment(1, 0.0, 0.4) == 0.0
    assert tilted_gaussian_moment(2, 0.0, 0.4) == pytest.approx(math.sqrt(2 * math.pi * 0.4) * 0.4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 8), st.floats(-4, 4), st.floats(0.05, 0.25))
def test_tilted_moment_against_quadrature(k, gamma, s2):
    f = lambda x: x**k * math.exp(gamma * x - x * x / (2 * s2))
    centre, width = s2 * gamma, 14 * math.sqrt(s2)
    direct = quad(f, centre - width, centre + width, points=[0.0, centre], epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    assert tilted_gaussian_moment(k, gamma, s2) == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_normalization_n1_and_scalar_zero():
    t = 0.35
    s2 = t * (1 - t)
    assert float(km_normalization_log([0.0], [0.0], t)) == pytest.approx(math.sqrt(2 * math.pi * s2))
    A = BoundaryData.distinct([0.7])
    B = BoundaryData.distinct([-0.4])
    direct = quad(lambda x: math.exp(km_log_density([x], A, B, t)), -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert float(km_normalization_log(A, B, t)) == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize(
    "A, B, t",
    [
        (BoundaryData.distinct([0.0, 1.0]), BoundaryData.distinct([0.0, 1.0]), 0.5),
        (BoundaryData.distinct([-0.5, 0.8]), BoundaryData.distinct([0.2, 1.1]), 0.3),
        (BoundaryData((0.0,), (2,)), BoundaryData((0.0,), (2,)), 0.4),
        (BoundaryData((0.4,), (2,)), BoundaryData.distinct([-1.0, 0.5]), 0.6),
    ],
)
def test_normalization_n2_against_dblquad(A, B, t):
    f = lambda y, x: math.exp(km_log_density([x, y], A, B, t)) if x != y else 0.0
    direct = dblquad(f, -6, 6, -6, 6, epsabs=0, epsrel=1e-11)[0]
    assert float(km_normalization_log(A, B, t)) == pytest.approx(direct, rel=1e-8)
    q = km_normalization_quadrature(A, B, t)
    assert q.log_magnitude == pytest.approx(km_normalization_log(A, B, t).log_magnitude, rel=1e-10, abs=1e-10)


def test_linear_statistic_n2_against_dblquad():
    A = B = BoundaryData.distinct([0.0, 1.0])
    t = 0.5
    w = lambda y, x: math.exp(km_log_density([x, y], A, B, t)) if x != y else 0.0
    z = dblquad(w, -6, 6, -6, 6, epsabs=0, epsrel=1e-10)[0]
    for k in (1, 3):
        num = dblquad(lambda y, x: (x**k + y**k) * w(y, x), -6, 6, -6, 6, epsabs=0, epsrel=1e-10)[0]
        assert exact_linear_statistic(k, A, B, t) == pytest.approx(num / z, rel=1e-8, abs=1e-10)


def test_linear_statistic_k0_and_first_moment():
    A, B = BoundaryData((0.0, 1.0), (2, 1)), BoundaryData((-1.0, 0.5), (1, 2))
    assert exact_linear_statistic(0, A, B, 0.4) == 3.0
    assert exact_linear_statistic(1, A, B, 0.4) == pytest.approx(closed_form_moments(A, B, 0.4).e_tr_m, rel=1e-12)
    with pytest.raises(ValueError):
        exact_linear_statistic(9, A, B, 0.4)


@settings(max_examples=30, deadline=None)
@given(cluster_data, cluster_data, times, st.integers(1, 4))
def test_time_reversal(ca, cb, t, k):
    A = BoundaryData.from_clusters(sorted(ca))
    B = BoundaryData.from_clusters(sorted(cb))
    assume(A.n == B.n)
    # near-merging clusters make the Gram matrix ill-conditioned; stay clear of that regime
    assume(all(np.min(np.diff(D.values)) > 0.2 for D in (A, B) if D.p > 1))
    try:
        fwd = exact_linear_statistic(k, A, B, t)
    except DegeneracyError:
        return
    assert exact_linear_statistic(k, B, A, 1 - t) == pytest.approx(fwd, rel=1e-10, abs=1e-12)


def test_mcmc_matches_exact_second_moment(rng, short_chain):
    A = B = BoundaryData.distinct([0.0, 1.0])
    lam, info = sample_km_mcmc(A, B, 0.5, short_chain, rng, return_info=True)
    assert 0.2 < info["acceptance"] < 0.5
    assert np.all(np.diff(lam, axis=1) >= 0)
    assert within(spectral_moment_estimate(lam, 2), exact_linear_statistic(2, A, B, 0.5))


def test_mcmc_scalar_zero_boundary(rng, short_chain):
    Z = BoundaryData((0.0,), (2,))
    lam = sample_km_mcmc(Z, Z, 0.3, short_chain, rng)
    assert within(spectral_moment_estimate(lam, 2), exact_linear_statistic(2, Z, Z, 0.3))


def test_mcmc_ordering_does_not_matter(rng, short_chain):
    # largest eigenvalue statistics agree between boundary data given in either listing order
    pts = [1.0, -0.5, 0.2]
    A1, A2 = BoundaryData.distinct(sorted(pts)), BoundaryData.from_clusters([(p, 1) for p in sorted(pts)])
    B = BoundaryData.distinct([-1.0, 0.0, 1.0])
    m1 = batch_means(sample_km_mcmc(A1, B, 0.5, short_chain, rng)[:, -1])
    m2 = batch_means(sample_km_mcmc(A2, B, 0.5, short_chain, rng)[:, -1])
    assert abs(m1[0] - m2[0]) <= 3 * math.hypot(m1[1], m2[1])
