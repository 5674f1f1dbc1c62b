import math

import numpy as np
import pytest
from scipy import stats

from rmtkernels.errors import DomainError, EmptyBatchError
from rmtkernels.finite import ProductEnsemble
from rmtkernels.macroscopic import ScalingRegime, WishartParams, mp_cdf
from rmtkernels.sampling import (
    RngState,
    SampleBatch,
    empirical_stats,
    hermitian_eigs,
    inverse_iteration,
    ks_distance,
    product_eigs,
    sample_ginibre,
    wishart_eigs,
    worker_count,
)


def random_unitary(n, seed):
    z = sample_ginibre(n, n, RngState(seed))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestRng:
    def test_deterministic(self):
        a = RngState(42).uniform(100)
        b = RngState(42).uniform(100)
        assert np.array_equal(a, b)

    def test_streams_and_seeds_differ(self):
        base = RngState(42).uniform(50)
        assert not np.array_equal(base, RngState(42, stream=1).uniform(50))
        assert not np.array_equal(base, RngState(43).uniform(50))
        assert not np.array_equal(base, RngState("42x").uniform(50))

    def test_string_and_int_seed_agree(self):
        assert np.array_equal(RngState(7).uniform(5), RngState("7").uniform(5))

    def test_spawn_is_pure(self):
        rng = RngState(3)
        rng.uniform(10)
        assert np.array_equal(rng.spawn(4).uniform(8), RngState(3).spawn(4).uniform(8))
        assert rng.spawn(0).stream != rng.spawn(1).stream

    def test_record(self):
        rec = RngState(9, stream=2).record()
        assert rec["seed"] == "9" and rec["stream"] == 2 and len(rec["digest"]) == 64

    def test_stream_range(self):
        with pytest.raises(DomainError):
            RngState(1, stream=-1)

    def test_uniform_range(self):
        u = RngState(0).uniform(10_000)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert stats.kstest(u, "uniform").pvalue > 1e-4

    def test_box_muller_moments(self):
        x, y = RngState(11).normal_pairs(50_000)
        z = np.concatenate([x, y])
        assert abs(z.mean()) < 0.02
        assert z.var() == pytest.approx(1.0, abs=0.02)
        assert abs(np.corrcoef(x, y)[0, 1]) < 0.02
        assert stats.kstest(z, "norm").pvalue > 1e-4


class TestGinibre:
    def test_moments(self):
        x = sample_ginibre(200, 500, RngState(1)).ravel()
        assert abs(x.real.mean()) < 0.02 and abs(x.imag.mean()) < 0.02
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.02)
        assert x.real.var() == pytest.approx(0.5, abs=0.02)

    def test_deterministic(self):
        assert np.array_equal(sample_ginibre(4, 6, RngState(5)), sample_ginibre(4, 6, RngState(5)))

    @pytest.mark.parametrize("rows,cols", [(0, 3), (3, 0), (10**4, 10**4)])
    def test_shape_limits(self, rows, cols):
        with pytest.raises(DomainError):
            sample_ginibre(rows, cols, RngState(0))


class TestEigensolver:
    def test_identity(self, backend):
        assert np.allclose(hermitian_eigs(np.eye(6), backend=backend), 1.0, atol=1e-15)

    def test_conjugated_diagonal(self, backend):
        u = random_unitary(3, 8)
        a = u @ np.diag([3.0, 1.0, 2.0]) @ u.conj().T
        a = 0.5 * (a + a.conj().T)
        assert np.allclose(hermitian_eigs(a, backend=backend), [1.0, 2.0, 3.0], atol=1e-10, rtol=0)

    def test_two_by_two_closed_form(self, backend):
        a, d, b = 1.3, -0.4, 0.7 - 1.1j
        m = np.array([[a, b], [np.conj(b), d]])
        disc = math.sqrt(((a - d) / 2) ** 2 + abs(b) ** 2)
        expected = [(a + d) / 2 - disc, (a + d) / 2 + disc]
        assert np.allclose(hermitian_eigs(m, backend=backend), expected, atol=1e-12, rtol=0)

    @pytest.mark.parametrize("n", [1, 5, 50, 120])
    def test_against_numpy(self, backend, n):
        x = sample_ginibre(n, n + 3, RngState(n))
        g = x @ x.conj().T
        ref = np.linalg.eigvalsh(g)
        assert np.max(np.abs(hermitian_eigs(g, backend=backend) - ref)) <= 1e-10 * np.max(np.abs(ref))

    def test_degenerate_spectrum(self, backend):
        u = random_unitary(8, 2)
        lam = np.array([1, 1, 1, 2, 2, 5, 5, 5], dtype=float)
        a = u @ np.diag(lam) @ u.conj().T
        assert np.allclose(hermitian_eigs(0.5 * (a + a.conj().T), backend=backend), lam, atol=1e-12)

    def test_backward_error(self, backend):
        x = sample_ginibre(40, 60, RngState(4))
        g = x @ x.conj().T
        vals = hermitian_eigs(g, backend=backend)
        norm = np.linalg.norm(g, 2)
        for i in (0, 17, 39):
            v = inverse_iteration(g, vals[i])
            assert np.linalg.norm(g @ v - vals[i] * v) <= 1e-10 * norm

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            hermitian_eigs(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(DomainError):
            hermitian_eigs(np.ones((2, 3)))


class TestWishartSamples:
    def test_shape_order_and_sign(self):
        batch = wishart_eigs(WishartParams(6, 9), 20, RngState(1))
        assert batch.realizations.shape == (20, 6) and batch.count == 20
        assert np.all(np.diff(batch.realizations, axis=1) >= 0)
        assert np.all(batch.realizations >= 0)

    def test_trace_identity(self):
        params = WishartParams(8, 12)
        rng = RngState(5)
        batch = wishart_eigs(params, 5, rng)
        for i, row in enumerate(batch.realizations):
            x = sample_ginibre(8, 12, RngState(5).spawn(i))
            assert row.sum() == pytest.approx(np.linalg.norm(x) ** 2, rel=1e-8)

    def test_scalar_case_is_exponential(self):
        batch = wishart_eigs(WishartParams(1, 1), 10_000, RngState(2))
        lam = batch.realizations.ravel()
        assert lam.mean() == pytest.approx(1.0, abs=0.05)
        assert stats.kstest(lam, "expon").statistic < 0.02

    def test_reproducible(self):
        a = wishart_eigs(WishartParams(5, 10), 30, RngState("x"))
        b = wishart_eigs(WishartParams(5, 10), 30, RngState("x"))
        assert np.array_equal(a.realizations, b.realizations)
        assert a.seed == b.seed

    def test_thread_count_invariance(self, monkeypatch):
        monkeypatch.setenv("RMT_THREADS", "1")
        a = wishart_eigs(WishartParams(10, 15), 24, RngState(3)).realizations
        monkeypatch.setenv("RMT_THREADS", "4")
        assert worker_count(24) == 4
        b = wishart_eigs(WishartParams(10, 15), 24, RngState(3)).realizations
        assert np.array_equal(a, b)

    def test_backends_agree(self):
        from rmtkernels import _backend

        runs = [wishart_eigs(WishartParams(12, 20), 4, RngState(6), backend=b).realizations for b in _backend.available()]
        for r in runs[1:]:
            assert np.allclose(r, runs[0], rtol=1e-12, atol=1e-10)

    def test_limits(self):
        with pytest.raises(DomainError):
            wishart_eigs(WishartParams(501, 600), 1, RngState(0))
        with pytest.raises(DomainError):
            wishart_eigs(WishartParams(3, 4), 0, RngState(0))

    def test_ks_decreases_with_size(self):
        dist = []
        for N in (25, 50, 100):
            params = WishartParams(N, 2 * N)
            batch = wishart_eigs(params, 100, RngState(11))
            dist.append(ks_distance(batch.pooled() / params.T, lambda x: mp_cdf(0.5, x)))
        assert dist[0] > dist[1] > dist[2]
        assert 0.25 <= dist[2] / dist[1] <= 1.0


class TestProductSamples:
    def test_single_factor_matches_wishart(self):
        prod = product_eigs(ProductEnsemble(10, (5,)), 500, RngState(1)).pooled()
        wish = wishart_eigs(WishartParams(10, 15), 500, RngState(2)).pooled()
        assert stats.ks_2samp(prod, wish).statistic <= 0.03

    def test_count_and_positivity(self):
        batch = product_eigs(ProductEnsemble(7, (1, 2, 0)), 15, RngState(4))
        assert batch.realizations.shape == (15, 7)
        assert np.all(batch.realizations >= 0) and np.all(batch.realizations.sum(axis=1) > 0)

    def test_determinant_identity(self):
        rng = RngState(9)
        batch = product_eigs(ProductEnsemble(5, (0, 0)), 3, rng)
        for i, row in enumerate(batch.realizations):
            r = RngState(9).spawn(i)
            y = sample_ginibre(5, 5, r) @ sample_ginibre(5, 5, r)
            assert np.prod(row) == pytest.approx(abs(np.linalg.det(y)) ** 2, rel=1e-6)

    def test_first_moment(self):
        # E tr(Y Y^dagger) = N prod_k (N + nu_k)
        spec = ProductEnsemble(4, (1, 2))
        batch = product_eigs(spec, 4000, RngState(10))
        assert batch.realizations.sum(axis=1).mean() == pytest.approx(4 * 5 * 6, rel=0.03)

    def test_limits(self):
        with pytest.raises(DomainError):
            product_eigs(ProductEnsemble(301, (1,)), 1, RngState(0))
        with pytest.raises(DomainError):
            product_eigs(ProductEnsemble(3, (1, 1, 1, 1, 1)), 1, RngState(0))


class TestStatistics:
    def test_histogram_normalized(self):
        batch = wishart_eigs(WishartParams(20, 40), 50, RngState(1))
        st = empirical_stats(batch, bins=30)
        assert np.sum(st.density * np.diff(st.edges)) == pytest.approx(1.0, abs=1e-12)
        assert st.minimum == batch.realizations.min() and st.maximum == batch.realizations.max()
        assert st.mean == pytest.approx(batch.realizations.mean(), rel=1e-14)
        assert np.array_equal(st.smallest, batch.realizations[:, 0])

    def test_hard_edge_scale(self):
        params = WishartParams(40, 40)
        batch = wishart_eigs(params, 200, RngState(2))
        st = empirical_stats(batch, bins=20, scaling=ScalingRegime.hard())
        # square case: P(lambda_min > t) = exp(-N t) exactly, so s = lambda N is unit exponential
        assert st.smallest.mean() == pytest.approx(1.0, rel=0.2)
        assert stats.kstest(st.smallest, "expon").pvalue > 1e-3

    def test_rescaling_needs_wishart(self):
        batch = product_eigs(ProductEnsemble(3, (1,)), 2, RngState(0))
        with pytest.raises(DomainError):
            empirical_stats(batch, scaling=ScalingRegime.hard())

    def test_errors(self):
        batch = wishart_eigs(WishartParams(3, 4), 2, RngState(0))
        with pytest.raises(DomainError):
            empirical_stats(batch, bins=9)
        empty = SampleBatch(batch.spec, np.empty((0, 3)))
        with pytest.raises(EmptyBatchError):
            empirical_stats(empty)


class TestKsDistance:
    def test_model_samples(self):
        x = np.sort(stats.norm.ppf(RngState(3).uniform(10_000)))
        assert ks_distance(x, stats.norm.cdf) <= 0.02

    def test_single_sample_at_median(self):
        assert ks_distance([0.0], stats.norm.cdf) == pytest.approx(0.5, abs=1e-15)

    def test_zero_cdf(self):
        assert ks_distance([1.0, 2.0, 3.0], lambda x: np.zeros_like(x)) == 1.0

    def test_matches_scipy(self):
        x = np.sort(RngState(4).uniform(300) * 2 - 1)
        assert ks_distance(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-15)

    def test_errors(self):
        with pytest.raises(EmptyBatchError):
            ks_distance([], stats.norm.cdf)
        with pytest.raises(DomainError):
            ks_distance([2.0, 1.0], stats.norm.cdf)
