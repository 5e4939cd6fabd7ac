import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from gaussqc import qit
from gaussqc.errors import DomainError
from gaussqc.gaussian import (
    GaussianSampler,
    TailBoundReport,
    TailExperiment,
    empirical_tail,
    fourier_conjugate_family,
    log_lower_bound_check,
    mgf_empirical,
    mgf_reference,
    sample_gaussian_coefficients,
    sample_gaussian_vector,
    tail_bound,
)
from gaussqc.rng import derive_seed, generator


def _quad_form(vectors, M):
    return np.real(np.einsum("nd,de,ne->n", vectors.conj(), M, vectors))


class TestSampler:
    def test_unit_dimension_mean(self):
        c = GaussianSampler(1, seed=3).sample(100_000)
        assert np.mean(np.abs(c) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_expected_norm(self):
        g = GaussianSampler(64, seed=4).sample(10_000)
        assert np.mean(np.sum(np.abs(g) ** 2, axis=1)) == pytest.approx(1.0, rel=0.01)

    def test_covariance(self):
        D = 8
        g = GaussianSampler(D, seed=5).sample(50_000)
        parts = np.concatenate([g.real, g.imag], axis=1)
        cov = np.cov(parts, rowvar=False)
        np.testing.assert_allclose(cov, np.eye(2 * D) / (2 * D), atol=4e-3)

    def test_single_vector(self):
        s = GaussianSampler(5, seed=1)
        assert sample_gaussian_vector(s).shape == (5,)

    def test_determinism(self):
        a = GaussianSampler(16, seed=9, label="x", index=2).sample(10)
        b = GaussianSampler(16, seed=9, label="x", index=2).sample(10)
        c = GaussianSampler(16, seed=9, label="x", index=3).sample(10)
        assert a.tobytes() == b.tobytes()
        assert a.tobytes() != c.tobytes()

    def test_rejects_zero_dim(self):
        with pytest.raises(DomainError):
            GaussianSampler(0)

    def test_unitary_invariance(self, rng):
        D = 6
        M = qit.random_density(D, rng)
        U = qit.random_unitary(D, rng)
        g1 = GaussianSampler(D, seed=11).sample(10_000)
        g2 = GaussianSampler(D, seed=12).sample(10_000)
        res = stats.ks_2samp(_quad_form(g1, M), _quad_form(g2 @ U.T, M))
        assert res.pvalue > 0.01


class TestSeeds:
    @given(st.integers(0, 2**64 - 1), st.text(max_size=8), st.integers(0, 10**6))
    def test_derive_seed_stable(self, master, label, index):
        s = derive_seed(master, label, index)
        assert 0 <= s < 2**64
        assert s == derive_seed(master, label, index)

    def test_streams_differ(self):
        assert derive_seed(0, "a", 0) != derive_seed(0, "a", 1)
        assert derive_seed(0, "a", 0) != derive_seed(0, "b", 0)
        assert derive_seed(0, "a", 0) != derive_seed(1, "a", 0)

    def test_generator_bit_identical(self):
        a = generator(7, "s", 1).standard_normal(100)
        b = generator(7, "s", 1).standard_normal(100)
        assert a.tobytes() == b.tobytes()


class TestFourierConjugate:
    def test_single_vector(self, rng):
        v = sample_gaussian_coefficients(rng, (1, 7), 7)
        np.testing.assert_array_equal(fourier_conjugate_family(v), v)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 9), st.integers(1, 12))
    def test_inverse_and_parseval(self, seed, N, D):
        v = sample_gaussian_coefficients(np.random.default_rng(seed), (N, D), D)
        w = fourier_conjugate_family(v)
        np.testing.assert_allclose(fourier_conjugate_family(w, inverse=True), v, atol=1e-12)
        np.testing.assert_allclose(w.T @ w.conj(), v.T @ v.conj(), atol=1e-12)

    def test_matches_fourier_matrix(self, rng):
        v = sample_gaussian_coefficients(rng, (5, 3), 3)
        np.testing.assert_allclose(fourier_conjugate_family(v), qit.fourier_matrix(5) @ v, atol=1e-14)

    def test_conjugates_are_gaussian(self, rng):
        D, N = 4, 4
        M = qit.random_density(D, rng)
        fresh = sample_gaussian_coefficients(np.random.default_rng(1), (10_000, D), D)
        fam = sample_gaussian_coefficients(np.random.default_rng(2), (2500, N, D), D)
        conj = np.stack([fourier_conjugate_family(f) for f in fam]).reshape(-1, D)
        assert stats.ks_2samp(_quad_form(fresh, M), _quad_form(conj, M)).pvalue > 0.01
        # and a single coordinate's real part
        assert stats.ks_2samp(fresh[:, 0].real, conj[:, 0].real).pvalue > 0.01


class TestTailBound:
    def test_length(self):
        assert tail_bound("length", D=600, epsilon=0.3) == pytest.approx(2 * math.exp(-9), rel=1e-12)
        assert tail_bound("length", D=600, epsilon=0.3) == pytest.approx(2.4682e-4, rel=1e-4)

    def test_trace_a(self):
        assert tail_bound("trA_plus", epsilon=0.25, trace_A=128) == pytest.approx(math.exp(-2), rel=1e-12)
        assert tail_bound("trA_minus", epsilon=0.25, trace_A=128) == pytest.approx(0.1353352832, rel=1e-9)

    def test_projector_sum(self):
        assert tail_bound("projector_sum", epsilon=0.3, r=4, K=100) == pytest.approx(2 * math.exp(-6), rel=1e-12)

    @pytest.mark.parametrize(
        "name,kwargs",
        [
            ("trA_plus", dict(epsilon=0.4, trace_A=10)),
            ("length", dict(D=10, epsilon=1.5)),
            ("bogus", dict(epsilon=0.1)),
        ],
    )
    def test_domain(self, name, kwargs):
        with pytest.raises(DomainError):
            tail_bound(name, **kwargs)

    def test_report_json(self):
        rep = TailBoundReport("length", 0.25, 0.1, 0.0, 1000, 0.005)
        data = json.loads(rep.to_json())
        assert set(data) == {"bound_name", "epsilon", "theoretical", "empirical", "trials", "wilson_upper"}
        assert rep.passed and not rep.vacuous


class TestEmpiricalTail:
    @pytest.mark.parametrize(
        "name,params",
        [
            ("length", {"D": 512, "epsilon": 0.25}),
            ("trA_plus", {"D": 512, "epsilon": 0.25, "rank": 128}),
            ("trA_minus", {"D": 512, "epsilon": 0.25, "rank": 128}),
            ("projector_sum", {"D": 64, "epsilon": 0.3, "r": 4, "K": 100}),
        ],
    )
    def test_dominated(self, name, params):
        rep = empirical_tail(name, params, 20_000, seed=0)
        assert rep.empirical <= rep.theoretical
        assert rep.passed

    def test_minimum_trials(self):
        with pytest.raises(DomainError):
            empirical_tail("length", {"D": 8, "epsilon": 0.5}, 10, 0)

    def test_explicit_operator(self, rng):
        u = qit.random_unitary(16, rng)
        A = (u * np.r_[np.ones(4), np.zeros(12)]) @ u.conj().T
        exp = TailExperiment("trA_plus", {"D": 16, "epsilon": 0.3, "A": A})
        assert exp.trace_A == pytest.approx(4.0)

    def test_vectorised_statistic(self):
        exp = TailExperiment("length", {"D": 32, "epsilon": 0.2})
        stat = exp.statistic(np.random.default_rng(0), trials=20_000)
        assert stat.mean() == pytest.approx(1.0, rel=0.01)


class TestMgf:
    def test_reference(self):
        assert mgf_reference(0.0, 0.7, 5) == 1.0
        assert mgf_reference(10.0, 0.5, 10) == pytest.approx(2.0)
        with pytest.raises(DomainError):
            mgf_reference(20.0, 1.0, 10)

    def test_empirical(self):
        assert mgf_empirical(2.0, 0.5, 4, 100_000, seed=1) == pytest.approx(mgf_reference(2.0, 0.5, 4), rel=0.02)


class TestLogBound:
    def test_scalar_values(self):
        assert math.log(0.75) == pytest.approx(-0.2876820724517809)
        rep = log_lower_bound_check(0.25, [-0.25], [1.0])
        assert rep["min_margin_negative"] == pytest.approx(-0.2876820724517809 + 0.2916666666666667)
        assert rep["min_margin_positive"] == pytest.approx(math.log(2) - 0.5)
        assert rep["holds"]

    def test_equality_at_zero(self):
        rep = log_lower_bound_check(0.5, [0.0], [0.0])
        assert rep["min_margin_negative"] == 0.0 and rep["min_margin_positive"] == 0.0

    @given(st.floats(0.0, 0.99))
    def test_holds_on_grids(self, delta):
        assert log_lower_bound_check(delta)["holds"]
