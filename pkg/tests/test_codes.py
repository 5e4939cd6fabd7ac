import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from gaussqc import qit
from gaussqc.codes import (
    SubspaceCode,
    build_random_code,
    code_diagnostics,
    code_from_basis,
    conjugate_consistency,
    encoder_isometry,
    frame_operator,
    gram_matrix,
    measured_parameters,
    orthonormality_residual,
    rank_one_trace_distance,
)
from gaussqc.errors import DegenerateCodeError, DomainError

seeds = st.integers(0, 2**32 - 1)


class _ConstantNormals:
    """Stand-in generator whose draws are all equal, forcing a rank-one Gamma."""

    def standard_normal(self, shape):
        return np.ones(shape)


def _flat(d):
    return np.eye(d) / d


class TestConstruction:
    def test_single_vector_is_normalised_gamma(self):
        code = build_random_code(_flat(8), 1, seed=5)
        g = code.gamma[0]
        np.testing.assert_allclose(code.phi[0], g / np.linalg.norm(g), atol=1e-12)

    def test_frame_is_projector(self):
        code = build_random_code(_flat(32), 8, seed=1)
        w = np.linalg.eigvalsh(frame_operator(code.phi))
        np.testing.assert_allclose(w[-8:], 1.0, atol=1e-9)
        np.testing.assert_allclose(w[:-8], 0.0, atol=1e-9)

    def test_haar_subspace(self, rng):
        d, N = 6, 2
        M = qit.random_density(d, rng)
        ours = [np.trace(frame_operator(build_random_code(_flat(d), N, seed=s).phi) @ M).real for s in range(1000)]
        haar = []
        for _ in range(1000):
            v = qit.random_isometry(d, N, rng)
            haar.append(np.trace(v.conj().T @ M @ v).real)
        assert stats.ks_2samp(ours, haar).pvalue > 0.01

    def test_rank_check(self):
        with pytest.raises(DomainError):
            build_random_code(np.diag([0.5, 0.5, 0.0]), 3, seed=0)

    def test_degenerate_is_reported(self):
        with pytest.raises(DegenerateCodeError) as info:
            build_random_code(_flat(4), 3, seed=17, generator=_ConstantNormals())
        assert info.value.seed == 17

    def test_deterministic(self):
        a = build_random_code(_flat(16), 4, seed=3)
        b = build_random_code(_flat(16), 4, seed=3)
        assert a.phi.tobytes() == b.phi.tobytes()

    def test_json_round_trip(self):
        code = build_random_code(np.diag([0.1, 0.2, 0.3, 0.4]), 2, seed=8)
        back = SubspaceCode.from_json(code.to_json())
        np.testing.assert_array_equal(back.phi, code.phi)
        np.testing.assert_allclose(back.Gamma, code.Gamma, atol=1e-15)
        assert back.seed == 8

    @given(seeds, st.integers(1, 6))
    def test_orthonormal_and_parseval(self, seed, N):
        r = np.random.default_rng(seed)
        rho = qit.random_density(8, r)
        code = build_random_code(rho, N, seed)
        assert orthonormality_residual(code.phi) <= 1e-8
        assert np.max(np.abs(frame_operator(code.phi) - frame_operator(code.phi_hat))) <= 1e-10
        overlaps = np.einsum("jd,jd->j", code.phi.conj(), code.gamma)
        assert np.all(overlaps.real >= -1e-12)
        np.testing.assert_allclose(overlaps.imag, 0.0, atol=1e-12)


class TestGram:
    def test_single(self):
        code = build_random_code(_flat(5), 1, seed=2)
        np.testing.assert_allclose(gram_matrix(code), [[np.vdot(code.gamma[0], code.gamma[0])]])

    @given(seeds)
    def test_isospectral_with_frame(self, seed):
        code = build_random_code(_flat(10), 4, seed)
        s = np.linalg.eigvalsh(gram_matrix(code))
        g = np.linalg.eigvalsh(code.Gamma)[-4:]
        np.testing.assert_allclose(s, g, atol=1e-10)

    def test_mean_diagonal(self):
        diag = [np.real(np.diag(gram_matrix(build_random_code(_flat(16), 4, seed=s)))).mean() for s in range(1000)]
        assert np.mean(diag) == pytest.approx(1.0, rel=0.02)

    def test_length_concentration(self):
        d, N, eps = 64, 4, 0.5
        limit = 2 * N * math.exp(-d * eps**2 / 4)
        bad = 0
        for s in range(2000):
            lengths = np.real(np.diag(gram_matrix(build_random_code(_flat(d), N, seed=s))))
            bad += bool(np.any(np.abs(lengths - 1) > eps))
        assert limit < 1
        assert bad / 2000 <= limit


class TestDiagnostics:
    def test_orthonormal_gamma(self, rng):
        code = code_from_basis(qit.random_isometry(9, 3, rng).T)
        diag = code_diagnostics(code, 0.0, 0.0)
        assert diag.perturbation_avg == pytest.approx(0.0, abs=1e-7)
        assert diag.bound_holds

    @given(seeds)
    def test_overlap_identity_and_sqrt_trick(self, seed):
        code = build_random_code(_flat(48), 6, seed)
        eps, eta = measured_parameters(code)
        diag = code_diagnostics(code, min(eps, 1 / 3), eta)
        assert diag.overlap_deficit == pytest.approx(diag.trace_sqrt_deficit, abs=1e-10)
        assert diag.trace_sqrt_deficit <= diag.sqrt_trick_value + 1e-10

    def test_chain(self):
        code = build_random_code(_flat(256), 8, seed=4)
        eps, eta = measured_parameters(code)
        diag = code_diagnostics(code, eps, eta)
        assert diag.applicable
        assert diag.perturbation_avg <= diag.chain_upper1 + 1e-12
        assert diag.bound_holds and not diag.violation

    def test_epsilon_domain(self):
        code = build_random_code(_flat(8), 2, seed=0)
        with pytest.raises(DomainError):
            code_diagnostics(code, 0.5, 0.1)

    def test_measured_parameters_make_hypotheses_hold(self):
        code = build_random_code(_flat(64), 4, seed=6)
        eps, eta = measured_parameters(code)
        if eps <= 1 / 3:
            diag = code_diagnostics(code, eps, eta)
            assert diag.length_ok and diag.cross_ok

    @given(seeds)
    def test_rank_one_closed_form(self, seed):
        r = np.random.default_rng(seed)
        a = r.standard_normal(5) + 1j * r.standard_normal(5)
        b = r.standard_normal(5) + 1j * r.standard_normal(5)
        want = qit.trace_distance(qit.ket_to_dm(a), qit.ket_to_dm(b))
        assert rank_one_trace_distance(a, b) == pytest.approx(want, abs=1e-9)


class TestConjugates:
    def test_single(self):
        code = build_random_code(_flat(4), 1, seed=1)
        np.testing.assert_allclose(code.phi_hat, code.phi, atol=1e-15)

    def test_consistency(self):
        rep = conjugate_consistency(build_random_code(_flat(64), 16, seed=2))
        assert rep["ok"]

    def test_consistency_distorted(self, rng):
        rep = conjugate_consistency(build_random_code(qit.random_density(12, rng), 5, seed=2))
        assert rep["ok"]

    def test_same_distribution(self, rng):
        d, N = 8, 4
        M = qit.random_density(d, rng)
        a, b = [], []
        for s in range(1000):
            code = build_random_code(_flat(d), N, seed=s)
            a.append(np.vdot(code.phi[0], M @ code.phi[0]).real)
            b.append(np.vdot(code.phi_hat[0], M @ code.phi_hat[0]).real)
        assert stats.ks_2samp(a, b).pvalue > 0.01


class TestEncoder:
    def test_columns_and_projector(self):
        code = build_random_code(_flat(12), 4, seed=3)
        U = encoder_isometry(code)
        np.testing.assert_array_equal(U[:, 2], code.phi[2])
        np.testing.assert_allclose(U @ U.conj().T, frame_operator(code.phi), atol=1e-9)

    def test_fourier_composition(self):
        code = build_random_code(_flat(12), 5, seed=3)
        UF = encoder_isometry(code) @ qit.fourier_matrix(5)
        np.testing.assert_allclose(UF.T, code.phi_hat, atol=1e-12)
