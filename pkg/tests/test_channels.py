import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussqc import qit
from gaussqc.channels import (
    Ensemble,
    StinespringIsometry,
    apply_channel,
    channel_output,
    coherent_information_channel,
    environment_output,
    holevo_chi,
    isometry_from_kraus,
    standard_channel,
)
from gaussqc.errors import DimensionMismatchError, DomainError

seeds = st.integers(0, 2**32 - 1)
families = st.sampled_from(
    [("identity", {}), ("dephasing", {"p": 0.3}), ("depolarizing", {"p": 0.4}),
     ("amplitude_damping", {"g": 0.2}), ("erasure", {"p": 0.25})]
)


def _kraus_sum(kraus, rho):
    return sum(k @ rho @ k.conj().T for k in kraus)


class TestIsometry:
    def test_identity_kraus(self):
        V = isometry_from_kraus([np.eye(3)])
        assert V.dim_e == 1
        np.testing.assert_array_equal(V.matrix, np.eye(3))

    def test_dephasing_kraus(self):
        p = 0.3
        V = isometry_from_kraus([math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * np.diag([1, -1])])
        assert V.dim_e == 2
        np.testing.assert_allclose(V.matrix.conj().T @ V.matrix, np.eye(2), atol=1e-15)

    def test_matches_kraus_sum(self, rng):
        # random channel from a random isometry, cut into Kraus operators
        W = qit.random_isometry(3 * 4, 3, rng)
        kraus = [W.reshape(3, 4, 3)[:, e, :] for e in range(4)]
        V = isometry_from_kraus(kraus)
        for _ in range(10):
            rho = qit.random_density(3, rng)
            np.testing.assert_allclose(channel_output(V, rho), _kraus_sum(kraus, rho), atol=1e-10)

    def test_rejects_incomplete(self):
        with pytest.raises(DomainError):
            isometry_from_kraus([0.5 * np.eye(2)])

    def test_rejects_shape(self):
        with pytest.raises(DimensionMismatchError):
            StinespringIsometry(np.eye(4), 2, 2, 1)

    def test_input_shape(self):
        V = standard_channel("identity", 2)
        with pytest.raises(DimensionMismatchError):
            channel_output(V, np.eye(3) / 3)


class TestStandardChannels:
    def test_identity(self, rng):
        rho = qit.random_density(4, rng)
        np.testing.assert_allclose(channel_output(standard_channel("identity", 4), rho), rho, atol=1e-15)

    def test_erasure(self, rng):
        p = 0.3
        rho = qit.random_density(3, rng)
        out = channel_output(standard_channel("erasure", 3, p=p), rho)
        want = np.zeros((4, 4), dtype=complex)
        want[:3, :3] = (1 - p) * rho
        want[3, 3] = p
        np.testing.assert_allclose(out, want, atol=1e-14)

    @pytest.mark.parametrize("d", [2, 3])
    def test_depolarizing(self, rng, d):
        V = standard_channel("depolarizing", d, p=0.4)
        np.testing.assert_allclose(channel_output(V, np.eye(d) / d), np.eye(d) / d, atol=1e-14)
        rho = qit.random_density(d, rng)
        np.testing.assert_allclose(channel_output(V, rho), 0.6 * rho + 0.4 * np.eye(d) / d, atol=1e-14)

    def test_dephasing_half_on_plus(self):
        plus = np.full((2, 2), 0.5)
        out = channel_output(standard_channel("dephasing", 2, p=0.5), plus)
        np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-15)

    def test_amplitude_damping_excited(self):
        out = channel_output(standard_channel("amplitude_damping", 2, g=0.3), np.diag([0.0, 1.0]))
        np.testing.assert_allclose(out, np.diag([0.3, 0.7]), atol=1e-15)

    def test_bad_params(self):
        with pytest.raises(DomainError):
            standard_channel("dephasing", 2, p=1.5)
        with pytest.raises(DomainError):
            standard_channel("amplitude_damping", 3, g=0.1)
        with pytest.raises(DomainError):
            standard_channel("teleport", 2)

    @given(seeds, families)
    def test_trace_preserving(self, seed, fam):
        name, params = fam
        V = standard_channel(name, 2, **params)
        rho = qit.random_density(2, np.random.default_rng(seed))
        assert np.trace(channel_output(V, rho)).real == pytest.approx(1.0, abs=1e-10)


class TestEnvironment:
    def test_trivial_environment(self, rng):
        out = environment_output(standard_channel("identity", 3), qit.random_density(3, rng))
        np.testing.assert_allclose(out, [[1.0]], atol=1e-15)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.5])
    def test_dephasing(self, p):
        out = environment_output(standard_channel("dephasing", 2, p=p), np.eye(2) / 2)
        np.testing.assert_allclose(out, np.diag([1 - p, p]), atol=1e-15)

    @given(seeds, families)
    def test_complementarity_for_pure_inputs(self, seed, fam):
        name, params = fam
        V = standard_channel(name, 2, **params)
        rho = qit.ket_to_dm(qit.random_pure_state(2, np.random.default_rng(seed)))
        hb = qit.entropy(channel_output(V, rho))
        he = qit.entropy(environment_output(V, rho))
        assert hb == pytest.approx(he, abs=1e-9)

    def test_environment_entropy_via_purification(self, rng):
        V = standard_channel("depolarizing", 2, p=0.3)
        rho = qit.random_density(2, rng)
        phi = qit.purify(rho)
        # (1 (x) V) on ref (x) A -> ref (x) B (x) E
        joint = (phi.reshape(2, 2) @ V.matrix.T).reshape(-1)
        h_e = qit.entropy(qit.reduced_state(joint, (2, V.dim_b, V.dim_e), [2]))
        assert qit.entropy(environment_output(V, rho)) == pytest.approx(h_e, abs=1e-9)


class TestCoherentInformation:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_identity(self, d):
        val = coherent_information_channel(np.eye(d) / d, standard_channel("identity", d))
        assert val == pytest.approx(math.log2(d), abs=1e-12)

    def test_dephasing(self):
        val = coherent_information_channel(np.eye(2) / 2, standard_channel("dephasing", 2, p=0.1))
        assert val == pytest.approx(0.5310044064107188, abs=1e-12)
        assert val == pytest.approx(1 - qit.binary_entropy(0.1), abs=1e-12)

    def test_erasure(self):
        val = coherent_information_channel(np.eye(2) / 2, standard_channel("erasure", 2, p=0.25))
        assert val == pytest.approx(0.5, abs=1e-12)

    @given(seeds)
    def test_identity_equals_entropy(self, seed):
        rho = qit.random_density(3, np.random.default_rng(seed))
        val = coherent_information_channel(rho, standard_channel("identity", 3))
        assert val == pytest.approx(qit.entropy(rho), abs=1e-9)

    @given(seeds, families)
    def test_matches_purified_state(self, seed, fam):
        name, params = fam
        V = standard_channel(name, 2, **params)
        rho = qit.random_density(2, np.random.default_rng(seed))
        phi = qit.purify(rho)
        joint = (phi.reshape(2, 2) @ V.matrix.T).reshape(-1)
        omega = qit.reduced_state(joint, (2, V.dim_b, V.dim_e), [0, 1])
        ic = qit.coherent_information_state(omega, (2, V.dim_b))
        assert coherent_information_channel(rho, V) == pytest.approx(ic, abs=1e-9)

    def test_tensor_power_additive(self, rng):
        V = standard_channel("amplitude_damping", 2, g=0.2)
        rho = qit.random_density(2, rng)
        one = coherent_information_channel(rho, V)
        two = coherent_information_channel(np.kron(rho, rho), V.tensor_power(2))
        assert two == pytest.approx(2 * one, abs=1e-9)

    def test_tensor_power_output_order(self, rng):
        V = standard_channel("dephasing", 2, p=0.2)
        r1, r2 = qit.random_density(2, rng), qit.random_density(2, rng)
        V2 = V.tensor_power(2)
        out = apply_channel(V2, np.kron(r1, r2))
        np.testing.assert_allclose(out, np.kron(apply_channel(V, r1), apply_channel(V, r2)), atol=1e-14)


class TestHolevo:
    def test_identical_members(self, rng):
        rho = qit.random_density(3, rng)
        assert holevo_chi(Ensemble.uniform([rho] * 4)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_orthogonal_pure(self, d):
        members = [np.diag(np.eye(d)[i]) for i in range(d)]
        assert holevo_chi(Ensemble.uniform(members)) == pytest.approx(math.log2(d), abs=1e-12)

    def test_returns_float(self, rng):
        assert type(holevo_chi(Ensemble.uniform([qit.random_density(2, rng)] * 2))) is float

    @given(seeds)
    def test_concavity_and_unitary_invariance(self, seed):
        r = np.random.default_rng(seed)
        members = [qit.random_density(3, r) for _ in range(3)]
        w = r.dirichlet(np.ones(3))
        ens = Ensemble(w, members)
        chi = holevo_chi(ens)
        assert -1e-12 <= chi <= qit.entropy(ens.average) + 1e-12
        U = qit.random_unitary(3, r)
        rotated = Ensemble(w, [U @ m @ U.conj().T for m in members])
        assert holevo_chi(rotated) == pytest.approx(chi, abs=1e-9)

    def test_bad_weights(self, rng):
        with pytest.raises(DomainError):
            Ensemble([0.5, 0.6], [np.eye(2) / 2] * 2)
