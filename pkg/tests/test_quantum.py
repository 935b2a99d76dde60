import numpy as np
import pytest
from hypothesis import given

from nmcollide import (
    ChoiMatrix,
    ConfigurationError,
    DensityOperator,
    HermitianOperator,
    KrausChannel,
    ValidationError,
    adc_channel,
    apply_channel,
    choi_of,
    compose,
    kraus_from_choi,
    partial_trace,
    tensor,
    trace_distance,
    unitary_evolution,
)
from nmcollide.quantum import embed_operator, swap_operator

from conftest import density_operators, kraus_channels


def ketbra(dim, i):
    return DensityOperator.basis(dim, i)


class TestDensityOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            DensityOperator(np.array([[0.5, 0.3], [0.1, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValidationError):
            DensityOperator(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValidationError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_immutable(self):
        rho = DensityOperator.maximally_mixed(2)
        with pytest.raises(ValueError):
            rho.data[0, 0] = 2.0


class TestTensorAndPartialTrace:
    def test_basis_product(self):
        joint = tensor(ketbra(2, 0), ketbra(2, 1))
        assert np.allclose(joint.data, np.outer([0, 1, 0, 0], [0, 1, 0, 0]))

    def test_maximally_mixed_product(self):
        joint = tensor(DensityOperator.maximally_mixed(2), DensityOperator.maximally_mixed(2))
        assert np.allclose(joint.data, np.eye(4) / 4)

    def test_basis_marginal(self):
        joint = tensor(ketbra(2, 0), ketbra(2, 1))
        first = partial_trace(joint, [2, 2], {0})
        assert np.allclose(first.data, ketbra(2, 0).data)
        second = partial_trace(joint, [2, 2], {1})
        assert np.allclose(second.data, ketbra(2, 1).data)

    def test_bell_state_marginal(self):
        bell = DensityOperator.from_ket(np.array([1, 0, 0, 1]) / np.sqrt(2))
        reduced = partial_trace(bell, [2, 2], {0})
        assert np.allclose(reduced.data, np.eye(2) / 2, atol=1e-12)

    @given(density_operators(dim=2), density_operators(dim=3))
    def test_product_round_trip(self, a, b):
        joint = tensor(a, b)
        assert np.max(np.abs(partial_trace(joint, [2, 3], {0}).data - a.data)) < 1e-12
        assert np.max(np.abs(partial_trace(joint, [2, 3], {1}).data - b.data)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            partial_trace(DensityOperator.maximally_mixed(4), [2, 3], {0})


class TestChannels:
    def test_identity_channel(self):
        rho = DensityOperator(np.array([[0.25, 0.1j], [-0.1j, 0.75]]))
        out = apply_channel(KrausChannel.identity(2), rho)
        assert np.allclose(out.data, rho.data)

    def test_full_swap_moves_excitation(self):
        from nmcollide import partial_swap_channel

        sw = partial_swap_channel(2, 1.0)
        rho = tensor(ketbra(2, 0), ketbra(2, 1))
        out = apply_channel(sw, rho)
        assert np.allclose(out.data, tensor(ketbra(2, 1), ketbra(2, 0)).data)

    def test_adc_at_zero_kills_everything(self):
        ch = adc_channel(0.0)
        rho = DensityOperator(np.array([[0.3, 0.2], [0.2, 0.7]]))
        out = apply_channel(ch, rho)
        assert np.allclose(out.data, ketbra(2, 0).data, atol=1e-12)

    def test_incomplete_kraus_rejected(self):
        with pytest.raises(ValidationError):
            KrausChannel((np.diag([1.0, 0.5]),), dim_in=2, dim_out=2)

    @given(kraus_channels(dim=2, n_ops=3), density_operators(dim=2))
    def test_channel_output_is_valid_state(self, ch, rho):
        out = apply_channel(ch, rho)  # construction re-validates all invariants
        assert abs(np.trace(out.data) - 1.0) < 1e-12

    @given(kraus_channels(dim=2), kraus_channels(dim=2))
    def test_composition_choi_consistency(self, a, b):
        composed = compose(a, b)
        direct = choi_of(composed).data
        # same Choi from multiplying superoperator representations
        from nmcollide.continuum import choi_from_superop, kraus_to_superop

        via_superop = choi_from_superop(kraus_to_superop(a) @ kraus_to_superop(b), 2).data
        assert np.max(np.abs(direct - via_superop)) < 1e-10


class TestChoi:
    def test_identity_choi_spectrum(self):
        choi = choi_of(KrausChannel.identity(2))
        evals = np.sort(np.linalg.eigvalsh(choi.data))
        assert np.allclose(evals, [0, 0, 0, 2], atol=1e-12)

    def test_depolarizing_choi(self):
        paulis = [
            np.eye(2),
            np.array([[0, 1], [1, 0]]),
            np.array([[0, -1j], [1j, 0]]),
            np.diag([1, -1]),
        ]
        ch = KrausChannel.from_operators([0.5 * p for p in paulis])
        choi = choi_of(ch)
        assert np.allclose(choi.data, np.eye(4) / 2, atol=1e-12)
        assert abs(choi.trace() - 2.0) < 1e-10

    def test_adc_family_is_cp(self):
        for eta in np.linspace(0.0, 1.0, 21):
            assert choi_of(adc_channel(eta)).min_eigenvalue() >= -1e-12

    @given(kraus_channels(dim=2, n_ops=3))
    def test_kraus_choi_round_trip(self, ch):
        rebuilt = kraus_from_choi(choi_of(ch))
        rho = DensityOperator(np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, 0.7]]))
        a = apply_channel(ch, rho)
        b = apply_channel(rebuilt, rho)
        assert trace_distance(a, b) < 1e-10

    def test_choi_requires_hermitian(self):
        with pytest.raises(ValidationError):
            ChoiMatrix(np.triu(np.ones((4, 4))), dim=2)


class TestTraceDistance:
    def test_identical_states(self):
        rho = DensityOperator.maximally_mixed(2)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_states(self):
        assert abs(trace_distance(ketbra(2, 0), ketbra(2, 1)) - 1.0) < 1e-12

    def test_pure_vs_mixed(self):
        d = trace_distance(ketbra(2, 0), DensityOperator.maximally_mixed(2))
        assert abs(d - 0.5) < 1e-12

    @given(density_operators(), density_operators())
    def test_symmetry_and_range(self, a, b):
        d = trace_distance(a, b)
        assert 0.0 <= d <= 1.0 + 1e-12
        assert abs(d - trace_distance(b, a)) < 1e-12


class TestOperators:
    def test_unitary_evolution_matches_expm(self):
        import scipy.linalg

        h = HermitianOperator(np.array([[1.0, 0.5 - 0.25j], [0.5 + 0.25j, -0.5]]))
        u = unitary_evolution(h, 0.7)
        assert np.max(np.abs(u - scipy.linalg.expm(-1j * 0.7 * h.data))) < 1e-12

    def test_hermitian_rejects_asymmetric(self):
        with pytest.raises(ValidationError):
            HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_embed_operator_on_second_slot(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        full = embed_operator(sx, [2, 2], [1])
        assert np.allclose(full, np.kron(np.eye(2), sx))

    def test_embed_operator_slot_order(self):
        # swap acting on slots (1, 0) equals swap on (0, 1); a two-site CNOT-like
        # asymmetric operator distinguishes orderings
        cnot = np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
        a = embed_operator(cnot, [2, 2], [0, 1])
        assert np.allclose(a, cnot)
        b = embed_operator(cnot, [2, 2], [1, 0])
        # control on slot 1, target slot 0
        expect = np.zeros((4, 4), dtype=complex)
        for c in range(2):
            for t in range(2):
                src = t * 2 + c
                out_t = t ^ c
                expect[out_t * 2 + c, src] = 1.0
        assert np.allclose(b, expect)

    def test_swap_operator(self):
        s = swap_operator(3)
        v = np.kron(np.arange(3), np.ones(3)) + 1j * np.kron(np.ones(3), np.arange(3))
        swapped = s @ v
        expect = np.kron(np.ones(3), np.arange(3)) + 1j * np.kron(np.arange(3), np.ones(3))
        assert np.allclose(swapped, expect)

    def test_tensor_requires_same_kind(self):
        with pytest.raises(ConfigurationError):
            tensor(DensityOperator.maximally_mixed(2), HermitianOperator(np.eye(2)))
