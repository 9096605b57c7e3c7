import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from parcelqm.errors import RankDeficiencyError
from parcelqm.operators import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_density_matrix,
    as_hermitian,
    bloch_from_qubit,
    complete_hermitian_basis,
    gram_schmidt,
    hs_inner,
    operator_sqrt,
    pauli_product_basis,
    pauli_string_operator,
    pure_state,
    qubit_from_bloch,
    trace_distance,
)

from conftest import random_hermitian, random_psd


def gram_matrix(basis):
    return np.array([[hs_inner(a, b) for b in basis.ops] for a in basis.ops])


class TestHSInner:
    def test_pauli_z_squared(self):
        assert hs_inner(PAULI_Z, PAULI_Z) == pytest.approx(2.0)

    def test_pauli_orthogonality(self):
        assert hs_inner(PAULI_X, PAULI_Z) == pytest.approx(0.0, abs=1e-15)

    def test_matches_frobenius_sum(self, rng):
        a = random_hermitian(rng, 3)
        # independent double loop over |entries|^2
        expected = sum(abs(a[i, j]) ** 2 for i in range(3) for j in range(3))
        assert hs_inner(a, a) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            hs_inner(PAULI_X, np.eye(3))


class TestGramSchmidt:
    def test_normalizes_single(self):
        basis = gram_schmidt([PAULI_Z])
        np.testing.assert_allclose(basis.ops[0], PAULI_Z / np.sqrt(2), atol=1e-12)

    def test_hand_example(self):
        basis = gram_schmidt([PAULI_Z, PAULI_Z + PAULI_X])
        np.testing.assert_allclose(basis.ops[0], PAULI_Z / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(basis.ops[1], PAULI_X / np.sqrt(2), atol=1e-12)

    def test_rank_deficiency(self):
        with pytest.raises(RankDeficiencyError):
            gram_schmidt([PAULI_I, PAULI_I])

    def test_random_family_orthonormal(self, rng):
        ops = [random_hermitian(rng, 4) for _ in range(7)]
        basis = gram_schmidt(ops)
        np.testing.assert_allclose(gram_matrix(basis), np.eye(7), atol=1e-10)


class TestPauliProductBasis:
    def test_single_qubit(self):
        basis = pauli_product_basis(1)
        assert basis.size == 3
        assert basis.labels == ("X", "Y", "Z")
        np.testing.assert_allclose(basis.ops[2], PAULI_Z / np.sqrt(2), atol=1e-15)

    def test_two_qubits_has_fifteen(self):
        basis = pauli_product_basis(2)
        assert basis.size == 15
        assert basis.scale == pytest.approx(2.0)
        assert "II" not in basis.labels

    def test_two_qubit_normalization(self):
        basis = pauli_product_basis(2)
        for op in basis.ops:
            assert hs_inner(op, op) == pytest.approx(1.0, abs=1e-12)

    def test_gram_identity(self):
        basis = pauli_product_basis(2)
        np.testing.assert_allclose(gram_matrix(basis), np.eye(15), atol=1e-10)


class TestCompleteHermitianBasis:
    def test_dim2_size(self):
        assert complete_hermitian_basis(2).size == 4

    def test_dim3_structure(self):
        basis = complete_hermitian_basis(3)
        assert basis.size == 9
        assert sum(1 for l in basis.labels if l.startswith("proj")) == 3
        assert sum(1 for l in basis.labels if l.startswith("sym")) == 3
        assert sum(1 for l in basis.labels if l.startswith("asym")) == 3

    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_reconstructs_arbitrary_hermitian(self, rng, dim):
        basis = complete_hermitian_basis(dim)
        for _ in range(50 if dim == 2 else 10):
            a = random_hermitian(rng, dim)
            coeffs = basis.coords(a)
            rebuilt = np.tensordot(coeffs, basis.ops, axes=1)
            np.testing.assert_allclose(rebuilt, a, atol=1e-9)

    def test_gram_identity(self):
        basis = complete_hermitian_basis(3)
        np.testing.assert_allclose(gram_matrix(basis), np.eye(9), atol=1e-10)


class TestOperatorSqrt:
    def test_identity(self):
        np.testing.assert_allclose(operator_sqrt(np.eye(2)), np.eye(2), atol=1e-12)

    def test_diagonal(self):
        e = np.diag([0.95, 0.05]).astype(complex)
        np.testing.assert_allclose(operator_sqrt(e), np.diag(np.sqrt([0.95, 0.05])), atol=1e-12)

    def test_projector_mixture(self):
        e = 0.9 * pure_state([1, 1]) + 0.05 * np.eye(2)
        r = operator_sqrt(e)
        np.testing.assert_allclose(r @ r, e, atol=1e-9)

    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="not PSD"):
            operator_sqrt(np.diag([1.0, -0.5]))

    @pytest.mark.parametrize("dim", [2, 3, 5, 8])
    def test_random_psd_roundtrip(self, rng, dim):
        for _ in range(25):
            e = random_psd(rng, dim)
            r = operator_sqrt(e)
            assert np.linalg.norm(r @ r - e) < 1e-9 * max(1.0, np.linalg.norm(e))
            assert np.linalg.eigvalsh(r)[0] >= -1e-10


class TestBloch:
    def test_computational_state(self):
        assert bloch_from_qubit(pure_state([1, 0])) == pytest.approx((0, 0, 1))

    def test_maximally_mixed(self):
        assert bloch_from_qubit(np.eye(2) / 2) == pytest.approx((0, 0, 0), abs=1e-15)

    def test_superposition(self):
        psi = [np.sqrt(0.8), np.sqrt(0.2)]
        x, y, z = bloch_from_qubit(pure_state(psi))
        assert (x, y, z) == pytest.approx((0.8, 0.0, 0.6), abs=1e-12)

    def test_outside_ball_rejected(self):
        with pytest.raises(ValueError, match="unit ball"):
            qubit_from_bloch(0.8, 0.8, 0.8)

    @seed(7)
    @settings(max_examples=200, deadline=None)
    @given(
        u=st.floats(0, 1), v=st.floats(0, 1),
        r=st.floats(0, 1),
    )
    def test_roundtrip_on_ball(self, u, v, r):
        theta = np.arccos(2 * u - 1)
        phi = 2 * np.pi * v
        x = r * np.sin(theta) * np.cos(phi)
        y = r * np.sin(theta) * np.sin(phi)
        z = r * np.cos(theta)
        assert bloch_from_qubit(qubit_from_bloch(x, y, z)) == pytest.approx((x, y, z), abs=1e-12)


class TestIngestion:
    def test_symmetrization_warns(self):
        mat = np.array([[1.0, 0.1], [0.0, 0.0]])
        with pytest.warns(UserWarning, match="Hermiticity"):
            out = as_hermitian(mat)
        assert np.allclose(out, out.conj().T)

    def test_density_trace_enforced(self):
        with pytest.raises(ValueError, match="trace"):
            as_density_matrix(np.eye(2))

    def test_density_clips_tiny_negatives(self):
        rho = np.diag([1.0 + 5e-11, -5e-11]).astype(complex)
        out = as_density_matrix(rho)
        assert np.linalg.eigvalsh(out)[0] >= 0.0

    def test_trace_distance_orthogonal_pures(self):
        assert trace_distance(pure_state([1, 0]), pure_state([0, 1])) == pytest.approx(1.0)

    def test_pauli_string(self):
        op = pauli_string_operator("XZ")
        np.testing.assert_allclose(op, np.kron(PAULI_X, PAULI_Z), atol=1e-15)
