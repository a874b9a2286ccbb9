import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from core.exceptions import InvalidDensityMatrix, NegativeEigenvalue, NonHermitianInput
from core.linalg import (
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    Subsystem,
    binary_entropy,
    entropy_of_spectrum,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    von_neumann_entropy,
)


class TestKron:
    def test_index_layout(self):
        m = kron(SIGMA_X, SIGMA_Z)
        assert m.shape == (4, 4)
        assert_allclose(m[0, 2], 1.0)
        assert_allclose(m[1, 3], -1.0)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            kron(np.eye(3), SIGMA_X)

    def test_matches_numpy_kron(self):
        rng = np.random.default_rng(2)
        a, b = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2))
        assert_allclose(kron(a, b), np.kron(a, b))

    def test_bilinear(self):
        rng = np.random.default_rng(4)
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        assert_allclose(kron(a + 2.5 * b, c), kron(a, c) + 2.5 * kron(b, c), atol=1e-12)
        assert_allclose(kron(c, a - 1j * b), kron(c, a) - 1j * kron(c, b), atol=1e-12)

    def test_trace_factorizes(self):
        rng = np.random.default_rng(6)
        a, b = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2))
        assert_allclose(np.trace(kron(a, b)), np.trace(a) * np.trace(b), atol=1e-12)


class TestPartialTrace:
    def test_bell_marginals_are_mixed(self):
        rho = DensityMatrix.werner(1.0)
        for side in (Subsystem.M, Subsystem.N):
            assert_allclose(partial_trace(rho, side), np.eye(2) / 2, atol=1e-12)

    def test_product_state(self):
        a = np.diag([0.3, 0.7]).astype(complex)
        b = np.diag([0.9, 0.1]).astype(complex)
        rho = np.kron(a, b)
        assert_allclose(partial_trace(rho, Subsystem.M), a, atol=1e-12)
        assert_allclose(partial_trace(rho, Subsystem.N), b, atol=1e-12)


class TestEntropy:
    def test_maximally_mixed(self):
        assert_allclose(von_neumann_entropy(DensityMatrix.maximally_mixed()), 2.0, atol=1e-12)

    def test_pure(self):
        assert_allclose(von_neumann_entropy(DensityMatrix.werner(1.0)), 0.0, atol=1e-12)

    def test_unitary_invariance(self, random_x_states):
        for k, rho in enumerate(random_x_states(5, seed=9)):
            u = unitary_group.rvs(4, random_state=k)
            rotated = u @ rho.data @ u.conj().T
            assert_allclose(von_neumann_entropy(rotated), von_neumann_entropy(rho), atol=1e-10)

    def test_roundoff_negatives_count_as_zero(self):
        assert_allclose(entropy_of_spectrum(np.array([-1e-10, 0.5, 0.5])), 1.0)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NegativeEigenvalue):
            entropy_of_spectrum(np.array([-1e-3, 0.5, 0.501]))

    def test_binary_entropy(self):
        assert_allclose(binary_entropy(0.5), 1.0)
        assert_allclose(binary_entropy(np.array([0.0, 1.0])), [0.0, 0.0])
        assert_allclose(binary_entropy(0.25), -0.25 * math.log2(0.25) - 0.75 * math.log2(0.75))

    def test_binary_entropy_matches_spectrum_entropy(self):
        grid = np.linspace(0.0, 1.0, 11)
        expected = [entropy_of_spectrum(np.array([p, 1.0 - p])) for p in grid]
        assert_allclose(binary_entropy(grid), expected, atol=1e-14)
        assert binary_entropy(0.0) == 0.0

    def test_hermitian_eigenvalues_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            hermitian_eigenvalues(np.array([[0, 1], [0, 0]], dtype=complex))


class TestDensityMatrix:
    def test_werner_entries(self):
        rho = DensityMatrix.werner(0.6)
        assert_allclose(rho.entry(1, 1), 0.1)
        assert_allclose(rho.entry(2, 2), 0.4)
        assert_allclose(rho.entry(2, 3), 0.3)
        assert rho.is_x_state()

    def test_read_only(self):
        rho = DensityMatrix.werner(0.5)
        with pytest.raises(ValueError):
            rho.data[0, 0] = 1.0

    def test_rejects_non_hermitian(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1] = 0.1
        with pytest.raises(NonHermitianInput):
            DensityMatrix(m)

    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix(np.eye(4, dtype=complex) / 2)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(NegativeEigenvalue):
            DensityMatrix(np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex))

    def test_rejects_wrong_shape(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix(np.eye(3) / 3)

    def test_werner_weight_range(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix.werner(1.2)

    def test_random_x_states_are_valid(self, random_x_states):
        for rho in random_x_states(20):
            assert rho.is_x_state(tol=0.0)
            assert_allclose(rho.trace, 1.0, atol=1e-12)
            assert rho.eigenvalues()[0] > -1e-12

    def test_payload(self):
        rho = DensityMatrix.werner(0.25)
        payload = rho.to_payload()
        assert set(payload) == {"re", "im"}
        assert_allclose(DensityMatrix.from_payload(payload).data, rho.data)

    def test_payload_without_imaginary_part(self):
        rho = DensityMatrix.from_payload({"re": np.diag([0.25] * 4).tolist()})
        assert_allclose(rho.data, np.eye(4) / 4)
