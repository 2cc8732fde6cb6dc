import numpy as np
import pytest

from nhoqbm import DomainError, GaussianState
from nhoqbm.states import symplectic_eigenvalues, symplectic_form


class TestSymplecticEigenvalues:
    def test_near_degenerate_vacuum(self):
        # a rounding-level perturbation of the vacuum once broke the general eigensolver
        cov = 0.5 * np.eye(4)
        cov[0, 1] = cov[1, 0] = cov[2, 3] = cov[3, 2] = 3.33066907e-16
        np.testing.assert_allclose(symplectic_eigenvalues(cov), [0.5, 0.5], atol=1e-14)

    def test_invariant_under_symplectic_map(self, rng):
        A = rng.standard_normal((4, 4))
        cov = A @ A.T + np.eye(4)
        H = rng.standard_normal((4, 4))
        from scipy.linalg import expm
        S = expm(symplectic_form(2) @ (H + H.T))
        np.testing.assert_allclose(symplectic_eigenvalues(S @ cov @ S.T),
                                   symplectic_eigenvalues(cov), rtol=1e-9)

    def test_singular_falls_back(self):
        cov = np.array([[2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0],
                        [0.0, 0.0, 0.125, 0.0], [0.0, 0.0, 0.0, 1.0]])
        np.testing.assert_allclose(symplectic_eigenvalues(cov), [0.0, 0.5], atol=1e-15)

    def test_stack(self):
        covs = np.stack([GaussianState.thermal(2, b).cov for b in (0.5, 2.0)])
        ref = 0.5 / np.tanh(0.5 * np.array([0.5, 2.0]))
        np.testing.assert_allclose(symplectic_eigenvalues(covs), np.c_[ref, ref])


class TestGaussianState:
    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            GaussianState(np.zeros(2), [[1.0, 0.1], [0.0, 1.0]])

    def test_rejects_odd_dimension(self):
        with pytest.raises(DomainError):
            GaussianState(np.zeros(3), np.eye(3))

    def test_marginal(self):
        st = GaussianState.two_mode_squeezed(0.3)
        m = st.marginal([1])
        assert m.cov[0, 0] == pytest.approx(0.5 * np.cosh(0.6))

    def test_physicality(self):
        assert GaussianState.vacuum(2).is_physical()
        assert not GaussianState(np.zeros(2), 0.2 * np.eye(2)).is_physical()
