import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from nhoqbm import CanonicalTransformer, DomainError, GaussianState, build_transform
from nhoqbm.transform import (com_component_of_difference, difference_coefficients,
                              transform_gaussian, verify_canonical)


class TestBuildTransform:
    def test_two_oscillators(self):
        tr = build_transform(2)
        np.testing.assert_allclose(tr.t_matrix, [[0.5, 0.5], [1.0, -1.0]])
        np.testing.assert_allclose(tr.s_matrix, [[1.0, 1.0], [0.5, -0.5]])
        np.testing.assert_allclose(tr.eff_masses, [2.0, 0.5])

    @pytest.mark.parametrize("n,masses", [
        (1, [1.0]),
        (4, [4.0, 1.0, 0.5, 0.5]),
        (5, [5.0, 1.0, 0.5, 0.5, 0.8]),
    ])
    def test_printed_masses(self, n, masses):
        np.testing.assert_allclose(build_transform(n).eff_masses, masses, rtol=1e-14)

    @pytest.mark.parametrize("n", [3, 7, 9, 11])
    def test_last_odd_mode(self, n):
        assert build_transform(n).eff_masses[-1] == pytest.approx((n - 1) / n, rel=1e-14)

    def test_first_row_is_centre_of_mass(self):
        for n in range(1, 10):
            np.testing.assert_allclose(build_transform(n).t_matrix[0], np.full(n, 1.0 / n))

    @pytest.mark.parametrize("bad", [0, -3, 2.5])
    def test_rejects_bad_n(self, bad):
        with pytest.raises(DomainError):
            build_transform(bad)

    def test_immutable(self):
        with pytest.raises(ValueError):
            build_transform(3).t_matrix[0, 0] = 2.0


class TestInvariants:
    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 30), seed=st.integers(0, 2**31))
    def test_canonical(self, n, seed):
        rep = verify_canonical(build_transform(n), samples=20, seed=seed)
        assert rep.passed(1e-10), rep

    def test_report_reproducible(self):
        a = verify_canonical(build_transform(6), seed=3)
        b = verify_canonical(build_transform(6), seed=3)
        assert a == b

    def test_symplectic_phase_space_map(self):
        n = 6
        L = build_transform(n).phase_space_map()
        J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
        np.testing.assert_allclose(L @ J @ L.T, J, atol=1e-14)

    def test_inverse_map(self):
        tr = build_transform(7)
        np.testing.assert_allclose(tr.phase_space_map("inverse") @ tr.phase_space_map(),
                                   np.eye(14), atol=1e-14)

    def test_bad_direction(self):
        with pytest.raises(DomainError):
            build_transform(2).phase_space_map("sideways")


class TestDifferences:
    @pytest.mark.parametrize("n", range(2, 13))
    def test_no_com_component(self, n):
        tr = build_transform(n)
        worst = max(abs(com_component_of_difference(tr, i, j))
                    for i in range(n) for j in range(n) if i != j)
        assert worst < 1e-14

    def test_expansion_reproduces_difference(self, rng):
        tr = build_transform(5)
        x = rng.standard_normal(5)
        c = difference_coefficients(tr, 1, 4)
        assert c @ (tr.t_matrix @ x) == pytest.approx(x[1] - x[4], abs=1e-13)

    def test_index_errors(self):
        tr = build_transform(3)
        with pytest.raises(DomainError):
            com_component_of_difference(tr, 0, 3)
        with pytest.raises(DomainError):
            com_component_of_difference(tr, 1, 1)


class TestGaussian:
    def test_round_trip(self, rng):
        A = rng.standard_normal((6, 6))
        st_ = GaussianState(rng.standard_normal(6), A @ A.T + np.eye(6))
        tr = build_transform(3)
        back = transform_gaussian(transform_gaussian(st_, tr), tr, "inverse")
        np.testing.assert_allclose(back.cov, st_.cov, atol=1e-13)
        np.testing.assert_allclose(back.mean, st_.mean, atol=1e-14)

    def test_vacuum_relative_modes_are_ground_states(self):
        tr = build_transform(4)
        ts = transform_gaussian(GaussianState.vacuum(4), tr)
        m = tr.eff_masses
        np.testing.assert_allclose(np.diag(ts.cov)[:4], 0.5 / m)
        np.testing.assert_allclose(np.diag(ts.cov)[4:], 0.5 * m)

    def test_size_mismatch(self):
        with pytest.raises(DomainError):
            transform_gaussian(GaussianState.vacuum(2), build_transform(3))


class TestCanonicalTransformer:
    def test_fit_transform_inverse(self, rng):
        X = rng.standard_normal((10, 8))
        est = CanonicalTransformer().fit(X)
        assert est.n_features_in_ == 8
        Z = est.transform(X)
        np.testing.assert_allclose(Z[:, 0], X[:, :4].mean(axis=1))
        np.testing.assert_allclose(est.inverse_transform(Z), X, atol=1e-13)

    def test_clone_and_params(self):
        est = CanonicalTransformer(n_osc=3)
        assert clone(est).get_params() == {"n_osc": 3}

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            CanonicalTransformer().transform(np.zeros((1, 4)))

    def test_column_mismatch(self):
        with pytest.raises(DomainError):
            CanonicalTransformer(n_osc=3).fit(np.zeros((2, 4)))
        est = CanonicalTransformer().fit(np.zeros((2, 4)))
        with pytest.raises(DomainError):
            est.transform(np.zeros((2, 6)))
