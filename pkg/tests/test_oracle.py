import numpy as np
import pytest

from nhoqbm import (DomainError, GaussianState, QuadraticPotential, SpectralModel,
                    SystemParams, Temperature, compare, discretize_bath)
from nhoqbm.oracle import (build_network, exact_reduced_evolution, full_network_evolution,
                           propagator, thermal_bath_covariance)
from nhoqbm.states import symplectic_form


@pytest.fixture(scope="module")
def small_bath():
    return discretize_bath(SpectralModel.ohmic(0.05, 2.0), 30, omega_max=10.0)


class TestDiscretization:
    def test_coupling_relation(self, small_bath):
        model = SpectralModel.ohmic(0.05, 2.0)
        b = small_bath
        dw = 10.0 / 30
        np.testing.assert_allclose(b.couplings**2 / (2 * b.masses * b.frequencies),
                                   model.density(b.frequencies) * dw, rtol=1e-13)

    def test_recurrence_time(self, small_bath):
        assert small_bath.recurrence_time == pytest.approx(2 * np.pi / (10.0 / 30))

    def test_gauss_legendre_integrates_density(self):
        model = SpectralModel.ohmic(0.05, 2.0)
        b = discretize_bath(model, 80, omega_max=40.0, comb="gauss_legendre")
        weights = b.couplings**2 / (2 * b.masses * b.frequencies)
        # int_0^inf I(w)/w dw = 2 gamma cutoff / pi; the tail beyond 20 cutoffs is e^-20
        assert np.sum(weights / b.frequencies) == pytest.approx(2 * 0.05 * 2.0 / np.pi, rel=1e-7)
        assert b.recurrence_time is None

    def test_discrete_passthrough(self):
        m = SpectralModel.discrete([0.1, 0.2], [1.0, 1.0], [1.0, 2.0])
        b = discretize_bath(m)
        np.testing.assert_array_equal(b.frequencies, [1.0, 2.0])

    @pytest.mark.parametrize("kwargs", [dict(n_modes=0), dict(omega_max=-1.0),
                                        dict(comb="chebyshev"), dict(bath_mass=0.0)])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            discretize_bath(SpectralModel.ohmic(0.05, 2.0), **kwargs)


class TestNetwork:
    def test_propagator_symplectic(self, small_bath):
        net = build_network(SystemParams(2), small_bath, QuadraticPotential.chain(2, 0.4))
        S = propagator(net, 3.7)
        J = symplectic_form(net.dim)
        np.testing.assert_allclose(S @ J @ S.T, J, atol=1e-11)

    def test_propagator_matches_expm(self, small_bath):
        from scipy.linalg import expm
        net = build_network(SystemParams(1), small_bath)
        H = net.hamiltonian_matrix()
        J = symplectic_form(net.dim)
        np.testing.assert_allclose(propagator(net, 1.3), expm(J @ H * 1.3), atol=1e-10)

    def test_energy_conserved(self, small_bath):
        net = build_network(SystemParams(2), small_bath)
        init = GaussianState.vacuum(2, mean=[0.5, -0.2, 0.1, 0.0])
        states = full_network_evolution(net, small_bath, init, 1.0, [0.0, 2.0, 9.0])
        e = [net.energy(s) for s in states]
        assert e[1] == pytest.approx(e[0], rel=1e-11) and e[2] == pytest.approx(e[0], rel=1e-11)

    def test_thermal_covariance(self, small_bath):
        q2, p2 = thermal_bath_covariance(small_bath, Temperature.finite(2.0))
        w = small_bath.frequencies
        np.testing.assert_allclose(q2, 0.5 / w / np.tanh(w))
        np.testing.assert_allclose(q2 * p2, (0.5 / np.tanh(w)) ** 2)

    def test_non_positive_network_warns(self):
        bath = discretize_bath(SpectralModel.discrete([5.0], [1.0], [1.0]))
        with pytest.warns(RuntimeWarning, match="positive semidefinite"):
            build_network(SystemParams(1), bath)

    def test_potential_size_mismatch(self, small_bath):
        with pytest.raises(DomainError):
            build_network(SystemParams(2), small_bath, QuadraticPotential.none(3))


class TestReducedEvolution:
    def test_uncoupled_is_free(self):
        bath = discretize_bath(SpectralModel.ohmic(0.0, 2.0), 10, omega_max=5.0)
        init = GaussianState.vacuum(2, mean=[1.0, 0.0, 0.0, 0.5])
        t = np.linspace(0, 5, 11)
        traj = exact_reduced_evolution(build_network(SystemParams(2), bath), bath, init, 1.0, t)
        np.testing.assert_allclose(traj.means[:, 0], np.cos(t), atol=1e-12)
        np.testing.assert_allclose(traj.means[:, 1], 0.5 * np.sin(t), atol=1e-12)
        np.testing.assert_allclose(traj.covs, np.broadcast_to(init.cov, traj.covs.shape),
                                   atol=1e-12)

    def test_validity_window(self, small_bath):
        net = build_network(SystemParams(1), small_bath)
        traj = exact_reduced_evolution(net, small_bath, GaussianState.vacuum(1), 1.0, [0.0, 1.0])
        assert traj.diagnostics["validity_window"] == pytest.approx(
            0.5 * small_bath.recurrence_time)

    def test_stays_physical(self, small_bath):
        net = build_network(SystemParams(2), small_bath)
        traj = exact_reduced_evolution(net, small_bath, GaussianState.vacuum(2),
                                       Temperature.zero(), np.linspace(0, 9, 19))
        assert traj.physicality_margin.min() > -1e-10


@pytest.fixture(scope="module")
def traj(small_bath):
    net = build_network(SystemParams(2), small_bath)
    return exact_reduced_evolution(net, small_bath, GaussianState.vacuum(2), 1.0,
                                   np.linspace(0, 12, 25))


class TestCompare:
    def test_identical_is_zero(self, traj):
        rep = compare(traj, traj)
        assert rep.max_deviation == 0.0 and rep.max_relative == 0.0
        assert rep.passed()

    def test_window_restricts_grid(self, traj):
        rep = compare(traj, traj, window=5.0)
        assert rep.grid.max() <= 5.0 and rep.as_array().shape[1] == 5

    def test_default_window_is_validity(self, traj):
        rep = compare(traj, traj)
        assert rep.window == pytest.approx(traj.diagnostics["validity_window"])

    def test_grid_mismatch(self, traj, small_bath):
        net = build_network(SystemParams(2), small_bath)
        other = exact_reduced_evolution(net, small_bath, GaussianState.vacuum(2), 1.0, [0, 1])
        with pytest.raises(DomainError):
            compare(traj, other)
