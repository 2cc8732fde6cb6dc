"""Exact reduced dynamics of the system plus a finite bath.

The full network of ``N`` system oscillators and ``n`` bath modes is
quadratic, so its Gaussian dynamics is solved exactly by the symplectic
propagator of ``H = 0.5 p^T M^-1 p + 0.5 x^T K x``. Tracing out the bath is
extracting the system rows and columns of the covariance.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Trajectory, _make_trajectory
from .environment import Regime, SpectralModel, Temperature
from .errors import DomainError, NumericError
from .states import GaussianState
from .transform import build_transform

COMBS = ("uniform", "gauss_legendre")


@dataclass(frozen=True)
class BathSpec:
    """Bath modes ``(m_j, w_j, C_j)`` and how they were generated.

    ``recurrence_time`` is ``2 pi / dw`` for a uniform comb and ``None`` when
    the frequencies are not equally spaced.
    """

    masses: np.ndarray
    frequencies: np.ndarray
    couplings: np.ndarray
    recipe: dict = field(default_factory=dict)

    def __post_init__(self):
        m, w, c = (np.array(x, dtype=float).ravel() for x in
                   (self.masses, self.frequencies, self.couplings))
        if not (m.size == w.size == c.size) or m.size < 1:
            raise DomainError("bath needs at least one mode with matching (m, w, C)")
        if np.any(m <= 0) or np.any(w <= 0):
            raise DomainError("bath masses and frequencies must be positive")
        for name, arr in (("masses", m), ("frequencies", w), ("couplings", c)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self):
        return self.frequencies.size

    @property
    def recurrence_time(self):
        return self.recipe.get("recurrence_time")

    def as_model(self):
        """The same bath as a discrete :class:`SpectralModel`."""
        return SpectralModel.discrete(self.couplings, self.masses, self.frequencies)


def discretize_bath(model, n_modes=400, omega_max=None, comb="uniform", bath_mass=1.0):
    """Realize a spectral density as a finite set of bath modes.

    Parameters
    ----------
    model : SpectralModel
        A discrete model is passed through unchanged.
    n_modes : int
    omega_max : float, optional
        Upper end of the comb; defaults to ``10 * cutoff`` (``cutoff`` for a
        sharp cutoff).
    comb : {"uniform", "gauss_legendre"}
        ``uniform`` places ``w_j = j dw`` with ``dw = omega_max / n_modes``
        and line weight ``I(w_j) dw``; ``gauss_legendre`` uses the
        Gauss-Legendre nodes and weights on ``[0, omega_max]``.
    bath_mass : float

    Returns
    -------
    BathSpec
        Couplings satisfy ``C_j**2 / (2 m_j w_j) = weight_j``.
    """
    if model.is_discrete:
        return BathSpec(model.masses, model.frequencies, model.couplings,
                        {"comb": "explicit", "n_modes": len(model.modes)})
    if int(n_modes) != n_modes or n_modes < 1:
        raise DomainError(f"n_modes must be a positive integer, got {n_modes!r}")
    if omega_max is None:
        omega_max = model.cutoff * (1.0 if model.cutoff_shape == "sharp" else 10.0)
    if not omega_max > 0:
        raise DomainError(f"omega_max must be positive, got {omega_max!r}")
    if not bath_mass > 0:
        raise DomainError("bath_mass must be positive")
    n_modes = int(n_modes)
    recipe = {"comb": comb, "n_modes": n_modes, "omega_max": float(omega_max)}
    if comb == "uniform":
        dw = omega_max / n_modes
        w = dw * np.arange(1, n_modes + 1)
        weights = model.density(w) * dw
        recipe["recurrence_time"] = 2.0 * np.pi / dw
    elif comb == "gauss_legendre":
        x, gw = np.polynomial.legendre.leggauss(n_modes)
        w = 0.5 * omega_max * (x + 1.0)
        weights = model.density(w) * 0.5 * omega_max * gw
        recipe["recurrence_time"] = None
    else:
        raise DomainError(f"comb must be one of {COMBS}, got {comb!r}")
    m = np.full(n_modes, float(bath_mass))
    c = np.sqrt(2.0 * m * w * weights)
    return BathSpec(m, w, c, recipe)


@dataclass(frozen=True)
class NetworkHamiltonian:
    """``H = 0.5 p^T diag(1/masses) p + 0.5 x^T K x`` for system + bath.

    The first ``n_sys`` coordinates are the system oscillators.
    """

    K: np.ndarray
    masses: np.ndarray
    n_sys: int

    @property
    def dim(self):
        return self.masses.size

    def hamiltonian_matrix(self):
        """``H`` as a ``2d x 2d`` matrix on ``(x, p)``."""
        d = self.dim
        H = np.zeros((2 * d, 2 * d))
        H[:d, :d] = self.K
        H[d:, d:] = np.diag(1.0 / self.masses)
        return H

    def energy(self, state):
        H = self.hamiltonian_matrix()
        return 0.5 * (np.trace(H @ state.cov) + state.mean @ H @ state.mean)


def build_network(params, bath, potential=None):
    """Assemble ``K`` for ``N`` equal oscillators each coupled to every bath mode.

    The system block is ``M Omega^2 I + K_pair + (k_ct / N^2) 11^T`` where
    ``k_ct = params.counterterm``; the coupling block holds ``C_j`` in every
    row; the bath block is ``diag(m_j w_j^2)``.
    """
    n = params.n_osc
    nb = bath.n_modes
    K = np.zeros((n + nb, n + nb))
    K[:n, :n] = params.mass * params.omega**2 * np.eye(n) + params.counterterm / n**2
    if potential is not None:
        if potential.n_osc != n:
            raise DomainError("potential size does not match n_osc")
        K[:n, :n] += potential.laplacian()
    K[:n, n:] = bath.couplings[None, :]
    K[n:, :n] = bath.couplings[:, None]
    K[n:, n:] = np.diag(bath.masses * bath.frequencies**2)
    masses = np.concatenate([np.full(n, params.mass), bath.masses])
    net = NetworkHamiltonian(K, masses, n)
    low = _normal_modes(net)[0].min()
    if low < 0:
        warnings.warn(
            f"network potential is not positive semidefinite (lowest eigenvalue {low:.3g}); "
            "dynamics is unstable", RuntimeWarning, stacklevel=2,
        )
    return net


def _normal_modes(net):
    mi = 1.0 / np.sqrt(net.masses)
    try:
        lam, U = np.linalg.eigh(mi[:, None] * net.K * mi[None, :])
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition of the network failed: {exc}") from None
    return lam, U, mi


def _propagator_rows(net, modes, t, rows):
    """Selected rows of the symplectic propagator at time ``t``.

    ``rows`` indexes the ``(x, p)`` phase-space vector of the whole network.
    """
    lam, U, mi = modes
    d = net.dim
    om = np.sqrt(lam.astype(complex))
    cs = np.cos(om * t).real
    small = np.abs(om) * max(t, 1.0) < 1e-8
    safe = np.where(small, 1.0, om)
    sc = np.where(small, t, np.sin(om * t) / safe).real
    ws = np.where(small, 0.0, -om * np.sin(om * t)).real
    # mass-weighted y = sqrt(m) x, py = p / sqrt(m)
    sqm = 1.0 / mi
    out = np.empty((len(rows), 2 * d))
    for r, row in enumerate(rows):
        if row < d:
            u = U[row] * sqm[row] ** -1
            out[r, :d] = ((u * cs) @ U.T) * sqm
            out[r, d:] = ((u * sc) @ U.T) * mi
        else:
            u = U[row - d] * sqm[row - d]
            out[r, :d] = ((u * ws) @ U.T) * sqm
            out[r, d:] = ((u * cs) @ U.T) * mi
    return out


def propagator(net, t):
    """Full ``2d x 2d`` symplectic propagator on ``(x, p)``."""
    return _propagator_rows(net, _normal_modes(net), float(t), range(2 * net.dim))


def thermal_bath_covariance(bath, temperature, hbar=1.0):
    """Diagonal ``<q^2>`` and ``<p^2>`` of each bath mode in equilibrium."""
    if not isinstance(temperature, Temperature):
        temperature = Temperature.finite(float(temperature))
    m, w = bath.masses, bath.frequencies
    f = temperature.thermal_factor(w, hbar)
    return hbar / (2.0 * m * w) * f, hbar * m * w / 2.0 * f


def initial_network_state(net, bath, system_initial, temperature, hbar=1.0):
    """Product of the system state and the thermal bath."""
    n, d = net.n_sys, net.dim
    if system_initial.n_modes != n:
        raise DomainError(f"system state has {system_initial.n_modes} modes, expected {n}")
    q2, p2 = thermal_bath_covariance(bath, temperature, hbar)
    sel = np.r_[0:n, d : d + n]
    cov = np.zeros((2 * d, 2 * d))
    cov[np.ix_(sel, sel)] = system_initial.cov
    bq = np.arange(n, d)
    cov[bq, bq] = q2
    cov[bq + d, bq + d] = p2
    mean = np.zeros(2 * d)
    mean[sel] = system_initial.mean
    return GaussianState(mean, cov, hbar)


def full_network_evolution(net, bath, system_initial, temperature, t_grid, hbar=1.0):
    """Full network states at each time (for invariance checks)."""
    state0 = initial_network_state(net, bath, system_initial, temperature, hbar)
    modes = _normal_modes(net)
    out = []
    for t in np.atleast_1d(t_grid):
        S = _propagator_rows(net, modes, float(t), range(2 * net.dim))
        out.append(GaussianState(S @ state0.mean, S @ state0.cov @ S.T, hbar))
    return out


def exact_reduced_evolution(net, bath, system_initial, temperature, t_grid, hbar=1.0):
    """Exact system marginal of the network evolution.

    Parameters
    ----------
    net : NetworkHamiltonian
    bath : BathSpec
        The bath used to build ``net``; its thermal state is the initial bath.
    system_initial : GaussianState
        Uncorrelated with the bath at ``t = 0``.
    temperature : Temperature or float
        A float is read as a finite inverse temperature.
    t_grid : array_like

    Returns
    -------
    Trajectory
        ``diagnostics["validity_window"]`` is half the comb recurrence time.
    """
    state0 = initial_network_state(net, bath, system_initial, temperature, hbar)
    n, d = net.n_sys, net.dim
    rows = list(range(n)) + list(range(d, d + n))
    modes = _normal_modes(net)
    grid = np.array(np.atleast_1d(t_grid), dtype=float)
    means = np.empty((grid.size, 2 * n))
    covs = np.empty((grid.size, 2 * n, 2 * n))
    for k, t in enumerate(grid):
        S = _propagator_rows(net, modes, float(t), rows)
        means[k] = S @ state0.mean
        c = S @ state0.cov @ S.T
        covs[k] = 0.5 * (c + c.T)
    rt = bath.recurrence_time
    diag = {"validity_window": None if rt is None else 0.5 * rt, "method": "oracle"}
    return _make_trajectory(grid, means, covs, hbar, diag)


@dataclass(frozen=True)
class ComparisonReport:
    """Deviation of a master-equation trajectory from the oracle.

    All deviations are sup-norms of covariance differences divided by
    ``scale``, the largest oracle covariance entry over the compared window.
    Blocks refer to the centre-of-mass / relative coordinates.
    """

    grid: np.ndarray
    deviation: np.ndarray
    collective: np.ndarray
    relative: np.ndarray
    cross: np.ndarray
    scale: float
    window: float = None

    @property
    def max_deviation(self):
        return float(self.deviation.max())

    @property
    def max_collective(self):
        return float(self.collective.max())

    @property
    def max_relative(self):
        return float(self.relative.max())

    @property
    def worst_time(self):
        return float(self.grid[np.argmax(self.deviation)])

    def passed(self, cov_tol=0.02, relative_tol=1e-8):
        return self.max_deviation < cov_tol and self.max_relative < relative_tol

    def as_array(self):
        """Columns ``(t, deviation, collective, relative, cross)``."""
        return np.column_stack([self.grid, self.deviation, self.collective,
                                self.relative, self.cross])


def compare(master_traj, oracle_traj, transform=None, window=None):
    """Compare two trajectories sampled on the same grid.

    Parameters
    ----------
    master_traj, oracle_traj : Trajectory
    transform : CanonicalTransform, optional
        Frame for the block split; built for ``N`` when omitted.
    window : float, optional
        Only times ``t <= window`` are compared; defaults to the oracle's
        validity window if it has one.
    """
    g1, g2 = np.asarray(master_traj.grid), np.asarray(oracle_traj.grid)
    if g1.shape != g2.shape or not np.allclose(g1, g2, rtol=0, atol=1e-12 * max(1.0, g2.max())):
        raise DomainError("trajectories must share the same time grid")
    n = oracle_traj.n_modes
    if master_traj.n_modes != n:
        raise DomainError("trajectories describe different numbers of modes")
    if transform is None:
        transform = build_transform(n)
    if window is None:
        window = oracle_traj.diagnostics.get("validity_window")
    keep = np.ones(g2.size, bool) if window is None else g2 <= window * (1 + 1e-12)
    L = transform.phase_space_map("forward")
    cm = np.einsum("ij,tjk,lk->til", L, master_traj.covs[keep], L)
    co = np.einsum("ij,tjk,lk->til", L, oracle_traj.covs[keep], L)
    scale = float(np.abs(oracle_traj.covs[keep]).max())
    diff = np.abs(cm - co) / scale
    com = np.array([0, n])
    rel = np.r_[1:n, n + 1 : 2 * n]
    dev = np.abs(master_traj.covs[keep] - oracle_traj.covs[keep]).max(axis=(1, 2)) / scale
    collective = diff[:, com][:, :, com].max(axis=(1, 2))
    if rel.size:
        relative = diff[:, rel][:, :, rel].max(axis=(1, 2))
        cross = diff[:, com][:, :, rel].max(axis=(1, 2))
    else:
        relative = np.zeros(keep.sum())
        cross = np.zeros(keep.sum())
    return ComparisonReport(g2[keep], dev, collective, relative, cross, scale, window)
