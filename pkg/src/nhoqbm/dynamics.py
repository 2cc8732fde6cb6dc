"""Gaussian-state evolution under the exact master equation.

The master equation is quadratic in positions and derivatives, so Gaussian
states stay Gaussian and only the first two moments need evolving::

    mean' = A(t) mean
    cov'  = A(t) cov + cov A(t)^T + D(t)

With ``1`` the all-ones vector and ``k_ct`` the counterterm stiffness::

    A = [[0,                                 I / M         ],
         [-M Omega^2 I - K - (k_ct + a)/N^2 11^T, -(b / N) 11^T]]
    D = [[0,             (c / N) 11^T   ],
         [(c / N) 11^T,  (2 d / N^2) 11^T]]

``K`` is the Laplacian of the pair couplings. Dissipation and diffusion enter
only through the rank-one collective projector ``11^T``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import quadrature as quad
from .errors import CausticError, DomainError, NumericError, PhysicalityError
from .hpz import SystemParams
from .states import GaussianState, symplectic_eigenvalues
from .transform import build_transform

#: physicality margin (in units of hbar) below which a warning is recorded
WARN_MARGIN = -1e-6
#: margin below which evolution stops with PhysicalityError
FAIL_MARGIN = -1e-3


@dataclass(frozen=True)
class QuadraticPotential:
    """Pair potential ``V = sum_{i<j} 0.5 * kappa_ij * (x_i - x_j)**2``.

    Parameters
    ----------
    kappa : array_like, shape (N, N)
        Symmetric, zero diagonal, non-negative entries.
    """

    kappa: np.ndarray

    def __post_init__(self):
        k = np.array(self.kappa, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DomainError("kappa must be a square matrix")
        if not np.allclose(k, k.T, rtol=0, atol=1e-12 * max(1.0, np.abs(k).max())):
            raise DomainError("kappa must be symmetric")
        if np.any(np.diag(k) != 0):
            raise DomainError("kappa must have a zero diagonal")
        if np.any(k < 0):
            raise DomainError("pair couplings must be non-negative")
        k = 0.5 * (k + k.T)
        k.flags.writeable = False
        object.__setattr__(self, "kappa", k)

    @classmethod
    def none(cls, n_osc):
        return cls(np.zeros((n_osc, n_osc)))

    @classmethod
    def chain(cls, n_osc, kappa):
        k = np.zeros((n_osc, n_osc))
        i = np.arange(n_osc - 1)
        k[i, i + 1] = k[i + 1, i] = kappa
        return cls(k)

    @classmethod
    def all_pairs(cls, n_osc, kappa):
        return cls(kappa * (1.0 - np.eye(n_osc)))

    @property
    def n_osc(self):
        return self.kappa.shape[0]

    def laplacian(self):
        """Matrix ``K`` with ``V = 0.5 * x^T K x``."""
        return np.diag(self.kappa.sum(axis=1)) - self.kappa

    def energy(self, x):
        x = np.asarray(x, float)
        return 0.5 * x @ self.laplacian() @ x


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of a Gaussian state on a time grid.

    Attributes
    ----------
    grid : ndarray, shape (T,)
    means : ndarray, shape (T, 2N)
    covs : ndarray, shape (T, 2N, 2N)
    min_symplectic : ndarray, shape (T,)
        Smallest symplectic eigenvalue of each snapshot.
    hbar : float
    diagnostics : dict
        ``warnings`` (list of messages) and ``caustic_times``.
    """

    grid: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    min_symplectic: np.ndarray
    hbar: float = 1.0
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return self.grid.size

    def __getitem__(self, k):
        return GaussianState(self.means[k], self.covs[k], self.hbar)

    @property
    def n_modes(self):
        return self.means.shape[1] // 2

    @property
    def physicality_margin(self):
        return self.min_symplectic - 0.5 * self.hbar

    def states(self):
        return [self[k] for k in range(len(self))]


def _make_trajectory(grid, means, covs, hbar, diagnostics=None):
    diagnostics = dict(diagnostics or {})
    diagnostics.setdefault("warnings", [])
    mins = symplectic_eigenvalues(covs)[:, 0]
    margin = (mins - 0.5 * hbar) / hbar
    bad = np.nonzero(margin < WARN_MARGIN)[0]
    if bad.size:
        k = bad[np.argmin(margin[bad])]
        msg = (f"physicality margin {margin[k]:.3g} hbar at t = {grid[k]:.6g} "
               f"({bad.size} samples below {WARN_MARGIN:g} hbar)")
        diagnostics["warnings"].append(msg)
        if margin[k] < FAIL_MARGIN:
            raise PhysicalityError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    for a in (grid, means, covs, mins):
        a.flags.writeable = False
    return Trajectory(grid, means, covs, mins, hbar, diagnostics)


def _params_from_series(series, params):
    if params is not None:
        return params
    p = series.provenance
    return SystemParams(p["n_osc"], p["mass"], p["omega"], p["hbar"],
                        p["n_scaling"], p["counterterm"])


def _hamiltonian_generator(params, potential):
    n = params.n_osc
    m = params.mass
    ones = np.ones((n, n))
    K = m * params.omega**2 * np.eye(n) + params.counterterm / n**2 * ones
    if potential is not None:
        K = K + potential.laplacian()
    return np.block([[np.zeros((n, n)), np.eye(n) / m], [-K, np.zeros((n, n))]])


def _collective(n, a, b, c, d):
    """Dissipative part ``B`` of the generator and diffusion ``D``.

    The coefficients may be arrays of equal shape; the blocks then carry the
    same leading shape.
    """
    a, b, c, d = (np.asarray(x, dtype=float)[..., None, None] for x in (a, b, c, d))
    shape = np.broadcast(a, b, c, d).shape[:-2] + (2 * n, 2 * n)
    B = np.zeros(shape)
    D = np.zeros(shape)
    B[..., n:, :n] = -a / n**2
    B[..., n:, n:] = -b / n
    D[..., :n, n:] = c / n
    D[..., n:, :n] = c / n
    D[..., n:, n:] = 2.0 * d / n**2
    return B, D


def moment_rhs(state, coeffs, potential=None, params=None, caustic=False):
    """Time derivative of the mean and covariance.

    Parameters
    ----------
    state : GaussianState
    coeffs : tuple of float
        ``(a, b, c, d)`` at the current time.
    potential : QuadraticPotential, optional
    params : SystemParams
    caustic : bool
        Whether the coefficient sample is caustic-flagged; flagged samples
        are refused.

    Returns
    -------
    dmean : ndarray, shape (2N,)
    dcov : ndarray, shape (2N, 2N)
    """
    if params is None:
        params = SystemParams(state.n_modes)
    if caustic:
        raise CausticError("coefficient sample is caustic-flagged; refusing the step")
    if state.n_modes != params.n_osc:
        raise DomainError(f"state has {state.n_modes} modes, params say N={params.n_osc}")
    coeffs = tuple(float(x) for x in coeffs)
    if not np.all(np.isfinite(coeffs)):
        raise NumericError("non-finite master-equation coefficients")
    B, D = _collective(params.n_osc, *coeffs)
    A = _hamiltonian_generator(params, potential) + B
    return A @ state.mean, A @ state.cov + state.cov @ A.T + D


def _coefficient_samples(series, n):
    """Node and midpoint values of ``(a, b, c, d)`` for the Lawson scheme."""
    node = np.column_stack([series.a, series.b, series.c, series.d])
    mid = quad.midpoints(node)
    return node, mid


def _caustic_policy(series, strict):
    times = series.grid[series.caustic]
    if strict and times.size:
        raise CausticError(
            f"{times.size} caustic-flagged coefficient samples; first at t = {times[0]:.6g}",
            t=float(times[0]),
        )
    return [float(t) for t in times]


def _lawson_rk4(y_mean, y_cov, E, blocks, h):
    """One integrating-factor RK4 step for mean and covariance.

    ``E`` propagates the constant part over ``h / 2``; ``blocks`` supplies
    ``(B, D)`` at the start, middle and end of the step.
    """
    (B0, D0), (Bm, Dm), (B1, D1) = blocks

    def fm(B, m):
        return B @ m

    def fc(B, D, C):
        return B @ C + C @ B.T + D

    def em(m):
        return E @ m

    def ec(C):
        return E @ C @ E.T

    half_m, half_c = em(y_mean), ec(y_cov)
    full_m, full_c = em(half_m), ec(half_c)
    k1m, k1c = fm(B0, y_mean), fc(B0, D0, y_cov)
    k2m = fm(Bm, half_m + 0.5 * h * em(k1m))
    k2c = fc(Bm, Dm, half_c + 0.5 * h * ec(k1c))
    k3m = fm(Bm, half_m + 0.5 * h * k2m)
    k3c = fc(Bm, Dm, half_c + 0.5 * h * k2c)
    k4m = fm(B1, full_m + h * em(k3m))
    k4c = fc(B1, D1, full_c + h * ec(k3c))
    mean = full_m + h / 6.0 * (em(em(k1m)) + 2.0 * em(k2m + k3m) + k4m)
    cov = full_c + h / 6.0 * (ec(ec(k1c)) + 2.0 * ec(k2c + k3c) + k4c)
    return mean, 0.5 * (cov + cov.T)


def evolve(initial, series, potential=None, params=None, *, strict_caustics=False):
    """Evolve a Gaussian state with the master equation in original coordinates.

    Parameters
    ----------
    initial : GaussianState
    series : CoefficientSeries
        Defines the time grid (the integrator steps on it).
    potential : QuadraticPotential, optional
    params : SystemParams, optional
        Defaults to the parameters recorded in ``series.provenance``.
    strict_caustics : bool
        Refuse to run over caustic-flagged samples. By default they are
        accepted (their values are finite) and listed in
        ``trajectory.diagnostics["caustic_times"]``.

    Returns
    -------
    Trajectory

    Notes
    -----
    Fourth-order Lawson (integrating-factor) Runge-Kutta: the constant
    Hamiltonian flow is propagated exactly by a matrix exponential, the
    collective dissipation and diffusion by RK4. Coefficients at step
    midpoints come from local cubic interpolation.
    """
    params = _params_from_series(series, params)
    n = params.n_osc
    if initial.n_modes != n:
        raise DomainError(f"initial state has {initial.n_modes} modes, expected {n}")
    if potential is not None and potential.n_osc != n:
        raise DomainError("potential size does not match n_osc")
    caustic_times = _caustic_policy(series, strict_caustics)
    grid = np.array(series.grid)
    h = grid[1] - grid[0]
    node, mid = _coefficient_samples(series, n)
    E = expm(_hamiltonian_generator(params, potential) * (0.5 * h))
    blocks = list(zip(*_collective(n, *node.T)))
    mblocks = list(zip(*_collective(n, *mid.T)))

    means = np.empty((grid.size, 2 * n))
    covs = np.empty((grid.size, 2 * n, 2 * n))
    means[0], covs[0] = initial.mean, initial.cov
    for k in range(grid.size - 1):
        means[k + 1], covs[k + 1] = _lawson_rk4(
            means[k], covs[k], E, (blocks[k], mblocks[k], blocks[k + 1]), h
        )
        if not np.all(np.isfinite(covs[k + 1])):
            raise NumericError(f"covariance became non-finite at t = {grid[k + 1]:.6g}")
    return _make_trajectory(grid, means, covs, initial.hbar,
                            {"caustic_times": caustic_times, "method": "direct"})


@dataclass(frozen=True)
class RelativeHamiltonian:
    """Quadratic form ``0.5 z^T H z`` of the relative sector.

    ``z = (X~_2..X~_N, P~_2..P~_N)``; ``potential`` is the transformed
    coupling matrix restricted to the relative coordinates.
    """

    matrix: np.ndarray
    potential: np.ndarray
    masses: np.ndarray
    omega: float

    def generator(self):
        """Linear flow ``z' = J H z`` for the relative phase-space vector."""
        r = self.masses.size
        zero = np.zeros((r, r))
        J = np.block([[zero, np.eye(r)], [-np.eye(r), zero]])
        return J @ self.matrix


def relative_hamiltonian(potential, transform, mass=1.0, omega=1.0, tol=1e-12):
    """Relative-sector Hamiltonian in the transformed coordinates.

    The pair potential becomes ``0.5 X~^T (S K S^T) X~`` because
    ``x = S^T X~``. The row and column belonging to the centre of mass must
    vanish (difference potentials never see the centre of mass); a nonzero
    entry above ``tol`` raises :class:`NumericError`.
    """
    n = transform.n_osc
    if potential is None:
        potential = QuadraticPotential.none(n)
    if potential.n_osc != n:
        raise DomainError("potential size does not match the transform")
    S = transform.s_matrix
    Kt = S @ potential.laplacian() @ S.T
    scale = max(1.0, float(np.abs(Kt).max()))
    leak = float(np.abs(Kt[0]).max()) if n > 1 else 0.0
    if leak > tol * scale:
        raise NumericError(
            f"transformed potential couples to the centre of mass (|coef| = {leak:.3g})"
        )
    masses = mass * transform.eff_masses[1:]
    K_rel = Kt[1:, 1:]
    r = n - 1
    H = np.zeros((2 * r, 2 * r))
    H[:r, :r] = np.diag(masses) * omega**2 + K_rel
    H[r:, r:] = np.diag(1.0 / masses) if r else np.zeros((0, 0))
    for arr in (H, K_rel, masses):
        arr.flags.writeable = False
    return RelativeHamiltonian(H, K_rel, masses, float(omega))


def _com_blocks(params, a, b, c, d):
    m1 = params.com_mass
    L = np.array([[0.0, 1.0 / m1], [-m1 * params.omega_b2, 0.0]])
    B = np.array([[0.0, 0.0], [-a, -b]])
    D = np.array([[0.0, c], [c, 2.0 * d]])
    return L, B, D


def factorized_evolve(initial, series, potential=None, transform=None, params=None, *,
                      strict_caustics=False):
    """Evolve through the centre-of-mass / relative factorization.

    The initial state is mapped to ``(X~, P~)``. The centre-of-mass pair
    follows the single-mode master equation with mass ``N M``; the relative
    sector evolves unitarily under :func:`relative_hamiltonian`; their
    correlations are carried by the two homogeneous propagators. The result
    is mapped back to original coordinates.

    Parameters and return value are as for :func:`evolve`.
    """
    params = _params_from_series(series, params)
    n = params.n_osc
    if transform is None:
        transform = build_transform(n)
    if initial.n_modes != n or transform.n_osc != n:
        raise DomainError("state, transform and params disagree on N")
    caustic_times = _caustic_policy(series, strict_caustics)
    grid = np.array(series.grid)
    h = grid[1] - grid[0]
    Lfwd = transform.phase_space_map("forward")
    Linv = transform.phase_space_map("inverse")
    mean0 = Lfwd @ initial.mean
    cov0 = Lfwd @ initial.cov @ Lfwd.T

    com = np.array([0, n])
    rel = np.r_[1:n, n + 1 : 2 * n]
    rh = relative_hamiltonian(potential, transform, params.mass, params.omega)
    G_rel = rh.generator()
    step_rel = expm(G_rel * h)

    node, mid = _coefficient_samples(series, n)
    Lc = _com_blocks(params, 0, 0, 0, 0)[0]
    E = expm(Lc * (0.5 * h))
    blocks = [_com_blocks(params, *row)[1:] for row in node]
    mblocks = [_com_blocks(params, *row)[1:] for row in mid]
    zero2 = np.zeros((2, 2))

    m_com = mean0[com]
    m_rel = mean0[rel]
    c_com = cov0[np.ix_(com, com)]
    c_rel = cov0[np.ix_(rel, rel)]
    c_cr = cov0[np.ix_(com, rel)]
    phi_com = np.eye(2)
    phi_rel = np.eye(rel.size)

    means = np.empty((grid.size, 2 * n))
    covs = np.empty((grid.size, 2 * n, 2 * n))
    for k in range(grid.size):
        if k:
            m_com, c_com = _lawson_rk4(
                m_com, c_com, E, (blocks[k - 1], mblocks[k - 1], blocks[k]), h
            )
            # homogeneous propagator: columns evolve like means (no diffusion)
            hom = [(b, zero2) for b, _ in (blocks[k - 1], mblocks[k - 1], blocks[k])]
            phi_com = np.column_stack([
                _lawson_rk4(phi_com[:, j], zero2, E, hom, h)[0] for j in range(2)
            ])
            phi_rel = step_rel @ phi_rel
            m_rel = step_rel @ m_rel
            c_rel = step_rel @ c_rel @ step_rel.T
            c_rel = 0.5 * (c_rel + c_rel.T)
        cr = phi_com @ c_cr @ phi_rel.T
        full_m = np.empty(2 * n)
        full_c = np.empty((2 * n, 2 * n))
        full_m[com], full_m[rel] = m_com, m_rel
        full_c[np.ix_(com, com)] = c_com
        full_c[np.ix_(rel, rel)] = c_rel
        full_c[np.ix_(com, rel)] = cr
        full_c[np.ix_(rel, com)] = cr.T
        means[k] = Linv @ full_m
        cv = Linv @ full_c @ Linv.T
        covs[k] = 0.5 * (cv + cv.T)
    return _make_trajectory(grid, means, covs, initial.hbar,
                            {"caustic_times": caustic_times, "method": "factorized"})
