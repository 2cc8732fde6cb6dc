"""Gaussian phase-space states of N oscillators.

Phase-space vectors are ordered ``(x_1, ..., x_N, P_1, ..., P_N)``. The
covariance matrix holds symmetrised second central moments, so the vacuum of
a unit oscillator with ``hbar = 1`` has covariance ``0.5 * I``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SYMMETRY_TOL = 1e-12


def symplectic_form(n):
    """The ``2n x 2n`` symplectic form for ``(x..., p...)`` ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_eigenvalues(cov):
    """Williamson symplectic eigenvalues of a ``2n x 2n`` covariance, ascending.

    A stack of covariances (shape ``(..., 2n, 2n)``) gives one row per matrix.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[-1] // 2
    J = symplectic_form(n)
    try:
        # L^T J L is antisymmetric and similar to J cov, so i L^T J L is
        # Hermitian with eigenvalues +-nu; this avoids the general eigensolver,
        # which can fail to converge on the degenerate spectra of near-vacuum states
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        ev = np.linalg.eigvals(J @ cov)
        nu = np.sort(np.abs(ev.imag), axis=-1)
        # eigenvalues come in +-i*nu pairs
        return 0.5 * (nu[..., 0::2] + nu[..., 1::2])
    A = np.swapaxes(L, -1, -2) @ J @ L
    ev = np.linalg.eigvalsh(1j * A)
    return 0.5 * (ev[..., n:] - ev[..., :n][..., ::-1])


def mode_indices(modes, n_modes):
    """Row/column indices of the ``(x, p)`` pairs of the selected modes."""
    modes = np.asarray(modes, dtype=int)
    return np.concatenate([modes, modes + n_modes])


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of a Gaussian state.

    Parameters
    ----------
    mean : array_like, shape (2N,)
    cov : array_like, shape (2N, 2N)
        Must be symmetric to 1e-12 (relative to its largest entry); it is
        symmetrised on construction.
    hbar : float
    """

    mean: np.ndarray
    cov: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        dim = mean.shape[0]
        if dim % 2 or cov.shape != (dim, dim):
            raise DomainError(
                f"mean of length {dim} and covariance of shape {cov.shape} "
                "do not describe a 2N-dimensional phase space"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise DomainError("state has non-finite entries")
        scale = max(1.0, np.abs(cov).max())
        if np.abs(cov - cov.T).max() > SYMMETRY_TOL * scale:
            raise DomainError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self):
        return self.mean.shape[0] // 2

    def symplectic_eigenvalues(self):
        return symplectic_eigenvalues(self.cov)

    def physicality_margin(self):
        """Smallest symplectic eigenvalue minus ``hbar / 2``."""
        return float(self.symplectic_eigenvalues()[0] - 0.5 * self.hbar)

    def is_physical(self, tol=1e-9):
        return self.physicality_margin() >= -tol

    def marginal(self, modes):
        """Reduced state of the listed modes (partial trace)."""
        idx = mode_indices(modes, self.n_modes)
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)], self.hbar)

    @classmethod
    def vacuum(cls, n_modes, mass=1.0, omega=1.0, hbar=1.0, mean=None):
        """Product of oscillator ground states."""
        var_x = hbar / (2.0 * mass * omega)
        var_p = hbar * mass * omega / 2.0
        cov = np.diag(np.r_[np.full(n_modes, var_x), np.full(n_modes, var_p)])
        if mean is None:
            mean = np.zeros(2 * n_modes)
        return cls(mean, cov, hbar)

    @classmethod
    def thermal(cls, n_modes, beta, mass=1.0, omega=1.0, hbar=1.0):
        """Product of thermal states of identical oscillators."""
        c = 1.0 / np.tanh(0.5 * hbar * omega * beta)
        state = cls.vacuum(n_modes, mass, omega, hbar)
        return cls(state.mean, state.cov * c, hbar)

    @classmethod
    def two_mode_squeezed(cls, r, hbar=1.0):
        """Two-mode squeezed vacuum with squeezing parameter ``r`` (unit mass and frequency)."""
        ch, sh = np.cosh(2 * r), np.sinh(2 * r)
        half = 0.5 * hbar
        cov = half * np.array(
            [
                [ch, sh, 0.0, 0.0],
                [sh, ch, 0.0, 0.0],
                [0.0, 0.0, ch, -sh],
                [0.0, 0.0, -sh, ch],
            ]
        )
        return cls(np.zeros(4), cov, hbar)
