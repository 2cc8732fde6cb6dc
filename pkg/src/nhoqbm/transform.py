"""Centre-of-mass canonical transformation for N identical oscillators.

The new coordinates are ``X~ = T x`` and ``P~ = S P`` with ``S = (T^T)^-1``.
Row 0 of ``T`` is the centre of mass ``(1/N, ..., 1/N)``; the remaining rows
are mutually orthogonal difference coordinates built by pairing oscillators
recursively (even N) or by splitting off the last oscillator (odd N).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DomainError
from .states import GaussianState


@dataclass(frozen=True)
class CanonicalTransform:
    """Position map ``T``, momentum map ``S`` and effective masses.

    ``eff_masses`` are in units of the single-oscillator mass, so the centre
    of mass carries ``eff_masses[0] == N``.
    """

    n_osc: int
    t_matrix: np.ndarray
    s_matrix: np.ndarray
    eff_masses: np.ndarray

    def phase_space_map(self, direction="forward"):
        """Block-diagonal map ``diag(T, S)`` (or its inverse) on ``(x, P)``."""
        n = self.n_osc
        zero = np.zeros((n, n))
        if direction == "forward":
            return np.block([[self.t_matrix, zero], [zero, self.s_matrix]])
        if direction == "inverse":
            # T^-1 = S^T and S^-1 = T^T
            return np.block([[self.s_matrix.T, zero], [zero, self.t_matrix.T]])
        raise DomainError(f"direction must be 'forward' or 'inverse', got {direction!r}")


@dataclass(frozen=True)
class ValidationReport:
    n_osc: int
    samples: int
    seed: int
    det_deviation: float
    commutator_deviation: float
    orthogonality_deviation: float
    hamiltonian_deviation: float

    @property
    def max_deviation(self):
        return max(
            self.det_deviation,
            self.commutator_deviation,
            self.orthogonality_deviation,
            self.hamiltonian_deviation,
        )

    def passed(self, tol=1e-10):
        return self.max_deviation < tol


@lru_cache(maxsize=None)
def _position_rows(n):
    if n == 1:
        return np.ones((1, 1))
    if n % 2 == 0:
        k = n // 2
        # pair centres of mass y_1..y_k and pair differences y_{k+1}..y_{2k}
        pair_com = np.zeros((k, n))
        pair_rel = np.zeros((k, n))
        for i in range(k):
            pair_com[i, 2 * i : 2 * i + 2] = 0.5
            pair_rel[i, 2 * i] = 1.0
            pair_rel[i, 2 * i + 1] = -1.0
        return np.vstack([_position_rows(k) @ pair_com, pair_rel])
    # odd: reuse the 2k construction, widen the centre of mass, append the last mode
    inner = _position_rows(n - 1)
    t = np.zeros((n, n))
    t[:-1, :-1] = inner
    t[0, :] = 1.0 / n
    t[-1, :-1] = 1.0 / (n - 1)
    t[-1, -1] = -1.0
    return t


def build_transform(n_osc):
    """Construct the canonical transformation for ``n_osc`` oscillators.

    Examples
    --------
    >>> tr = build_transform(2)
    >>> tr.t_matrix
    array([[ 0.5,  0.5],
           [ 1. , -1. ]])
    >>> tr.eff_masses
    array([2. , 0.5])
    """
    n = int(n_osc)
    if n != n_osc or n < 1:
        raise DomainError(f"n_osc must be a positive integer, got {n_osc!r}")
    t = _position_rows(n).copy()
    s = np.linalg.solve(t.T, np.eye(n)).copy()
    masses = 1.0 / np.einsum("ij,ij->i", t, t)
    for a in (t, s, masses):
        a.flags.writeable = False
    return CanonicalTransform(n, t, s, masses)


def verify_canonical(tr, samples=100, seed=0, mass=1.0, omega=1.0):
    """Check the invariants of ``tr`` numerically.

    The Hamiltonian identity is tested at ``samples`` phase points drawn from
    ``numpy.random.default_rng(seed)`` (PCG64), so reports are reproducible.
    """
    n = tr.n_osc
    t, s = tr.t_matrix, tr.s_matrix
    det_dev = abs(abs(np.linalg.det(t)) - 1.0)
    comm_dev = np.abs(t @ s.T - np.eye(n)).max()
    gram = t @ t.T
    ortho_dev = np.abs(gram - np.diag(np.diag(gram))).max()

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, n))
    p = rng.standard_normal((samples, n))
    h_orig = np.sum(p**2, 1) / (2 * mass) + 0.5 * mass * omega**2 * np.sum(x**2, 1)
    xt = x @ t.T
    pt = p @ s.T
    m_eff = mass * tr.eff_masses
    h_new = np.sum(pt**2 / (2 * m_eff), 1) + 0.5 * omega**2 * np.sum(m_eff * xt**2, 1)
    ham_dev = np.abs(h_orig - h_new).max() if samples else 0.0
    return ValidationReport(
        n, samples, seed, float(det_dev), float(comm_dev), float(ortho_dev), float(ham_dev)
    )


def com_component_of_difference(tr, i, j):
    """Coefficient of the centre-of-mass coordinate in ``x_i - x_j``.

    Solves ``T^T c = e_i - e_j`` so that ``x_i - x_j = sum_k c_k X~_k`` and
    returns ``c[0]``. Indices are zero-based.
    """
    n = tr.n_osc
    if not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"indices ({i}, {j}) out of range for N={n}")
    if i == j:
        raise DomainError("x_i - x_j needs two distinct oscillators")
    e = np.zeros(n)
    e[i], e[j] = 1.0, -1.0
    return float(np.linalg.solve(tr.t_matrix.T, e)[0])


def difference_coefficients(tr, i, j):
    """Full expansion of ``x_i - x_j`` in the transformed coordinates."""
    e = np.zeros(tr.n_osc)
    e[i], e[j] = 1.0, -1.0
    return np.linalg.solve(tr.t_matrix.T, e)


def transform_gaussian(state, tr, direction="forward"):
    """Carry a Gaussian state between ``(x, P)`` and ``(X~, P~)`` coordinates."""
    if state.n_modes != tr.n_osc:
        raise DomainError(
            f"state has {state.n_modes} modes but the transform is for N={tr.n_osc}"
        )
    L = tr.phase_space_map(direction)
    return GaussianState(L @ state.mean, L @ state.cov @ L.T, state.hbar)


class CanonicalTransformer(TransformerMixin, BaseEstimator):
    """Map phase points ``(x_1..x_N, P_1..P_N)`` to centre-of-mass coordinates.

    Parameters
    ----------
    n_osc : int, optional
        Number of oscillators. Inferred from ``X.shape[1] // 2`` when omitted.

    Attributes
    ----------
    transform_ : CanonicalTransform
    n_features_in_ : int
    """

    def __init__(self, n_osc=None):
        self.n_osc = n_osc

    def fit(self, X, y=None):
        X = check_array(X)
        n = self.n_osc if self.n_osc is not None else X.shape[1] // 2
        if X.shape[1] != 2 * n:
            raise DomainError(f"expected {2 * n} phase-space columns, got {X.shape[1]}")
        self.transform_ = build_transform(n)
        self.n_features_in_ = 2 * n
        return self

    def _apply(self, X, direction):
        check_is_fitted(self, "transform_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise DomainError(
                f"expected {self.n_features_in_} phase-space columns, got {X.shape[1]}"
            )
        return X @ self.transform_.phase_space_map(direction).T

    def transform(self, X):
        return self._apply(X, "forward")

    def inverse_transform(self, X):
        return self._apply(X, "inverse")
