"""Observables of Gaussian states: uncertainty, purity, negativity."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PhysicalityError
from .states import symplectic_eigenvalues
from .transform import transform_gaussian

# matches the trajectory warning threshold: smaller dips are integration noise
PHYSICAL_TOL = 1e-6
DIAGNOSTICS = ("uncertainty", "purity", "negativity", "physicality")


@dataclass(frozen=True)
class ModeSelection:
    """Mode indices (zero-based) in the original or transformed frame."""

    modes: tuple
    frame: str = "original"

    def __post_init__(self):
        modes = tuple(int(m) for m in np.atleast_1d(self.modes))
        if len(set(modes)) != len(modes):
            raise DomainError(f"mode indices must be distinct, got {modes}")
        if any(m < 0 for m in modes):
            raise DomainError("mode indices must be non-negative")
        if self.frame not in ("original", "transformed"):
            raise DomainError(f"frame must be 'original' or 'transformed', got {self.frame!r}")
        object.__setattr__(self, "modes", modes)

    def check(self, n_modes):
        if any(m >= n_modes for m in self.modes):
            raise DomainError(f"mode index out of range for {n_modes} modes: {self.modes}")
        return self


def _in_frame(state, frame):
    return state if frame is None else transform_gaussian(state, frame, "forward")


def _require_physical(cov, hbar):
    nu = symplectic_eigenvalues(cov)
    if nu[0] < 0.5 * hbar * (1.0 - PHYSICAL_TOL):
        raise PhysicalityError(
            f"covariance violates the uncertainty bound: symplectic eigenvalue "
            f"{nu[0]:.6g} < hbar/2"
        )
    return nu


def uncertainty_function(state, frame=None, mode=0):
    """Robertson-Schroedinger determinant of one mode in units of ``(hbar/2)**2``.

    Parameters
    ----------
    state : GaussianState
    frame : CanonicalTransform, optional
        Evaluate in the transformed coordinates; ``mode=0`` is then the
        centre of mass.
    mode : int
    """
    s = _in_frame(state, frame)
    n = s.n_modes
    if not 0 <= mode < n:
        raise DomainError(f"mode {mode} out of range for {n} modes")
    c = s.cov
    det = c[mode, mode] * c[mode + n, mode + n] - c[mode, mode + n] ** 2
    return float(det / (0.5 * s.hbar) ** 2)


def total_uncertainty(state, frame=None):
    """Product of :func:`uncertainty_function` over all modes of the frame."""
    s = _in_frame(state, frame)
    return float(np.prod([uncertainty_function(s, None, k) for k in range(s.n_modes)]))


def physicality_margin(state):
    """``min symplectic eigenvalue - hbar / 2``."""
    return state.physicality_margin()


def _selected(state, selection, frame):
    if selection is None:
        return state
    if isinstance(selection, ModeSelection):
        if selection.frame == "transformed":
            if frame is None:
                raise DomainError("a transformed-frame selection needs a transform")
            state = transform_gaussian(state, frame, "forward")
        modes = selection.check(state.n_modes).modes
    else:
        modes = ModeSelection(selection).check(state.n_modes).modes
    return state.marginal(modes)


def purity(state, selection=None, frame=None):
    """Purity ``Tr rho**2 = (hbar/2)**n / sqrt(det cov)`` of a marginal.

    Raises
    ------
    PhysicalityError
        If the marginal covariance is not a valid quantum state.
    """
    s = _selected(state, selection, frame)
    _require_physical(s.cov, s.hbar)
    _, logdet = np.linalg.slogdet(s.cov)
    return float(np.exp(s.n_modes * np.log(0.5 * s.hbar) - 0.5 * logdet))


def log_negativity(state, partition, base="e", frame=None):
    """Logarithmic negativity across a bipartition.

    Parameters
    ----------
    state : GaussianState
    partition : tuple of (ModeSelection or sequence of int)
        Disjoint mode sets ``(A, B)``; modes in neither set are traced out.
    base : {"e", "2"}
        Natural logarithm by default.

    Returns
    -------
    float
        ``sum_k max(0, -log(2 nu_k / hbar))`` over the symplectic eigenvalues
        ``nu_k`` of the partially transposed covariance.
    """
    part_a, part_b = partition
    sel = [p if isinstance(p, ModeSelection) else ModeSelection(p) for p in (part_a, part_b)]
    if sel[0].frame != sel[1].frame:
        raise DomainError("both halves of a partition must use the same frame")
    if set(sel[0].modes) & set(sel[1].modes):
        raise DomainError("partition halves must be disjoint")
    if not sel[0].modes or not sel[1].modes:
        raise DomainError("both halves of a partition must be non-empty")
    joint = ModeSelection(sel[0].modes + sel[1].modes, sel[0].frame)
    s = _selected(state, joint, frame)
    _require_physical(s.cov, s.hbar)
    na, n = len(sel[0].modes), s.n_modes
    # partial transpose on B flips the sign of B's momenta
    flip = np.ones(2 * n)
    flip[n + na :] = -1.0
    cov_pt = flip[:, None] * s.cov * flip[None, :]
    nu = symplectic_eigenvalues(cov_pt)
    ratio = 2.0 * nu / s.hbar
    ln = float(np.sum(np.maximum(0.0, -np.log(ratio))))
    if str(base) == "2":
        return ln / np.log(2.0)
    if str(base) != "e":
        raise DomainError(f"base must be 'e' or '2', got {base!r}")
    return ln


def trajectory_columns(traj, names, transform=None, partition=None, base="e"):
    """Per-snapshot diagnostic columns for CSV output.

    ``names`` is a subset of ``("uncertainty", "purity", "negativity",
    "physicality")``. Uncertainty is reported per transformed mode when a
    transform is given (``U_com, U_rel1, ...``) and per original mode
    otherwise. Negativity defaults to the split of the first oscillator from
    the rest.
    """
    cols = {}
    n = traj.n_modes
    for name in names:
        if name not in DIAGNOSTICS:
            raise DomainError(f"unknown diagnostic {name!r}; choose from {DIAGNOSTICS}")
    states = traj.states()
    if "uncertainty" in names:
        labels = (["U_com"] + [f"U_rel{k}" for k in range(1, n)]) if transform else \
            [f"U_{k}" for k in range(n)]
        frames = [_in_frame(s, transform) for s in states]
        for k, label in enumerate(labels):
            cols[label] = np.array([uncertainty_function(s, None, k) for s in frames])
        cols["U_total"] = np.prod([cols[lbl] for lbl in labels], axis=0)
    if "purity" in names:
        cols["purity"] = np.array([purity(s) for s in states])
    if "negativity" in names and n > 1:
        part = partition or ((0,), tuple(range(1, n)))
        cols["log_negativity"] = np.array([log_negativity(s, part, base) for s in states])
    if "physicality" in names:
        cols["physicality_margin"] = np.asarray(traj.physicality_margin)
    return cols
