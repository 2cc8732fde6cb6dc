"""Fundamental solutions, Green functions and the master-equation coefficients.

The homogeneous memory equation for the collective coordinate is::

    v''(s) + Omega_b**2 v(s) + k_mem * int_0^s eta(s - l) v(l) dl = 0

with ``Omega_b**2 = Omega**2 + k_ct / (N M)`` (``k_ct`` is the optional
counterterm stiffness) and ``k_mem`` a mode-dependent prefactor:

``as_printed``
    ``k_mem = N**2 / M`` and the coefficient prefactors exactly as the
    original derivation displays them.
``com_reduced``
    The centre-of-mass reduction: mass ``N M``, density ``N**2 I``, giving
    ``k_mem = 2 N / M`` and the single-oscillator coefficient formulas with
    those substitutions.

Two independent solutions ``v1`` (``v1(0)=1, v1'(0)=0``) and ``v2``
(``v2(0)=0, v2'(0)=1``) span the solution space; all boundary-value
functions and Green functions are linear combinations of them.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import quadrature as quad
from .environment import counterterm_stiffness, dissipation_kernel
from .errors import CausticError, DomainError, NumericError

N_SCALINGS = ("as_printed", "com_reduced")

_OVERFLOW_GUARD = 1e100
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
# integral over [0, 1] of the cubic through nodes 0, 1, 2, 3
_FIRST_INTERVAL_RULE = np.array([9.0, 19.0, -5.0, 1.0]) / 24.0


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the oscillator system.

    Parameters
    ----------
    n_osc : int
    mass, omega, hbar : float
    n_scaling : {"as_printed", "com_reduced"}
    counterterm : float
        Centre-of-mass counterterm stiffness (``0`` disables it).
    """

    n_osc: int = 1
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    n_scaling: str = "com_reduced"
    counterterm: float = 0.0

    def __post_init__(self):
        if int(self.n_osc) != self.n_osc or self.n_osc < 1:
            raise DomainError(f"n_osc must be a positive integer, got {self.n_osc!r}")
        for name in ("mass", "omega", "hbar"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.n_scaling not in N_SCALINGS:
            raise DomainError(f"n_scaling must be one of {N_SCALINGS}, got {self.n_scaling!r}")
        if self.counterterm < 0:
            raise DomainError("counterterm stiffness must be non-negative")

    @property
    def com_mass(self):
        return self.n_osc * self.mass

    @property
    def omega_b2(self):
        """Squared bare frequency of the collective coordinate incl. counterterm."""
        return self.omega**2 + self.counterterm / self.com_mass

    @property
    def memory_factor(self):
        n, m = self.n_osc, self.mass
        return n**2 / m if self.n_scaling == "as_printed" else 2.0 * n / m

    def prefactors(self):
        """Multipliers of the single and triple integrals in ``a, b, c, d``.

        Keys ``a, b, c1, d1`` scale the single integrals and ``c3, d3`` the
        triple ones (subtracted).
        """
        n, m, hb = self.n_osc, self.mass, self.hbar
        if self.n_scaling == "as_printed":
            return dict(a=n, b=n / m, c1=hb / (n * m), d1=hb / n,
                        c3=n**2 * hb / m**2, d3=n**2 * hb / m)
        return dict(a=2.0 * n**2, b=2.0 * n / m, c1=hb * n / m, d1=hb * n**2,
                    c3=2.0 * n**2 * hb / m**2, d3=2.0 * n**3 * hb / m)


@dataclass(frozen=True)
class FundamentalSolutions:
    """Two independent solutions of the memory equation on a uniform grid.

    ``v*_ddot`` are the second derivatives implied by the equation; they feed
    the Hermite interpolants of :class:`GreenFunction`.
    """

    grid: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v1_dot: np.ndarray
    v2_dot: np.ndarray
    v1_ddot: np.ndarray
    v2_ddot: np.ndarray
    params: SystemParams
    eta: np.ndarray
    quadrature: str = "gregory"

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def n_steps(self):
        return self.grid.size - 1

    @property
    def wronskian(self):
        return self.v1 * self.v2_dot - self.v1_dot * self.v2


@dataclass(frozen=True)
class CoefficientSeries:
    """``a(t), b(t), c(t), d(t)`` on a time grid.

    ``caustic`` marks samples where ``v2(t)`` (the denominator of the
    elementary-function construction) is numerically zero. ``parts`` keeps the
    raw single and triple integrals for inspection.
    """

    grid: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    caustic: np.ndarray
    provenance: dict = field(default_factory=dict)
    parts: dict = field(default_factory=dict, repr=False)

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    def as_array(self):
        """Columns ``(t, a, b, c, d, caustic_flag)``."""
        return np.column_stack([self.grid, self.a, self.b, self.c, self.d,
                                self.caustic.astype(float)])


def _lagrange(nodes, x):
    out = np.ones((len(nodes),) + np.shape(x))
    for i, xi in enumerate(nodes):
        for j, xj in enumerate(nodes):
            if i != j:
                out[i] *= (x - xj) / (xi - xj)
    return out


def _phi_weights(w, h, nodes):
    """Exact-propagator weights for a polynomial forcing on one step.

    Returns ``(P, Q)`` with ``P_r = int_0^h sin(w (h - x)) / w L_r(x / h) dx``
    and ``Q_r = int_0^h cos(w (h - x)) L_r(x / h) dx`` for the Lagrange basis
    on the relative nodes ``nodes`` (in units of ``h``).
    """
    x = 0.5 * h * (_GL_NODES + 1.0)
    gw = 0.5 * h * _GL_WEIGHTS
    L = _lagrange(np.asarray(nodes, float), x / h)
    sin_part = np.sin(w * (h - x)) / w
    cos_part = np.cos(w * (h - x))
    return L @ (gw * sin_part), L @ (gw * cos_part)


def _check_grid(t_max, n_steps):
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max!r}")
    if int(n_steps) != n_steps or n_steps < 2:
        raise DomainError(f"n_steps must be an integer >= 2, got {n_steps!r}")
    return np.linspace(0.0, float(t_max), int(n_steps) + 1)


def _integrate_memory_equation(eta, h, w2, k_mem, rule, startup_sweeps=3):
    """March both fundamental solutions; returns ``(v, vdot, vddot)`` of shape (n+1, 2)."""
    n = eta.size - 1
    if not w2 > 0:
        raise DomainError(
            f"collective frequency squared is {w2:g} <= 0; the bare potential is not confining"
        )
    w = np.sqrt(w2)
    c, sn = np.cos(w * h), np.sin(w * h)
    # cubic forcing stencils: centred-left in the bulk, shifted forward for the
    # first two steps (those are then iterated to self-consistency)
    bulk = _phi_weights(w, h, (-2.0, -1.0, 0.0, 1.0))
    first = {0: _phi_weights(w, h, (0.0, 1.0, 2.0, 3.0)),
             1: _phi_weights(w, h, (-1.0, 0.0, 1.0, 2.0))}
    low = {0: _phi_weights(w, h, (0.0, 1.0)), 1: _phi_weights(w, h, (-1.0, 0.0, 1.0))}

    v = np.zeros((n + 1, 2))
    vd = np.zeros((n + 1, 2))
    force = np.zeros((n + 1, 2))
    v[0] = (1.0, 0.0)
    vd[0] = (0.0, 1.0)

    def memory_force(k):
        # eta(0) = 0, so the memory at s_k needs only v_0..v_{k-1}: no implicit solve
        wts = quad.weights(k, h, rule)[:k]
        return -k_mem * ((wts * eta[k:0:-1]) @ v[:k])

    def step(k, P, Q, lo):
        f = force[lo : lo + len(P)]
        v[k + 1] = c * v[k] + (sn / w) * vd[k] + P @ f
        vd[k + 1] = -w * sn * v[k] + c * vd[k] + Q @ f
        if not np.all(np.abs(v[k + 1]) < _OVERFLOW_GUARD):
            raise NumericError(
                f"fundamental solution left the finite range at s = {(k + 1) * h:.6g}"
            )

    n_start = min(n, 3)
    for k in range(n_start):
        force[k + 1] = memory_force(k + 1)
        P, Q = low.get(k, bulk)
        step(k, P, Q, max(k - len(P) + 2, 0))
    if n >= 3:
        for _ in range(startup_sweeps):
            for k in range(2):
                step(k, *first[k], 0)
                force[k + 2] = memory_force(k + 2)
            step(2, *bulk, 0)
            force[3] = memory_force(3)
    for k in range(n_start, n):
        force[k + 1] = memory_force(k + 1)
        step(k, *bulk, k - 2)
    return v, vd, -w2 * v + force


def solve_fundamental(model, n_osc, mass=1.0, omega=1.0, t_max=10.0, n_steps=1000, *,
                      hbar=1.0, n_scaling="com_reduced", counterterm=True,
                      quadrature="gregory", eta=None):
    """Solve the memory equation for ``v1`` and ``v2``.

    Parameters
    ----------
    model : SpectralModel
        Per-oscillator bath. Ignored for the kernel values when ``eta`` is given,
        but still used for the counterterm.
    n_osc : int
    mass, omega : float
    t_max : float
    n_steps : int
        Number of uniform steps; the grid has ``n_steps + 1`` nodes. The step
        should resolve the bath cutoff (``h * cutoff`` well below 1), otherwise
        the coefficients and hence the evolved covariances lose accuracy.
    n_scaling : {"as_printed", "com_reduced"}
    counterterm : bool or float
        ``True`` adds the stiffness from :func:`counterterm_stiffness`; a
        number sets it explicitly.
    quadrature : {"gregory", "trapezoid"}
        Rule for the memory integral.
    eta : array_like, optional
        Precomputed ``eta`` on the grid.

    Returns
    -------
    FundamentalSolutions

    Notes
    -----
    The harmonic part is propagated exactly; the memory force is interpolated
    by a cubic through the last four nodes, which together with the Gregory
    rule makes the scheme fourth order in the step.
    """
    grid = _check_grid(t_max, n_steps)
    h = grid[1] - grid[0]
    if counterterm is True:
        kct = counterterm_stiffness(model, n_osc)
    else:
        kct = float(counterterm or 0.0)
    params = SystemParams(int(n_osc), float(mass), float(omega), float(hbar), n_scaling, kct)
    if eta is None:
        eta = dissipation_kernel(model, grid)
    eta = np.array(eta, dtype=float)
    if eta.shape != grid.shape:
        raise DomainError(f"eta has {eta.size} samples, grid has {grid.size}")
    eta[0] = 0.0
    v, vd, vdd = _integrate_memory_equation(
        eta, h, params.omega_b2, params.memory_factor, quadrature
    )
    arrays = [grid, v[:, 0], v[:, 1], vd[:, 0], vd[:, 1], vdd[:, 0], vdd[:, 1], eta]
    arrays = [np.ascontiguousarray(a) for a in arrays]
    for a in arrays:
        a.flags.writeable = False
    g, v1, v2, v1d, v2d, v1dd, v2dd, eta = arrays
    return FundamentalSolutions(g, v1, v2, v1d, v2d, v1dd, v2dd, params, eta, quadrature)


def _nearest_zero(grid, values, t):
    sign = np.signbit(values[1:])
    idx = np.nonzero(sign[1:] != sign[:-1])[0] + 1
    if idx.size == 0:
        return None
    # linear root in each bracketing interval
    a, b = values[idx], values[idx + 1]
    roots = grid[idx] - a * (grid[idx + 1] - grid[idx]) / (b - a)
    exact = grid[1:][values[1:] == 0]
    roots = np.concatenate([roots, exact])
    return float(roots[np.argmin(np.abs(roots - t))])


def _grid_index(grid, t):
    i = int(round(t / (grid[1] - grid[0])))
    if i < 0 or i >= grid.size or not np.isclose(grid[i], t, rtol=0, atol=1e-9 * grid[-1]):
        raise DomainError(f"t = {t!r} is not a grid node")
    return i


def elementary_functions(fund, t, caustic_tol=1e-8):
    """Boundary-value solutions ``u1``, ``u2`` on ``[0, t]``.

    ``u1(0) = 1, u1(t) = 0`` and ``u2(0) = 0, u2(t) = 1``.

    Parameters
    ----------
    fund : FundamentalSolutions
    t : float
        Final time; must be a grid node.
    caustic_tol : float
        Threshold on ``|v2(t)|`` relative to ``max |v2|``.

    Returns
    -------
    u1, u2 : ndarray
        Samples on ``fund.grid[: i + 1]``.
    """
    i = _grid_index(fund.grid, t)
    v1, v2 = fund.v1[: i + 1], fund.v2[: i + 1]
    v2t = fund.v2[i]
    scale = np.max(np.abs(fund.v2))
    if i == 0 or abs(v2t) <= caustic_tol * scale:
        raise CausticError(
            f"v2 vanishes at t = {t:g}; the boundary problem for u1, u2 is degenerate",
            t=float(t),
            nearest_zero=_nearest_zero(fund.grid, fund.v2, t) if i else 0.0,
        )
    u2 = v2 / v2t
    u1 = v1 - (fund.v1[i] / v2t) * v2
    u1[-1] = 0.0
    u2[-1] = 1.0
    return u1, u2


class GreenFunction:
    """Retarded Green function ``G1(s, tau) = v2(s - tau) * [s >= tau]``.

    The memory kernel depends only on ``s - l`` and ``G1`` vanishes before
    ``tau``, so the delta-driven problem is solved by a shifted ``v2``. Off-grid
    values come from cubic Hermite interpolation using the exact derivatives.
    """

    def __init__(self, fund):
        self.fund = fund
        self._g = CubicHermiteSpline(fund.grid, fund.v2, fund.v2_dot)
        self._gp = CubicHermiteSpline(fund.grid, fund.v2_dot, fund.v2_ddot)
        self.t_max = float(fund.grid[-1])

    def _lag(self, s, tau):
        lag = np.asarray(s, float) - np.asarray(tau, float)
        if np.any(lag > self.t_max * (1 + 1e-12)):
            raise DomainError(f"s - tau exceeds the solved range [0, {self.t_max:g}]")
        return lag

    def __call__(self, s, tau):
        lag = self._lag(s, tau)
        return np.where(lag >= 0, self._g(np.clip(lag, 0, self.t_max)), 0.0)

    def derivative(self, s, tau):
        """``dG1/ds``; jumps from 0 to 1 at ``s = tau``."""
        lag = self._lag(s, tau)
        return np.where(lag >= 0, self._gp(np.clip(lag, 0, self.t_max)), 0.0)


def green_function(fund):
    return GreenFunction(fund)


def caustic_mask(fund, caustic_tol=1e-8):
    """Grid nodes ``t > 0`` at which ``v2(t)`` is numerically zero."""
    mask = np.abs(fund.v2) <= caustic_tol * np.max(np.abs(fund.v2))
    mask[0] = False
    return mask


def _match_kernels(fund, kernels):
    h = fund.step
    if kernels.grid.size < fund.grid.size or not np.isclose(kernels.step, h, rtol=1e-12):
        raise DomainError(
            "kernel table must share the fundamental-solution step and cover its range"
        )
    n = fund.grid.size
    return kernels.eta[:n], kernels.nu[:n]


def coefficients(fund, kernels, t_grid=None, *, quadrature=None, caustic_tol=1e-8):
    """Master-equation coefficients ``a, b, c, d`` on the solver grid.

    Parameters
    ----------
    fund : FundamentalSolutions
    kernels : KernelTable
        Must use the same step as ``fund``; only ``nu`` is read from it.
    t_grid : array_like, optional
        Subset of grid nodes to report; defaults to the whole grid.
    quadrature : {"gregory", "trapezoid"}, optional
        Defaults to the rule used for ``fund``.
    caustic_tol : float

    Returns
    -------
    CoefficientSeries

    Notes
    -----
    The elementary functions enter through combinations that stay finite at
    zeros of ``v2`` once written with the Wronskian ``W = v1 v2' - v1' v2``::

        u2(s) - u1(s) u2'(t) / u1'(t) = (v2'(t) v1(s) - v1'(t) v2(s)) / W(t)
        u1(s) / u1'(t)                = (v1(t) v2(s) - v2(t) v1(s)) / W(t)

    so every node gets a finite value; nodes where the ``u`` construction
    itself degenerates are flagged in ``caustic``.

    In ``com_reduced`` mode the second Green function carries terminal
    conditions at ``t``::

        G2(s, tau) = G1(s, tau) - alpha_t(s) v2(t - tau) - beta_t(s) v2'(t - tau)

    with ``alpha_t``, ``beta_t`` the two combinations above. In
    ``as_printed`` mode ``G2 = G1``; the triple integrals then run over
    ``tau >= s`` where the retarded ``G1(s, tau)`` vanishes, so they are zero.
    """
    rule = quadrature or fund.quadrature
    params = fund.params
    eta, nu = _match_kernels(fund, kernels)
    nu = nu * params.hbar
    n = fund.n_steps
    h = fund.step
    v1, v2, v1d, v2d = fund.v1, fund.v2, fund.v1_dot, fund.v2_dot
    wr = fund.wronskian

    Wq = quad.weight_matrix(n, h, rule)
    idx = np.arange(n + 1)
    lag = idx[:, None] - idx[None, :]
    lower = lag >= 0
    lag_c = np.where(lower, lag, 0)
    # E[i, s] = w_i(s) eta(t_i - s);  V[i, l] = w_i(l) v2(t_i - l)
    E = Wq * np.where(lower, eta[lag_c], 0.0)
    V = Wq * np.where(lower, v2[lag_c], 0.0)
    Vd = Wq * np.where(lower, v2d[lag_c], 0.0)
    del lag_c, lower

    Ev1, Ev2 = E @ v1, E @ v2
    i_a = (v2d * Ev1 - v1d * Ev2) / wr
    i_b = (v1 * Ev2 - v2 * Ev1) / wr

    Nu = nu[np.abs(lag)]
    del lag
    i_c1 = np.einsum("ij,ij->i", V, Nu)
    i_d1 = np.einsum("ij,ij->i", Vd, Nu)

    pref = params.prefactors()
    if params.n_scaling == "com_reduced":
        Ax = V @ Nu
        Ad = Vd @ Nu
        del Nu
        EV = E @ V
        nxx = np.einsum("ij,ij->i", Ax, V)
        nxv = np.einsum("ij,ij->i", Ax, Vd)
        nvv = np.einsum("ij,ij->i", Ad, Vd)
        t_c = np.einsum("ij,ij->i", Ax, EV) - i_a * nxx - i_b * nxv
        t_d = np.einsum("ij,ij->i", Ad, EV) - i_a * nxv - i_b * nvv
    else:
        t_c = np.zeros(n + 1)
        t_d = np.zeros(n + 1)

    if rule == "gregory" and n >= 3:
        # one interval admits only the trapezoid rule; instead integrate over
        # [0, h] with the four-node rule, reading the integrands (which are
        # smooth, eta being odd) one and two steps beyond t_1
        q = h * _FIRST_INTERVAL_RULE
        eta_ext = np.array([eta[1], 0.0, -eta[1], -eta[2]])
        alpha = (v2d[1] * v1[:4] - v1d[1] * v2[:4]) / wr[1]
        beta_ = (v1[1] * v2[:4] - v2[1] * v1[:4]) / wr[1]
        i_a[1] = q @ (eta_ext * alpha)
        i_b[1] = q @ (eta_ext * beta_)
        i_c1[1] = q @ (v2[:4] * nu[:4])
        i_d1[1] = q @ (v2d[:4] * nu[:4])
    a = pref["a"] * i_a
    b = pref["b"] * i_b
    c = pref["c1"] * i_c1 - pref["c3"] * t_c
    d = pref["d1"] * i_d1 - pref["d3"] * t_d
    for arr in (a, b, c, d):
        arr[0] = 0.0
    caustic = caustic_mask(fund, caustic_tol)

    sel = slice(None)
    grid = fund.grid
    if t_grid is not None:
        sel = np.array([_grid_index(grid, t) for t in np.atleast_1d(t_grid)])
    parts = dict(i_a=i_a, i_b=i_b, i_c1=i_c1, i_d1=i_d1, t_c=t_c, t_d=t_d)
    parts = {k: v[sel].copy() for k, v in parts.items()}
    provenance = dict(
        n_osc=params.n_osc, mass=params.mass, omega=params.omega, hbar=params.hbar,
        n_scaling=params.n_scaling, counterterm=params.counterterm,
        temperature=kernels.temperature.regime.value, beta=kernels.temperature.beta,
        step=h, n_steps=n, quadrature=rule, caustic_tol=caustic_tol,
    )
    out = [np.array(x[sel], dtype=float) for x in (grid, a, b, c, d)]
    out.append(np.array(caustic[sel]))
    for arr in out:
        arr.flags.writeable = False
    return CoefficientSeries(*out, provenance=provenance, parts=parts)


def grid_halving_deviation(coarse, fine):
    """Sup-norm change of each coefficient between a grid and its halving.

    ``fine`` must have exactly twice as many steps over the same horizon.
    Returns a dict of deviations relative to each series' maximum magnitude.
    """
    if fine.grid.size != 2 * coarse.grid.size - 1 or not np.isclose(
        fine.grid[-1], coarse.grid[-1]
    ):
        raise DomainError("fine series must halve the step of the coarse series")
    out = {}
    for name in ("a", "b", "c", "d"):
        x, y = getattr(coarse, name), getattr(fine, name)[::2]
        scale = np.max(np.abs(y))
        out[name] = float(np.max(np.abs(x - y)) / scale) if scale > 0 else float(np.max(np.abs(x)))
    return out
