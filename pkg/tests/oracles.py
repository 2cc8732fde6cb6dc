"""Reference implementations used as test oracles.

Each function here is written from the defining integrals, independently of
the package code paths it checks:

* kernel closed forms come from the Laplace transform
  ``int_0^inf w**p exp(-w/L) exp(i w s) dw = Gamma(p+1) (1/L - i s)**-(p+1)``
  evaluated with complex arithmetic (the package uses the real polar form);
* the memory equation for a discrete bath is re-expressed as a local ODE
  system in the bath coordinates and handed to ``scipy.integrate.solve_ivp``;
* single-oscillator coefficients are assembled time by time from the
  elementary functions ``u1``, ``u2`` and an explicit second Green function
  matrix, where the package uses Wronskian forms and global lag matrices.
"""

import numpy as np
from scipy import integrate, special

from nhoqbm import quadrature as quad


# -- kernels ---------------------------------------------------------------


def _laplace(p, lam, s):
    z = 1.0 / lam - 1j * np.asarray(s, dtype=complex)
    return special.gamma(p + 1) * z ** (-(p + 1))


def exp_cutoff_eta(gamma, lam, s, p=1.0):
    """``-int I(w) sin(w s) dw`` for ``I = (2 gamma/pi) L**(1-p) w**p exp(-w/L)``."""
    g = 2.0 * gamma / np.pi * lam ** (1.0 - p)
    return -g * _laplace(p, lam, s).imag


def exp_cutoff_nu_zero(gamma, lam, s, p=1.0):
    g = 2.0 * gamma / np.pi * lam ** (1.0 - p)
    return g * _laplace(p, lam, s).real


def exp_cutoff_nu_classical(gamma, lam, beta, s, p=1.0, hbar=1.0):
    """High-temperature noise kernel: ``coth(x) -> 1/x``."""
    g = 2.0 * gamma / np.pi * lam ** (1.0 - p)
    return 2.0 / (hbar * beta) * g * _laplace(p - 1.0, lam, s).real


def lorentz_drude_eta(gamma, lam, s):
    """Ohmic Lorentz-Drude: ``-(2 gamma/pi) int w sin(ws) / (1 + (w/L)**2) dw``."""
    return -gamma * lam**2 * np.exp(-lam * np.asarray(s, float))


def sharp_cutoff_eta(gamma, lam, s):
    """Ohmic sharp cutoff, elementary antiderivative; ``s > 0``."""
    s = np.asarray(s, float)
    g = 2.0 * gamma / np.pi
    return -g * (np.sin(lam * s) - lam * s * np.cos(lam * s)) / s**2


def comb_kernels(couplings, masses, freqs, s, beta=None, hbar=1.0):
    """Direct line sums for a discrete bath (loop over modes)."""
    eta = np.zeros_like(np.asarray(s, float))
    nu = np.zeros_like(eta)
    for c, m, w in zip(couplings, masses, freqs):
        weight = c * c / (2.0 * m * w)
        eta -= weight * np.sin(w * s)
        th = 1.0 if beta is None else 1.0 / np.tanh(0.5 * hbar * w * beta)
        nu += weight * th * np.cos(w * s)
    return eta, nu


# -- memory equation -------------------------------------------------------


def memory_solution_ode(couplings, masses, freqs, omega_b2, k_mem, t_grid):
    """Fundamental solutions of ``v'' + Ob^2 v + k int eta(s-l) v(l) dl = 0``.

    For ``eta = -sum_j lam_j sin(w_j s)`` the memory term equals
    ``-k sum_j lam_j w_j y_j`` with auxiliary oscillators
    ``y_j'' + w_j^2 y_j = v``, ``y_j(0) = y_j'(0) = 0``.
    """
    lam = np.asarray(couplings) ** 2 / (2.0 * np.asarray(masses) * np.asarray(freqs))
    w = np.asarray(freqs, float)
    nb = w.size

    def rhs(_, z):
        v, vd, y, yd = z[0], z[1], z[2 : 2 + nb], z[2 + nb :]
        acc = -omega_b2 * v + k_mem * np.sum(lam * w * y)
        return np.concatenate([[vd, acc], yd, v - w**2 * y])

    out = []
    for init in ((1.0, 0.0), (0.0, 1.0)):
        z0 = np.zeros(2 + 2 * nb)
        z0[:2] = init
        sol = integrate.solve_ivp(rhs, (t_grid[0], t_grid[-1]), z0, t_eval=t_grid,
                                  method="DOP853", rtol=1e-12, atol=1e-14)
        out.append((sol.y[0], sol.y[1]))
    return out


# -- single-oscillator coefficients ---------------------------------------

_FIRST = np.array([9.0, 19.0, -5.0, 1.0]) / 24.0


def single_oscillator_coefficients(fund, nu, hbar=1.0, mass=1.0, skip=()):
    """Coefficients of one oscillator in its own bath, node by node.

    Uses the textbook elementary-function form ``u1, u2`` and, for the triple
    integrals, an explicit matrix ``G2[s, tau]`` at every final time. The
    fundamental solutions and the quadrature weights are taken as given.
    Nodes in ``skip`` (caustics) are returned as NaN. The raw integrals are
    returned too (keys ``i_a, i_b, i_c1, i_d1, t_c, t_d``); they carry no
    prefactors, so they also serve as a reference for ``N > 1``.
    """
    v1, v2, v1d, v2d = fund.v1, fund.v2, fund.v1_dot, fund.v2_dot
    eta = fund.eta
    nu = np.asarray(nu, float) * hbar
    n, h = fund.n_steps, fund.step
    keys = ("a", "b", "c", "d", "i_a", "i_b", "i_c1", "i_d1", "t_c", "t_d")
    out = {k: np.zeros(n + 1) for k in keys}
    Wrows = [quad.weights(i, h) for i in range(n + 1)]
    for i in range(1, n + 1):
        if i in skip:
            for k in keys:
                out[k][i] = np.nan
            continue
        m = np.arange(i + 1)
        u2 = v2[: i + 1] / v2[i]
        u1 = v1[: i + 1] - v1[i] / v2[i] * v2[: i + 1]
        du2 = v2d[i] / v2[i]
        du1 = v1d[i] - v1[i] / v2[i] * v2d[i]
        alpha = u2 - u1 * du2 / du1
        beta = u1 / du1
        w = Wrows[i]
        back = i - m
        ia = np.sum(w * eta[back] * alpha)
        ib = np.sum(w * eta[back] * beta)
        ic = np.sum(w * v2[back] * nu[back])
        id_ = np.sum(w * v2d[back] * nu[back])
        if i == 1 and n >= 3:
            # four-node rule on [0, h] with eta continued as an odd function
            e4 = np.array([eta[1], 0.0, -eta[1], -eta[2]])
            x = np.arange(4)
            a4 = v2[x] / v2[1] - (v1[x] - v1[1] / v2[1] * v2[x]) * du2 / du1
            b4 = (v1[x] - v1[1] / v2[1] * v2[x]) / du1
            ia = h * _FIRST @ (e4 * a4)
            ib = h * _FIRST @ (e4 * b4)
            ic = h * _FIRST @ (v2[x] * nu[x])
            id_ = h * _FIRST @ (v2d[x] * nu[x])
        # G2[s, tau] with quadrature weight in tau folded in
        G2 = np.zeros((i + 1, i + 1))
        for s in range(1, i + 1):
            G2[s, : s + 1] = Wrows[s] * v2[s - np.arange(s + 1)]
        G2 -= np.outer(alpha, w * v2[back]) + np.outer(beta, w * v2d[back])
        nu_mat = nu[np.abs(m[:, None] - m[None, :])]
        inner = G2 @ nu_mat  # inner[s, l] = int G2(s, tau) nu(l - tau) dtau
        left = w * eta[back]
        tc = left @ inner @ (w * v2[back])
        td = left @ inner @ (w * v2d[back])
        for key, val in zip(keys[4:], (ia, ib, ic, id_, tc, td)):
            out[key][i] = val
        out["a"][i] = 2.0 * ia
        out["b"][i] = 2.0 / mass * ib
        out["c"][i] = hbar / mass * ic - 2.0 * hbar / mass**2 * tc
        out["d"][i] = hbar * id_ - 2.0 * hbar / mass * td
    return out


# -- states ----------------------------------------------------------------


def tmsv_log_negativity(r):
    """Two-mode squeezed vacuum: ``E_N = 2 r`` (natural log)."""
    return 2.0 * r


def thermal_purity(beta, omega=1.0, hbar=1.0):
    """``hbar / (2 nu_bar)`` with ``nu_bar = (hbar/2) coth(beta hbar omega / 2)``."""
    nu_bar = 0.5 * hbar / np.tanh(0.5 * beta * hbar * omega)
    return hbar / (2.0 * nu_bar)
