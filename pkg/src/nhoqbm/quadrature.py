"""Uniform-grid quadrature weights and interpolation stencils.

Everything downstream of the kernel tables integrates over uniform grids, so
the rules here are the only place the quadrature order is decided.
"""

from functools import lru_cache

import numpy as np

RULES = ("gregory", "trapezoid")

_GREGORY_END = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


@lru_cache(maxsize=4096)
def _weights_cached(m, rule):
    if m == 0:
        return np.zeros(1)
    if rule == "trapezoid" or m == 1:
        w = np.ones(m + 1)
        w[0] = w[-1] = 0.5
        return w
    if m == 2:
        return np.array([1.0, 4.0, 1.0]) / 3.0
    if m == 3:
        return np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    if m == 4:
        return np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 3.0
    if m == 5:
        w = np.zeros(6)
        w[:3] += np.array([1.0, 4.0, 1.0]) / 3.0
        w[2:] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
        return w
    w = np.ones(m + 1)
    w[:3] = _GREGORY_END
    w[-3:] = _GREGORY_END[::-1]
    return w


def weights(m, h, rule="gregory"):
    """Quadrature weights for ``m`` uniform intervals of width ``h``.

    Parameters
    ----------
    m : int
        Number of intervals (the rule has ``m + 1`` nodes).
    h : float
        Grid spacing.
    rule : {"gregory", "trapezoid"}
        ``"gregory"`` is fourth order: Simpson / 3-8 rules for ``m < 6`` and
        the Gregory end-corrected trapezoid rule beyond.

    Returns
    -------
    ndarray, shape (m + 1,)
    """
    if rule not in RULES:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    w = _weights_cached(int(m), rule)
    w = w * h
    w.flags.writeable = False
    return w


def weight_matrix(n, h, rule="gregory"):
    """Lower-triangular matrix whose row ``i`` holds the weights for ``[0, t_i]``."""
    W = np.zeros((n + 1, n + 1))
    for i in range(1, n + 1):
        W[i, : i + 1] = weights(i, h, rule)
    return W


def midpoints(values):
    """Values half-way between consecutive nodes by local cubic interpolation.

    Uses the centred stencil ``(-1, 9, 9, -1) / 16`` in the interior and
    one-sided cubics at the ends; falls back to linear interpolation for
    fewer than four samples.
    """
    f = np.asarray(values, dtype=float)
    n = f.shape[0]
    if n < 4:
        return 0.5 * (f[1:] + f[:-1])
    mid = np.empty((n - 1,) + f.shape[1:])
    mid[1:-1] = (-f[:-3] + 9.0 * f[1:-2] + 9.0 * f[2:-1] - f[3:]) / 16.0
    mid[0] = (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
    mid[-1] = (5.0 * f[-1] + 15.0 * f[-2] - 5.0 * f[-3] + f[-4]) / 16.0
    return mid
