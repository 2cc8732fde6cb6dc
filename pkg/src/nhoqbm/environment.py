"""Spectral densities of the bath and the dissipation / noise kernels.

All densities are *per oscillator*: ``I(w) = sum_j C_j**2 / (2 m_j w_j) delta(w - w_j)``
for a discrete bath whose modes couple to every system oscillator with
strength ``C_j``. The collective centre-of-mass coordinate sees ``N**2 I(w)``;
that factor is applied by the solvers, never by the caller.

Kernels::

    eta(s) = -int_0^inf I(w) sin(w s) dw
    nu(s)  =  int_0^inf I(w) coth(hbar w beta / 2) cos(w s) dw
"""

import enum
import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError

CUTOFF_SHAPES = ("exponential", "lorentz_drude", "sharp")

# exponential cutoff: e^-50 leaves a tail far below any tolerance we accept
_EXP_WINDOW = 50.0


class Regime(enum.Enum):
    FINITE = "finite"
    ZERO = "zero"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class Temperature:
    """Bath temperature as an explicit regime.

    ``Temperature.zero()`` sets ``coth -> 1``; ``Temperature.classical(beta)``
    replaces ``coth(hbar w beta / 2)`` by ``2 / (hbar w beta)``.
    """

    regime: Regime
    beta: float = math.inf

    def __post_init__(self):
        regime = Regime(self.regime)
        object.__setattr__(self, "regime", regime)
        if regime is Regime.ZERO:
            object.__setattr__(self, "beta", math.inf)
        elif not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")

    @classmethod
    def finite(cls, beta):
        return cls(Regime.FINITE, beta)

    @classmethod
    def zero(cls):
        return cls(Regime.ZERO)

    @classmethod
    def classical(cls, beta):
        return cls(Regime.CLASSICAL, beta)

    def thermal_factor(self, omega, hbar=1.0):
        """``coth(hbar w beta / 2)`` in the selected regime."""
        omega = np.asarray(omega, dtype=float)
        if self.regime is Regime.ZERO:
            return np.ones_like(omega)
        x = 0.5 * hbar * omega * self.beta
        if self.regime is Regime.CLASSICAL:
            return 1.0 / x
        return 1.0 / np.tanh(x)

    def ratio_factor(self, omega, hbar=1.0):
        """``omega * coth(...)``, finite as ``omega -> 0`` outside the zero-T regime."""
        omega = np.asarray(omega, dtype=float)
        if self.regime is Regime.ZERO:
            return omega
        two_over = 2.0 / (hbar * self.beta)
        if self.regime is Regime.CLASSICAL:
            return np.full_like(omega, two_over)
        x = 0.5 * hbar * omega * self.beta
        with np.errstate(invalid="ignore", divide="ignore"):
            xc = np.where(x < 1e-8, 1.0 + x * x / 3.0, x / np.tanh(x))
        return two_over * xc


@dataclass(frozen=True)
class SpectralModel:
    """Ohmic-family continuum or a finite list of bath modes.

    Use :meth:`ohmic` or :meth:`discrete` rather than the raw constructor.

    Continuum density::

        I(w) = (2 gamma / pi) * w * (w / cutoff)**(s_exp - 1) * f(w / cutoff)

    with ``f`` one of ``exp(-x)``, ``1 / (1 + x**2)`` or ``1[x < 1]``.
    """

    kind: str
    gamma: float = 0.0
    s_exp: float = 1.0
    cutoff: float = 1.0
    cutoff_shape: str = "exponential"
    modes: tuple = ()

    def __post_init__(self):
        if self.kind == "ohmic_family":
            if not self.gamma >= 0:
                raise DomainError(f"gamma must be >= 0, got {self.gamma!r}")
            if not self.cutoff > 0:
                raise DomainError(f"cutoff must be > 0, got {self.cutoff!r}")
            if not self.s_exp > 0:
                raise DomainError(f"s_exp must be > 0, got {self.s_exp!r}")
            if self.cutoff_shape not in CUTOFF_SHAPES:
                raise DomainError(f"unknown cutoff shape {self.cutoff_shape!r}")
        elif self.kind == "discrete":
            modes = np.asarray(self.modes, dtype=float).reshape(-1, 3)
            if np.any(modes[:, 1] <= 0) or np.any(modes[:, 2] <= 0):
                raise DomainError("bath masses and frequencies must be positive")
            object.__setattr__(self, "modes", tuple(map(tuple, modes)))
        else:
            raise DomainError(f"unknown spectral model kind {self.kind!r}")

    @classmethod
    def ohmic(cls, gamma, cutoff, s_exp=1.0, cutoff_shape="exponential"):
        return cls("ohmic_family", float(gamma), float(s_exp), float(cutoff), cutoff_shape)

    @classmethod
    def discrete(cls, couplings, masses, frequencies):
        c, m, w = np.broadcast_arrays(
            np.asarray(couplings, float), np.asarray(masses, float), np.asarray(frequencies, float)
        )
        return cls("discrete", modes=tuple(zip(c.ravel(), m.ravel(), w.ravel())))

    @property
    def is_discrete(self):
        return self.kind == "discrete"

    @property
    def coupled(self):
        if self.is_discrete:
            return bool(np.any(self.line_weights != 0))
        return self.gamma > 0

    @property
    def couplings(self):
        return np.array([m[0] for m in self.modes])

    @property
    def masses(self):
        return np.array([m[1] for m in self.modes])

    @property
    def frequencies(self):
        return np.array([m[2] for m in self.modes])

    @property
    def line_weights(self):
        """Per-oscillator line strengths ``C_j**2 / (2 m_j w_j)``."""
        c, m, w = self.couplings, self.masses, self.frequencies
        return c**2 / (2.0 * m * w)

    def density(self, omega):
        """Continuum ``I(omega)``."""
        if self.is_discrete:
            raise DomainError("a discrete bath has no pointwise density; use line_weights")
        x = np.asarray(omega, dtype=float) / self.cutoff
        return self.cutoff * (2.0 * self.gamma / np.pi) * x**self.s_exp * self._shape(x)

    def density_over_omega(self, omega):
        """``I(omega) / omega``; finite at zero for ``s_exp >= 1``."""
        x = np.asarray(omega, dtype=float) / self.cutoff
        with np.errstate(divide="ignore"):
            return (2.0 * self.gamma / np.pi) * x ** (self.s_exp - 1.0) * self._shape(x)

    def _shape(self, x):
        if self.cutoff_shape == "exponential":
            return np.exp(-x)
        if self.cutoff_shape == "lorentz_drude":
            return 1.0 / (1.0 + x * x)
        return (x < 1.0).astype(float)


def spectral_eval(model, omega):
    """Per-oscillator spectral density.

    For a continuum model returns ``I(omega)``. A discrete bath is a sum of
    delta functions, so its density is reported as an ``(n, 2)`` array of
    ``(weight, frequency)`` rows for the lines with frequency ``<= omega``.
    """
    if np.any(np.asarray(omega) < 0):
        raise DomainError("omega must be non-negative")
    if model.is_discrete:
        w = model.frequencies
        keep = w <= omega
        return np.column_stack([model.line_weights[keep], w[keep]])
    return model.density(omega)


def counterterm_stiffness(model, n_osc):
    """Spring constant that cancels the static bath shift of the centre of mass.

    ``N**2 * sum_j C_j**2 / (m_j w_j**2) = 2 N**2 int I(w) / w dw``; adding
    ``0.5 * k * X_cm**2`` to the system Hamiltonian keeps the total potential
    bounded from below.
    """
    n2 = float(n_osc) ** 2
    if model.is_discrete:
        return 2.0 * n2 * float(np.sum(model.line_weights / model.frequencies))
    if model.gamma == 0:
        return 0.0
    g = 2.0 * model.gamma / np.pi
    lam, p = model.cutoff, model.s_exp
    if model.cutoff_shape == "exponential":
        return 2.0 * n2 * g * math.gamma(p) * lam
    if model.cutoff_shape == "sharp":
        return 2.0 * n2 * g * lam / p
    if p >= 2:
        raise DomainError("Lorentz-Drude counterterm diverges for s_exp >= 2")
    # int_0^inf x^(p-1) / (1 + x^2) dx = pi / (2 sin(pi p / 2))
    return 2.0 * n2 * g * lam * np.pi / (2.0 * math.sin(np.pi * p / 2.0))


# ---------------------------------------------------------------------------
# kernels


def _closed_form_available(model):
    return not model.is_discrete and model.cutoff_shape == "exponential"


def _exp_cutoff_closed_form(model, s, which, temperature=None, hbar=1.0):
    lam, p = model.cutoff, model.s_exp
    g = 2.0 * model.gamma / np.pi
    theta = np.arctan(lam * s)
    r2 = 1.0 + (lam * s) ** 2
    if which == "eta":
        return -g * special.gamma(p + 1) * lam**2 * np.sin((p + 1) * theta) / r2 ** ((p + 1) / 2)
    if temperature.regime is Regime.ZERO:
        return g * special.gamma(p + 1) * lam**2 * np.cos((p + 1) * theta) / r2 ** ((p + 1) / 2)
    if temperature.regime is Regime.CLASSICAL:
        pref = 2.0 / (hbar * temperature.beta)
        return pref * g * special.gamma(p) * lam * np.cos(p * theta) / r2 ** (p / 2)
    return _exp_cutoff_thermal_series(model, s, hbar * temperature.beta)


def _exp_cutoff_thermal_series(model, s, hb):
    """Finite-temperature ``nu`` for the exponential cutoff, summed exactly.

    Expanding ``coth(x) = 1 + 2 sum_k exp(-2 k x)`` turns every term into a
    Laplace transform, and the sum over ``k`` is a Hurwitz zeta function::

        nu(s) = g L**(1-p) Gamma(q) Re[2 hb**-q zeta(q, z) - a**-q]

    with ``q = p + 1``, ``a = 1/L - i s`` and ``z = a / hb``. SciPy's zeta is
    real-only, so the complex evaluation goes through mpmath.
    """
    lam, p = model.cutoff, model.s_exp
    q = p + 1.0
    g = 2.0 * model.gamma / np.pi * lam ** (1.0 - p) * special.gamma(q)
    a = 1.0 / lam - 1j * np.asarray(s, dtype=float)
    zeta = np.array([complex(mpmath.zeta(q, complex(x))) for x in np.ravel(a / hb)])
    return g * (2.0 * hb**-q * zeta.reshape(a.shape) - a**-q).real


def _check_noise_domain(model, temperature):
    if temperature.regime is not Regime.ZERO and not model.is_discrete and model.s_exp < 1:
        raise DomainError(
            "sub-Ohmic density at non-zero temperature: I(w) coth(hbar w beta/2) "
            f"diverges as w**({model.s_exp - 1:g}) at w -> 0"
        )


def _quad(func, a, b, weight, wvar, rtol, atol):
    # QUADPACK flags round-off whenever atol sits below the attainable
    # accuracy; accept the result if the error estimate still meets the
    # mixed tolerance, otherwise report non-convergence.
    kwargs = dict(epsabs=atol, limit=500)
    if weight is None:
        kwargs.update(epsrel=rtol)
    elif math.isinf(b):
        kwargs.update(weight=weight, wvar=wvar, limlst=200)
    else:
        kwargs.update(weight=weight, wvar=wvar, epsrel=rtol, maxp1=200)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(func, a, b, **kwargs)
    if caught and err > 10.0 * max(atol, rtol * abs(val)):
        raise NumericError(
            f"kernel quadrature did not converge (weight={weight}, s={wvar}): "
            f"value {val:.6g}, error estimate {err:.3g}; {caught[0].message}"
        )
    return val


def _continuum_kernel_quadrature(model, s, which, temperature, hbar, rtol, atol):
    if model.gamma == 0:
        return np.zeros_like(s)
    lam = model.cutoff
    trig = "sin" if which == "eta" else "cos"
    if which == "eta":
        func = model.density
        sign = -1.0
    else:
        def func(w):
            return model.density_over_omega(w) * temperature.ratio_factor(w, hbar)
        sign = 1.0
    if model.cutoff_shape == "exponential":
        upper = _EXP_WINDOW * lam
    elif model.cutoff_shape == "sharp":
        upper = lam
    else:
        upper = math.inf
    out = np.empty_like(s)
    for k, sk in enumerate(s):
        if sk == 0 and which == "eta":
            out[k] = 0.0
            continue
        if sk == 0:
            if math.isinf(upper):
                raise NumericError(
                    "nu(0) diverges for a Lorentz-Drude density (slow 1/w tail)"
                )
            out[k] = _quad(func, 0.0, upper, None, None, rtol, atol)
        else:
            out[k] = _quad(func, 0.0, upper, trig, sk, rtol, atol)
    return sign * out


def _discrete_kernel(model, s, which, temperature=None, hbar=1.0, chunk=4096):
    w = model.frequencies
    weights = model.line_weights
    if which == "nu":
        weights = weights * temperature.thermal_factor(w, hbar)
    trig = np.sin if which == "eta" else np.cos
    sign = -1.0 if which == "eta" else 1.0
    out = np.empty_like(s)
    for start in range(0, s.size, chunk):
        block = s[start : start + chunk]
        out[start : start + chunk] = trig(np.outer(block, w)) @ weights
    return sign * out


def _as_times(s):
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(arr < 0):
        raise DomainError("kernel arguments must be non-negative")
    return arr


def dissipation_kernel(model, s, method="auto", rtol=1e-10, atol=1e-13):
    """Dissipation kernel ``eta(s)`` for ``s >= 0``.

    ``method="auto"`` uses the closed form for the exponential cutoff, the
    exact trigonometric sum for a discrete bath and adaptive oscillatory
    quadrature otherwise; ``"quadrature"`` forces quadrature for continua.
    """
    scalar = np.ndim(s) == 0
    arr = _as_times(s)
    if model.is_discrete:
        out = _discrete_kernel(model, arr, "eta")
    elif method == "auto" and _closed_form_available(model):
        out = _exp_cutoff_closed_form(model, arr, "eta")
    elif method in ("auto", "quadrature"):
        out = _continuum_kernel_quadrature(model, arr, "eta", None, 1.0, rtol, atol)
    else:
        raise DomainError(f"unknown kernel method {method!r}")
    out[arr == 0] = 0.0
    return float(out[0]) if scalar else out


def noise_kernel(model, s, temperature, hbar=1.0, method="auto", rtol=1e-10, atol=1e-13):
    """Noise kernel ``nu(s)`` for ``s >= 0`` at the given :class:`Temperature`.

    With ``method="auto"`` the exponential cutoff is evaluated in closed form
    (a Hurwitz-zeta series at finite temperature) and other continua by
    adaptive quadrature with the ``w -> 0`` limit of the integrand taken
    analytically. ``"quadrature"`` forces the quadrature path.
    """
    if not isinstance(temperature, Temperature):
        beta = float(temperature)
        if not beta > 0:
            raise DomainError(f"beta must be positive, got {temperature!r}")
        temperature = Temperature.finite(beta)
    scalar = np.ndim(s) == 0
    arr = _as_times(s)
    _check_noise_domain(model, temperature)
    if model.is_discrete:
        out = _discrete_kernel(model, arr, "nu", temperature, hbar)
    elif method == "auto" and _closed_form_available(model):
        out = _exp_cutoff_closed_form(model, arr, "nu", temperature, hbar)
    elif method in ("auto", "quadrature"):
        out = _continuum_kernel_quadrature(model, arr, "nu", temperature, hbar, rtol, atol)
    else:
        raise DomainError(f"unknown kernel method {method!r}")
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class KernelTable:
    """``eta`` and ``nu`` sampled on the uniform grid ``s_k = k * step``.

    Between nodes the kernels are interpolated linearly; ``step`` is the
    resolution floor of every solver fed from the table.
    """

    grid: np.ndarray
    eta: np.ndarray
    nu: np.ndarray
    temperature: Temperature
    hbar: float = 1.0

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def n_steps(self):
        return self.grid.size - 1

    def eta_at(self, s):
        return np.interp(s, self.grid, self.eta)

    def nu_at(self, s):
        return np.interp(np.abs(s), self.grid, self.nu)


def tabulate_kernels(model, temperature, s_max, n_steps, hbar=1.0, method="auto",
                     rtol=1e-10, atol=1e-13):
    """Tabulate ``eta`` and ``nu`` on ``n_steps + 1`` uniform nodes of ``[0, s_max]``."""
    if not s_max > 0:
        raise DomainError(f"s_max must be positive, got {s_max!r}")
    if int(n_steps) != n_steps or n_steps < 2:
        raise DomainError(f"n_steps must be an integer >= 2, got {n_steps!r}")
    grid = np.linspace(0.0, float(s_max), int(n_steps) + 1)
    if not model.coupled:
        eta = np.zeros_like(grid)
        nu = np.zeros_like(grid)
    else:
        eta = dissipation_kernel(model, grid, method, rtol, atol)
        nu = noise_kernel(model, grid, temperature, hbar, method, rtol, atol)
    eta[0] = 0.0
    for a in (grid, eta, nu):
        a.flags.writeable = False
    return KernelTable(grid, eta, nu, temperature, hbar)
