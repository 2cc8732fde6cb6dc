"""Estimator-style front ends.

``fit`` does the expensive, state-independent work (kernels, fundamental
solutions, coefficients or the bath normal modes); ``evolve`` then maps an
initial Gaussian state to a :class:`~nhoqbm.dynamics.Trajectory`. Nothing is
learned from data, so ``fit`` takes no ``X``.
"""

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import hpz
from .dynamics import QuadraticPotential, evolve, factorized_evolve
from .environment import SpectralModel, Temperature, counterterm_stiffness, tabulate_kernels
from .errors import DomainError
from .oracle import build_network, discretize_bath, exact_reduced_evolution


def _resolve(spectral, temperature):
    model = spectral if spectral is not None else SpectralModel.ohmic(0.05, 20.0)
    if temperature is None:
        temp = Temperature.zero()
    elif isinstance(temperature, Temperature):
        temp = temperature
    else:
        temp = Temperature("finite", float(temperature))
    return model, temp


class HPZMasterEquation(BaseEstimator):
    """Non-Markovian master equation for ``N`` oscillators in a common bath.

    Parameters
    ----------
    n_osc : int
    mass, omega, hbar : float
    spectral : SpectralModel, optional
        Per-oscillator spectral density; Ohmic with ``gamma=0.05`` and an
        exponential cutoff at 20 when omitted.
    temperature : Temperature or float, optional
        A float is an inverse temperature. ``None`` means zero temperature.
    t_max : float
    n_steps : int
    n_scaling : {"com_reduced", "as_printed"}
    counterterm : bool or float
    quadrature : {"gregory", "trapezoid"}
    caustic_tol : float

    Attributes
    ----------
    kernels_ : KernelTable
    fundamental_ : FundamentalSolutions
    coefficients_ : CoefficientSeries
    params_ : SystemParams

    Examples
    --------
    >>> from nhoqbm import HPZMasterEquation, GaussianState
    >>> est = HPZMasterEquation(n_osc=2, t_max=2.0, n_steps=200).fit()
    >>> traj = est.evolve(GaussianState.vacuum(2))
    >>> traj.covs.shape
    (201, 4, 4)
    """

    def __init__(self, n_osc=1, mass=1.0, omega=1.0, hbar=1.0, spectral=None,
                 temperature=None, t_max=10.0, n_steps=400, n_scaling="com_reduced",
                 counterterm=True, quadrature="gregory", caustic_tol=1e-8):
        self.n_osc = n_osc
        self.mass = mass
        self.omega = omega
        self.hbar = hbar
        self.spectral = spectral
        self.temperature = temperature
        self.t_max = t_max
        self.n_steps = n_steps
        self.n_scaling = n_scaling
        self.counterterm = counterterm
        self.quadrature = quadrature
        self.caustic_tol = caustic_tol

    def fit(self, X=None, y=None):
        model, temp = _resolve(self.spectral, self.temperature)
        self.kernels_ = tabulate_kernels(model, temp, self.t_max, self.n_steps, hbar=self.hbar)
        self.fundamental_ = hpz.solve_fundamental(
            model, self.n_osc, self.mass, self.omega, self.t_max, self.n_steps,
            hbar=self.hbar, n_scaling=self.n_scaling, counterterm=self.counterterm,
            quadrature=self.quadrature, eta=self.kernels_.eta,
        )
        self.coefficients_ = hpz.coefficients(self.fundamental_, self.kernels_,
                                              caustic_tol=self.caustic_tol)
        self.params_ = self.fundamental_.params
        return self

    def evolve(self, initial, potential=None, method="direct", strict_caustics=False):
        """Propagate ``initial`` over the fitted grid.

        ``method="factorized"`` runs the centre-of-mass / relative split; it
        agrees with ``"direct"`` to integrator accuracy.
        """
        check_is_fitted(self, "coefficients_")
        potential = potential or QuadraticPotential.none(self.n_osc)
        if method == "direct":
            run = evolve
        elif method == "factorized":
            run = factorized_evolve
        else:
            raise DomainError(f"method must be 'direct' or 'factorized', got {method!r}")
        return run(initial, self.coefficients_, potential, strict_caustics=strict_caustics)


class ExactBathOracle(BaseEstimator):
    """Exact Gaussian evolution of the system plus a finite comb of bath modes.

    ``fit`` discretizes the spectral density and assembles the network; the
    discretized bath is exposed as ``bath_`` so a master equation can be run
    on exactly the same environment.
    """

    def __init__(self, n_osc=1, mass=1.0, omega=1.0, hbar=1.0, spectral=None,
                 temperature=None, n_modes=400, omega_max=None, comb="uniform",
                 bath_mass=1.0, counterterm=True, potential=None):
        self.n_osc = n_osc
        self.mass = mass
        self.omega = omega
        self.hbar = hbar
        self.spectral = spectral
        self.temperature = temperature
        self.n_modes = n_modes
        self.omega_max = omega_max
        self.comb = comb
        self.bath_mass = bath_mass
        self.counterterm = counterterm
        self.potential = potential

    def fit(self, X=None, y=None):
        model, self.temperature_ = _resolve(self.spectral, self.temperature)
        self.bath_ = discretize_bath(model, self.n_modes, self.omega_max, self.comb,
                                     self.bath_mass)
        ct = self.counterterm
        if ct is True:
            ct = counterterm_stiffness(self.bath_.as_model(), self.n_osc)
        self.params_ = hpz.SystemParams(self.n_osc, self.mass, self.omega, self.hbar,
                                        counterterm=float(ct or 0.0))
        self.network_ = build_network(self.params_, self.bath_, self.potential)
        return self

    def evolve(self, initial, t_grid):
        check_is_fitted(self, "network_")
        return exact_reduced_evolution(self.network_, self.bath_, initial,
                                       self.temperature_, t_grid, self.hbar)
