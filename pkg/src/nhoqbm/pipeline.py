"""Scenario orchestration shared by the CLI and the estimators.

Every stage takes a validated :class:`~nhoqbm.config.ScenarioConfig`. For
oracle comparisons the master equation is fed the kernels of the very comb
the oracle uses, so the comparison tests the master equation itself rather
than the comb's approximation of a continuum.
"""

from dataclasses import dataclass

import numpy as np

from . import hpz
from .dynamics import evolve, factorized_evolve
from .environment import tabulate_kernels
from .oracle import build_network, compare, discretize_bath, exact_reduced_evolution


def kernel_table(cfg, model=None):
    model = model or cfg.spectral_model()
    return tabulate_kernels(
        model, cfg.temperature_state(), cfg.time.t_max, cfg.time.n_steps,
        hbar=cfg.hbar, rtol=cfg.solver.rel_tol, atol=cfg.solver.abs_tol,
    )


def coefficient_series(cfg, model=None, n_scaling=None):
    """Kernels, fundamental solutions and coefficients for one scenario.

    Returns
    -------
    kernels : KernelTable
    fund : FundamentalSolutions
    series : CoefficientSeries
    """
    model = model or cfg.spectral_model()
    kernels = kernel_table(cfg, model)
    fund = hpz.solve_fundamental(
        model, cfg.n_osc, cfg.mass, cfg.omega, cfg.time.t_max, cfg.time.n_steps,
        hbar=cfg.hbar, n_scaling=n_scaling or cfg.solver.n_scaling,
        counterterm=cfg.spectral.counterterm, quadrature=cfg.solver.quadrature,
        eta=kernels.eta,
    )
    series = hpz.coefficients(fund, kernels, caustic_tol=cfg.solver.caustic_tol)
    return kernels, fund, series


def master_trajectory(cfg, series, method="direct"):
    run = evolve if method == "direct" else factorized_evolve
    return run(cfg.initial_gaussian(), series, cfg.potential_model(),
               strict_caustics=cfg.solver.strict_caustics)


@dataclass
class OracleRun:
    n_scaling: str
    bath: object
    series: object
    master: object
    oracle: object
    report: object

    def passed(self, cfg):
        return self.report.passed(cfg.oracle.cov_tol, cfg.oracle.relative_tol)


def oracle_comparison(cfg, n_scaling=None):
    """Master-equation and exact trajectories on the oracle's discrete bath."""
    bath = discretize_bath(cfg.spectral_model(), cfg.oracle.n_modes, cfg.oracle.omega_max,
                           cfg.oracle.comb, cfg.oracle.bath_mass)
    model = bath.as_model()
    _, fund, series = coefficient_series(cfg, model, n_scaling)
    master = master_trajectory(cfg, series)
    net = build_network(fund.params, bath, cfg.potential_model())
    exact = exact_reduced_evolution(net, bath, cfg.initial_gaussian(), cfg.temperature_state(),
                                    series.grid, cfg.hbar)
    report = compare(master, exact)
    return OracleRun(fund.params.n_scaling, bath, series, master, exact, report)


def select_scaling(cfg):
    """Run both prefactor conventions and let the oracle pick.

    Returns the name of the mode with the smaller covariance deviation and
    the runs keyed by mode. A mode whose evolution fails outright counts as
    infinitely far from the oracle.
    """
    runs, score = {}, {}
    for mode in hpz.N_SCALINGS:
        try:
            runs[mode] = oracle_comparison(cfg, mode)
            score[mode] = runs[mode].report.max_deviation
        except (ArithmeticError, ValueError) as exc:
            runs[mode] = exc
            score[mode] = np.inf
    best = min(score, key=score.get)
    return best, runs
