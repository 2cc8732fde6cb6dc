"""Scenario configuration: JSON schema, defaults and object builders."""

import hashlib
import json
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat,
                      PositiveInt, ValidationError, model_validator)

from .dynamics import QuadraticPotential
from .environment import CUTOFF_SHAPES, SpectralModel, Temperature
from .errors import DomainError
from .states import GaussianState


class ConfigError(DomainError):
    """Schema violation; ``path`` is the dotted location of the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PotentialConfig(_Block):
    pattern: Literal["none", "chain", "all_pairs", "dense"] = "none"
    kappa: NonNegativeFloat = 0.0
    matrix: Optional[List[List[float]]] = None


class SpectralConfig(_Block):
    kind: Literal["ohmic_family", "discrete"] = "ohmic_family"
    gamma: NonNegativeFloat = 0.05
    s_exp: PositiveFloat = 1.0
    cutoff: PositiveFloat = 20.0
    cutoff_shape: Literal[CUTOFF_SHAPES] = "exponential"
    counterterm: bool = True
    #: (coupling, mass, frequency) per bath mode for ``kind = "discrete"``
    modes: Optional[List[Tuple[float, PositiveFloat, PositiveFloat]]] = None

    @model_validator(mode="after")
    def _modes_for_discrete(self):
        if self.kind == "discrete" and not self.modes:
            raise ValueError("a discrete spectral model needs a non-empty 'modes' list")
        return self


class TemperatureConfig(_Block):
    regime: Literal["finite", "zero", "classical"] = "finite"
    beta: Optional[PositiveFloat] = 1.0

    @model_validator(mode="after")
    def _beta_needed(self):
        if self.regime != "zero" and self.beta is None:
            raise ValueError(f"regime '{self.regime}' needs beta")
        return self


class TimeConfig(_Block):
    t_max: PositiveFloat = 10.0
    n_steps: int = Field(400, ge=2)


class SolverConfig(_Block):
    rel_tol: PositiveFloat = 1e-10
    abs_tol: PositiveFloat = 1e-13
    n_scaling: Literal["as_printed", "com_reduced"] = "com_reduced"
    quadrature: Literal["gregory", "trapezoid"] = "gregory"
    caustic_tol: PositiveFloat = 1e-8
    strict_caustics: bool = False


class OracleConfig(_Block):
    n_modes: PositiveInt = 400
    omega_max: Optional[PositiveFloat] = None
    comb: Literal["uniform", "gauss_legendre"] = "uniform"
    bath_mass: PositiveFloat = 1.0
    cov_tol: PositiveFloat = 0.02
    relative_tol: PositiveFloat = 1e-8


class InitialStateConfig(_Block):
    kind: Literal["vacuum", "thermal", "explicit"] = "vacuum"
    beta: Optional[PositiveFloat] = None
    mean: Optional[List[float]] = None
    cov: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _complete(self):
        if self.kind == "thermal" and self.beta is None:
            raise ValueError("a thermal initial state needs beta")
        if self.kind == "explicit" and self.cov is None:
            raise ValueError("an explicit initial state needs cov")
        return self


class OutputConfig(_Block):
    dir: str = "out"
    diagnostics: List[Literal["uncertainty", "purity", "negativity", "physicality"]] = []
    negativity_base: Literal["e", "2"] = "e"
    plot: bool = False


class ScenarioConfig(_Block):
    """One simulation scenario; every block has defaults."""

    n_osc: PositiveInt = 1
    mass: PositiveFloat = 1.0
    omega: PositiveFloat = 1.0
    hbar: PositiveFloat = 1.0
    potential: PotentialConfig = PotentialConfig()
    spectral: SpectralConfig = SpectralConfig()
    temperature: TemperatureConfig = TemperatureConfig()
    time: TimeConfig = TimeConfig()
    solver: SolverConfig = SolverConfig()
    oracle: OracleConfig = OracleConfig()
    initial_state: InitialStateConfig = InitialStateConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _shapes(self):
        n = self.n_osc
        if self.potential.pattern == "dense":
            m = self.potential.matrix
            if m is None or len(m) != n or any(len(r) != n for r in m):
                raise ValueError(f"potential.matrix must be {n}x{n} for the dense pattern")
        st = self.initial_state
        if st.mean is not None and len(st.mean) != 2 * n:
            raise ValueError(f"initial_state.mean must have length {2 * n}")
        if st.cov is not None and (len(st.cov) != 2 * n or any(len(r) != 2 * n for r in st.cov)):
            raise ValueError(f"initial_state.cov must be {2 * n}x{2 * n}")
        return self

    # -- builders ---------------------------------------------------------

    def spectral_model(self):
        s = self.spectral
        if s.kind == "discrete":
            c, m, w = np.array(s.modes, dtype=float).T
            return SpectralModel.discrete(c, m, w)
        return SpectralModel.ohmic(s.gamma, s.cutoff, s.s_exp, s.cutoff_shape)

    def temperature_state(self):
        t = self.temperature
        if t.regime == "zero":
            return Temperature.zero()
        return Temperature(t.regime, t.beta)

    def potential_model(self):
        p, n = self.potential, self.n_osc
        if p.pattern == "none":
            return QuadraticPotential.none(n)
        if p.pattern == "chain":
            return QuadraticPotential.chain(n, p.kappa)
        if p.pattern == "all_pairs":
            return QuadraticPotential.all_pairs(n, p.kappa)
        return QuadraticPotential(np.array(p.matrix, dtype=float))

    def initial_gaussian(self):
        st, n = self.initial_state, self.n_osc
        mean = None if st.mean is None else np.array(st.mean, dtype=float)
        if st.kind == "explicit":
            return GaussianState(mean if mean is not None else np.zeros(2 * n),
                                 np.array(st.cov, dtype=float), self.hbar)
        if st.kind == "thermal":
            base = GaussianState.thermal(n, st.beta, self.mass, self.omega, self.hbar)
        else:
            base = GaussianState.vacuum(n, self.mass, self.omega, self.hbar)
        return GaussianState(base.mean if mean is None else mean, base.cov, self.hbar)


def _error_path(err):
    first = err.errors()[0]
    loc = ".".join(str(p) for p in first["loc"])
    return first["msg"], loc


def parse_config(text):
    """Parse and validate a JSON scenario.

    Raises
    ------
    ConfigError
        On malformed JSON or schema violations; the message starts with the
        dotted path of the first offending key (e.g. ``temperature.beta``).
    """
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        msg, loc = _error_path(exc)
        raise ConfigError(msg, loc) from None


def load_config(path=None):
    if path is None:
        return ScenarioConfig()
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg):
    """Canonical JSON text (sorted keys) that :func:`parse_config` reads back."""
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True)


def config_hash(cfg):
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()
