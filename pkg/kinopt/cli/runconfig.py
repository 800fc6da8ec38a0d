import dataclasses
import logging
import os
from typing import Optional, Sequence

import yaml

from kinopt.enkf.problem import PROBLEM_KINDS, InverseProblem, make_inverse_problem
from kinopt.ga.genetic import GAParams
from kinopt.ga.selection import SelectionKind
from kinopt.pso.swarm import PSOParams
from kinopt.shared.kinopt_utils import check_file_is_there
from kinopt.shared.objective import Objective, make_benchmark
from kinopt.shared.rng import REFERENCE_STREAM, RngStream
from kinopt.shared.schedule import Schedule


logger = logging.getLogger(__name__)

ALGORITHMS = ("sa", "ga", "pso", "cbo", "cbo_memory", "enkf", "eki")
INVERSE_ALGORITHMS = ("enkf", "eki")
SEED_ENV = "KINOPT_SEED"
MAX_SEED = 2**64 - 1


def parse_overrides(overrides: Sequence[str]) -> dict:
    """KEY=VALUE strings to a mapping, values read as YAML scalars."""

    parsed = {}
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"override '{item}' is not of the form KEY=VALUE")
        parsed[key.strip()] = yaml.safe_load(value) if value.strip() else None
    return parsed


def read_yaml_mapping(filepath: str) -> dict:
    check_file_is_there(filepath)
    with open(filepath, "r") as stream:
        mapping = yaml.safe_load(stream)
    if mapping is None:
        return {}
    if not isinstance(mapping, dict):
        raise ValueError(f"{filepath}: expected a mapping of parameter names to values")
    return mapping


def resolve_seed(cli_seed: Optional[int], config_seed: Optional[int]) -> int:
    """--seed, then the configuration file, then KINOPT_SEED, then 0."""

    if cli_seed is not None:
        seed = cli_seed
    elif config_seed is not None:
        seed = config_seed
    elif os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise ValueError(f"{SEED_ENV} must be an integer, got '{os.environ[SEED_ENV]}'")
    else:
        seed = 0
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed


"""
RunConfig:

Everything one run needs. Parameters of all algorithms live side by
side; those of other algorithms are ignored. For enkf and eki the
objective names the inverse problem (identity, random, tanh).
"""
@dataclasses.dataclass
class RunConfig:
    algorithm: str = "sa"
    objective: str = "quadratic"
    d: int = 1
    N: int = 100
    steps: int = 1000
    seed: Optional[int] = None
    output: str = "kinopt_run"
    initial_mean: float = 0.0
    initial_std: float = 1.0
    # simulated annealing
    schedule: str = "logarithmic"
    temperature: float = 1.0
    cooling: float = 1.0
    ratio: float = 0.99
    proposal_factor: float = 1.0
    update_probability: float = 1.0
    # genetic algorithm and consensus
    sigma: float = 0.1
    nu: float = 0.5
    selection: str = "boltzmann_gibbs"
    alpha: float = 10.0
    weighted_retention: bool = True
    lam: float = 1.0
    # particle swarm and consensus with memory
    pso_mode: str = "sde"
    c1: float = 2.0
    c2: float = 2.0
    inertia_weight: float = 1.0
    lam1: float = 1.0
    lam2: float = 1.0
    sigma1: float = 0.7
    sigma2: float = 0.7
    m: float = 0.5
    pso_nu: float = 1.0
    beta: float = 30.0
    dt: float = 0.01
    velocity_std: float = 0.0
    printed_heaviside: bool = False
    # ensemble Kalman
    data_dim: Optional[int] = None
    noise_scale: float = 1.0
    h: float = 0.01
    horizon: Optional[float] = None
    method: str = "euler"
    kappa: float = 1.0
    eki_beta: float = 0.0

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        fields = {field.name for field in dataclasses.fields(cls)}
        unknown = set(mapping) - fields
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**mapping)

    @classmethod
    def load(cls, filepath: Optional[str] = None, overrides: Sequence[str] = (),
             seed: Optional[int] = None) -> "RunConfig":
        """File values, then --set overrides, then the resolved seed."""

        mapping = read_yaml_mapping(filepath) if filepath is not None else {}
        mapping.update(parse_overrides(overrides))
        config = cls.from_mapping(mapping)
        config.seed = resolve_seed(seed, config.seed)
        return config

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def is_inverse(self) -> bool:
        return self.algorithm in INVERSE_ALGORITHMS

    def objective_function(self) -> Objective:
        return make_benchmark(self.objective, self.d)

    def inverse_problem(self) -> InverseProblem:
        return make_inverse_problem(self.objective, self.d,
                                    RngStream(self.seed).substream(REFERENCE_STREAM),
                                    m=self.data_dim, noise_scale=self.noise_scale)

    def make_schedule(self) -> Schedule:
        if self.schedule == "constant":
            return Schedule.constant(self.temperature)
        if self.schedule == "geometric":
            return Schedule.geometric(self.temperature, self.ratio)
        if self.schedule == "logarithmic":
            return Schedule.logarithmic(self.cooling)
        raise ValueError(f"unknown schedule '{self.schedule}'")

    def ga_params(self) -> GAParams:
        selection = SelectionKind(self.selection, self.alpha) \
            if self.selection == "boltzmann_gibbs" else SelectionKind(self.selection)
        return GAParams(N=self.N, sigma=self.sigma, nu=self.nu, selection=selection,
                        weighted_retention=self.weighted_retention)

    def pso_params(self) -> PSOParams:
        common = dict(nu=self.pso_nu, beta=self.beta, alpha=self.alpha, dt=self.dt,
                      printed_heaviside=self.printed_heaviside)
        if self.pso_mode == "classic":
            return PSOParams.classic_sde(self.c1, self.c2, inertia_weight=self.inertia_weight,
                                         **common)
        return PSOParams(c1=self.c1, c2=self.c2, lam1=self.lam1, lam2=self.lam2,
                         sigma1=self.sigma1, sigma2=self.sigma2, m=self.m, **common)

    @property
    def eki_horizon(self) -> float:
        return self.horizon if self.horizon is not None else self.steps * self.h

    def validate(self):
        """Checks every field the chosen algorithm reads; raises ValueError."""

        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm '{self.algorithm}', expected one of {ALGORITHMS}")
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")
        if self.N < 1:
            raise ValueError(f"ensemble size must be positive, got {self.N}")
        if self.steps < 0:
            raise ValueError(f"steps must be nonnegative, got {self.steps}")
        if self.initial_std < 0.0:
            raise ValueError(f"initial_std must be nonnegative, got {self.initial_std}")
        if not self.output or os.sep in self.output:
            raise ValueError(f"output must be a plain file prefix, got '{self.output}'")

        if self.is_inverse:
            if self.objective not in PROBLEM_KINDS:
                raise ValueError(f"{self.algorithm} needs an inverse problem in {PROBLEM_KINDS}, "
                                 f"got '{self.objective}'")
        else:
            self.objective_function()

        if self.algorithm == "sa":
            self.make_schedule()
            if not self.proposal_factor > 0.0:
                raise ValueError(f"proposal_factor must be positive, got {self.proposal_factor}")
            if not 0.0 < self.update_probability <= 1.0:
                raise ValueError("update_probability must lie in (0, 1]")
        elif self.algorithm == "ga":
            self.ga_params()
        elif self.algorithm in ("pso", "cbo_memory"):
            if self.pso_mode not in ("sde", "classic"):
                raise ValueError(f"pso_mode must be 'sde' or 'classic', got '{self.pso_mode}'")
            self.pso_params()
        elif self.algorithm == "cbo":
            if not self.dt > 0.0 or self.sigma < 0.0 or self.alpha < 0.0:
                raise ValueError("cbo needs dt > 0, sigma >= 0 and alpha >= 0")
        elif self.algorithm == "enkf":
            if not self.dt > 0.0:
                raise ValueError(f"time step must be positive, got {self.dt}")
            if not self.noise_scale > 0.0:
                raise ValueError(f"noise_scale must be positive, got {self.noise_scale}")
        else:
            if not self.h > 0.0 or not self.eki_horizon >= 0.0:
                raise ValueError("eki needs h > 0 and a nonnegative horizon")
            if self.method not in ("euler", "rk4"):
                raise ValueError(f"unknown integration method '{self.method}'")
            if self.N < 2:
                raise ValueError("the ensemble flow needs N >= 2")
        logger.debug(f"validated configuration for {self.algorithm}")
