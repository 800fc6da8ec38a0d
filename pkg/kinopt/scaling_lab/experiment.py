import dataclasses
import logging
from typing import Sequence

import numpy as np
import pandas as pd
import yaml

from kinopt.enkf.collapse import enkf_collapse_experiment
from kinopt.enkf.problem import PROBLEM_KINDS, make_inverse_problem
from kinopt.ga.contraction import ga_contraction_check
from kinopt.ga.genetic import GAParams
from kinopt.ga.scaling import ga_quasi_invariant_experiment
from kinopt.ga.selection import SelectionKind
from kinopt.pso.scaling import zero_inertia_experiment
from kinopt.pso.swarm import PSOParams
from kinopt.sa.scaling import sa_diffusion_scaling
from kinopt.shared.errors import UnsupportedComparisonError
from kinopt.shared.kinopt_utils import check_file_is_there, ordered_map
from kinopt.shared.objective import make_benchmark
from kinopt.shared.rng import REFERENCE_STREAM, RngStream


logger = logging.getLogger(__name__)

REPLICATES = 5
COLLAPSE_SLOPE_RANGE = (-1.2, -0.8)

# kind-specific parameters and their defaults
KIND_PARAMS = {
    "sa_diffusion": dict(T=1.0, initial_mean=0.0, initial_std=1.0, langevin_dt=1e-3),
    "ga_quasi_invariant": dict(sigma=0.5, alpha=1.0, lam=1.0, initial_mean=0.0,
                               initial_std=1.0, cbo_dt=1e-3),
    "pso_zero_inertia": dict(lam1=1.0, lam2=1.0, sigma1=0.7, sigma2=0.7, nu=1.0, beta=30.0,
                             alpha=50.0, dt=0.01, initial_mean=0.0, initial_std=1.0),
    "ga_contraction": dict(sigma=0.01, alpha=50.0, steps=200, accuracy=0.05,
                           initial_mean=1.0, initial_std=1.0),
    "enkf_collapse": dict(method="euler", initial_mean=0.0, initial_std=1.0),
}
EXPERIMENT_KINDS = tuple(KIND_PARAMS)
DISTANCE_KINDS = ("sa_diffusion", "ga_quasi_invariant", "pso_zero_inertia")


"""
ExperimentSpec:

One scaling or envelope experiment. scales are the eps values (SA, GA
limits), inertias m (PSO), nu values (GA contraction) or step sizes h
(EnKF collapse), largest first. For enkf_collapse, objective names the
inverse problem (identity, random, tanh).
"""
@dataclasses.dataclass
class ExperimentSpec:
    kind: str
    scales: list
    objective: str
    N: int
    horizon: float
    seed: int = 0
    d: int = 1
    params: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind '{self.kind}', "
                             f"expected one of {EXPERIMENT_KINDS}")
        self.scales = [float(s) for s in self.scales]
        if not self.scales:
            raise ValueError("an experiment needs at least one scale")
        if any(s <= 0.0 for s in self.scales):
            raise ValueError(f"scales must be strictly positive, got {self.scales}")
        if any(a <= b for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError(f"scales must be sorted strictly descending, got {self.scales}")
        min_N = 2 if self.kind == "enkf_collapse" else 100
        if self.N < min_N:
            raise ValueError(f"{self.kind} needs N >= {min_N}, got {self.N}")
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.kind in DISTANCE_KINDS and self.d != 1:
            raise UnsupportedComparisonError(f"{self.kind} compares 1D laws, got d={self.d}")
        if self.kind == "enkf_collapse" and self.objective not in PROBLEM_KINDS:
            raise ValueError(f"enkf_collapse needs an inverse problem in {PROBLEM_KINDS}, "
                             f"got '{self.objective}'")

        unknown = set(self.params) - set(KIND_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        self.params = {**KIND_PARAMS[self.kind], **self.params}

    @classmethod
    def from_dict(cls, mapping: dict) -> "ExperimentSpec":
        if not isinstance(mapping, dict):
            raise ValueError("an experiment spec must be a mapping")
        fields = {field.name for field in dataclasses.fields(cls)}
        unknown = set(mapping) - fields
        if unknown:
            raise ValueError(f"unknown experiment spec keys: {sorted(unknown)}")
        return cls(**mapping)

    @classmethod
    def from_yaml(cls, filepath: str) -> "ExperimentSpec":
        check_file_is_there(filepath)
        with open(filepath, "r") as stream:
            return cls.from_dict(yaml.safe_load(stream))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class ExperimentRow:
    scale: float
    value: float
    mc_error: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def monotone_verdict(values: Sequence[float], noise_floor: float) -> bool:
    """
    Scales are ordered largest first, so values must not rise along the
    rows by more than twice the noise floor from one scale to the next.
    """
    for earlier, later in zip(values, values[1:]):
        if later > earlier + 2.0 * noise_floor:
            return False
    return True


"""
ExperimentReport:

Per-scale rows plus everything needed to rerun the experiment. The pass
flag is derived from the rows on every access.
"""
@dataclasses.dataclass
class ExperimentReport:
    spec: ExperimentSpec
    rows: list
    noise_floor: float = 0.0

    @property
    def passed(self) -> bool:
        values = [row.value for row in self.rows]
        if self.spec.kind in DISTANCE_KINDS:
            return monotone_verdict(values, self.noise_floor)
        if self.spec.kind == "ga_contraction":
            return all(value <= 0.0 for value in values)
        low, high = COLLAPSE_SLOPE_RANGE
        return all(low <= value <= high for value in values)

    def to_dict(self) -> dict:
        return {"kind": self.spec.kind,
                "objective": self.spec.objective,
                "N": self.spec.N,
                "d": self.spec.d,
                "horizon": self.spec.horizon,
                "seed": self.spec.seed,
                "scales": list(self.spec.scales),
                "params": dict(self.spec.params),
                "noise_floor": self.noise_floor,
                "rows": [row.to_dict() for row in self.rows],
                "pass": self.passed}


def _distance_replicate(spec: ExperimentSpec, rng: RngStream) -> list[float]:
    obj = make_benchmark(spec.objective, spec.d)
    p = spec.params
    if spec.kind == "sa_diffusion":
        rows = sa_diffusion_scaling(spec.scales, obj, p["T"], spec.horizon, spec.N, rng,
                                    p["initial_mean"], p["initial_std"], p["langevin_dt"])
    elif spec.kind == "ga_quasi_invariant":
        params = GAParams(N=spec.N, sigma=p["sigma"],
                          selection=SelectionKind.boltzmann_gibbs(p["alpha"]))
        rows = ga_quasi_invariant_experiment(spec.scales, params, obj, spec.horizon, spec.N,
                                             rng, p["lam"], p["initial_mean"], p["initial_std"],
                                             p["cbo_dt"])
    else:
        params = PSOParams(**{key: p[key] for key in ("lam1", "lam2", "sigma1", "sigma2",
                                                      "nu", "beta", "alpha", "dt")})
        rows = zero_inertia_experiment(spec.scales, params, obj, spec.horizon, spec.N, rng,
                                       p["initial_mean"], p["initial_std"])
    return [row.distance for row in rows]


def _contraction_value(report) -> float:
    """
    Worst excess of the error over its envelope before the accuracy step,
    or the remaining distance to the accuracy when it was never reached.
    """
    if report.accuracy_step is None:
        last, checked = len(report.errors) - 1, len(report.errors)
    else:
        last = checked = report.accuracy_step
    excess = max((error - envelope - 3.0 * stderr for error, envelope, stderr
                  in zip(report.errors[:checked], report.envelopes[:checked],
                         report.stderrs[:checked])), default=0.0)
    return max(excess, report.errors[last] - report.accuracy)


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentReport:
    """
    Dispatches the spec to its experiment. Distance experiments are
    repeated over seed replicates whose spread sets the noise floor;
    replicates (or scales) run on up to threads workers.
    """
    rng = RngStream(spec.seed)
    p = spec.params
    logger.info(f"experiment {spec.kind} on {spec.objective}: scales {spec.scales}, "
                f"N={spec.N}, horizon={spec.horizon}, seed={spec.seed}")

    if spec.kind in DISTANCE_KINDS:

        def replicate(r):
            return _distance_replicate(spec, rng.substream(r))

        distances = np.array(ordered_map(replicate, range(REPLICATES), threads))
        spreads = distances.std(axis=0, ddof=1)
        rows = [ExperimentRow(scale, float(value), float(spread / np.sqrt(REPLICATES)))
                for scale, value, spread in zip(spec.scales, distances.mean(axis=0), spreads)]
        report = ExperimentReport(spec, rows, noise_floor=float(spreads.max()))

    elif spec.kind == "ga_contraction":
        obj = make_benchmark(spec.objective, spec.d)

        def contraction(item):
            i, nu = item
            return ga_contraction_check(obj, nu, p["sigma"], p["alpha"], spec.N,
                                        int(p["steps"]), rng.substream(i), p["accuracy"],
                                        p["initial_mean"], p["initial_std"])

        checks = ordered_map(contraction, list(enumerate(spec.scales)), threads)
        rows = [ExperimentRow(nu, float(_contraction_value(check)), float(check.stderrs[-1]))
                for nu, check in zip(spec.scales, checks)]
        report = ExperimentReport(spec, rows)

    else:
        problem = make_inverse_problem(spec.objective, spec.d, rng.substream(REFERENCE_STREAM))

        def collapse(h):
            return enkf_collapse_experiment([h], problem, spec.N, spec.horizon, rng,
                                            p["initial_mean"], p["initial_std"], p["method"])[0]

        rows = [ExperimentRow(row.scale, row.slope, 0.0)
                for row in ordered_map(collapse, spec.scales, threads)]
        report = ExperimentReport(spec, rows)

    logger.info(f"experiment {spec.kind}: pass={report.passed}")
    return report


SUMMARY_COLUMNS = ["kind", "objective", "N", "d", "horizon", "seed", "n_scales",
                   "first_scale", "first_value", "last_scale", "last_value",
                   "noise_floor", "pass"]


def summarize(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    """One row per experiment with its verdict and headline numbers."""

    if not reports:
        raise ValueError("nothing to summarize")
    records = []
    for report in reports:
        spec = report.spec
        records.append(dict(kind=spec.kind, objective=spec.objective, N=spec.N, d=spec.d,
                            horizon=spec.horizon, seed=spec.seed, n_scales=len(report.rows),
                            first_scale=report.rows[0].scale, first_value=report.rows[0].value,
                            last_scale=report.rows[-1].scale, last_value=report.rows[-1].value,
                            noise_floor=report.noise_floor, pass_=report.passed))
    frame = pd.DataFrame.from_records(records).rename(columns={"pass_": "pass"})
    return frame[SUMMARY_COLUMNS]
