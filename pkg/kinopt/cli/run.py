import dataclasses
import logging
import os
import sys
import time
from typing import Optional, Sequence

import click
import numpy as np
import numpy.typing as npt

from kinopt.cli import _options
from kinopt.cli.exitcodes import (EXIT_DIVERGENCE, EXIT_OK, EXIT_USAGE, USAGE_ERRORS,
                                  exit_code_for)
from kinopt.cli.runconfig import RunConfig
from kinopt.cli.writers import write_csv, write_json, write_snapshots
from kinopt.enkf.update import eki_integrate, run_enkf, run_modified_eki
from kinopt.ga.cbo import run_cbo
from kinopt.ga.genetic import run_ga
from kinopt.pso.classic import run_pso_classic
from kinopt.pso.memory import run_cbo_memory
from kinopt.pso.sde import run_pso_sde
from kinopt.pso.swarm import SwarmState
from kinopt.sa.annealing import run_sa_ensemble
from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import DivergenceError, NumericError
from kinopt.shared.rng import INIT_STREAM, RngStream
from kinopt.utils import setlogger


logger = logging.getLogger(__name__)


@dataclasses.dataclass
class RunResult:
    best_point: npt.NDArray
    best_energy: float
    initial_energy: float
    final_energy: float
    steps: int
    trajectory: Trajectory
    minimizer: Optional[npt.NDArray] = None

    @property
    def error(self) -> Optional[float]:
        if self.minimizer is None:
            return None
        return float(np.linalg.norm(self.best_point - self.minimizer))

    def summary(self) -> dict:
        summary = dict(best_point=np.atleast_1d(self.best_point), best_energy=self.best_energy,
                       initial_energy=self.initial_energy, final_energy=self.final_energy,
                       steps=self.steps, status="ok")
        if self.minimizer is not None:
            summary["error"] = self.error
        return summary


def run_algorithm(config: RunConfig) -> RunResult:
    """Runs the configured algorithm serially; the result depends on the config alone."""

    rng = RngStream(config.seed)
    if config.is_inverse:
        problem = config.inverse_problem()
        energy, minimizer = problem.misfit, problem.x_star
        d = problem.d
    else:
        obj = config.objective_function()
        energy, minimizer = obj.eval, obj.minimizer
        d = obj.d
    initial = Ensemble.gaussian(config.N, d, rng.substream(INIT_STREAM),
                                config.initial_mean, config.initial_std)
    initial_energy = float(np.mean(energy(initial.positions)))
    steps = config.steps

    if config.algorithm == "sa":
        trajectory = run_sa_ensemble(config.N, steps, obj, config.make_schedule(), rng, initial,
                                     update_probability=config.update_probability,
                                     proposal_factor=config.proposal_factor)
        X = trajectory.final.positions
        E = obj.eval(X)
        best = X[int(np.argmin(E))].copy()
        best_energy = float(E.min())

    elif config.algorithm == "ga":
        best, best_energy, trajectory = run_ga(initial, config.ga_params(), obj, steps, rng)

    elif config.algorithm == "pso":
        params = config.pso_params()
        V = config.velocity_std * rng.substream(INIT_STREAM).substream(1).normal(
            initial.positions.shape)
        swarm = SwarmState.from_positions(initial.positions, obj, V)
        runner = run_pso_classic if config.pso_mode == "classic" else run_pso_sde
        best, best_energy, trajectory = runner(swarm, params, obj, steps, rng)

    elif config.algorithm == "cbo":
        best, trajectory = run_cbo(initial, config.lam, config.sigma, config.alpha, config.dt,
                                   steps, obj, rng)
        best_energy = float(obj.eval(best))

    elif config.algorithm == "cbo_memory":
        params = config.pso_params()
        s1, s2 = params.effective_noise
        best, trajectory = run_cbo_memory(initial.positions, initial.positions.copy(),
                                          params.lam1, params.lam2, s1, s2, params.nu,
                                          params.beta, params.alpha, params.dt, steps, obj, rng)
        best_energy = float(obj.eval(best))

    elif config.algorithm == "enkf":
        best, trajectory = run_enkf(initial, problem, config.dt, steps)
        best_energy = float(problem.misfit(best))

    else:
        steps = int(round(config.eki_horizon / config.h))
        if config.kappa == 1.0 and config.eki_beta == 0.0:
            trajectory = eki_integrate(initial, problem, config.eki_horizon, config.h,
                                       method=config.method)
        else:
            trajectory = run_modified_eki(initial, problem, config.kappa, config.eki_beta,
                                          config.h, steps)
        best = trajectory.final.mean()
        best_energy = float(problem.misfit(best))

    final_energy = float(np.mean(energy(trajectory.final.positions)))
    return RunResult(np.asarray(best, dtype=np.float64), best_energy, initial_energy,
                     final_energy, steps, trajectory, minimizer)


def cmd_run(config_path: Optional[str] = None, overrides: Sequence[str] = (),
            seed: Optional[int] = None, out: str = "./", debug: bool = False,
            snapshots: bool = False) -> int:
    """
    Loads and validates the configuration, runs it and writes
    <output>.csv (per-step rows), <output>.json (summary) and, with
    snapshots, <output>.nc. Returns the exit code.
    """
    os.makedirs(out, exist_ok=True)
    setlogger.setconfig(out, "run", debug)

    try:
        config = RunConfig.load(config_path, overrides, seed)
        config.validate()
    except USAGE_ERRORS as err:
        logger.error(f"invalid configuration: {err}")
        click.echo(f"Error: {err}", err=True)
        return EXIT_USAGE

    prefix = os.path.join(out, config.output)
    logger.info(f"running {config.algorithm} on {config.objective} (d={config.d}, "
                f"N={config.N}, seed={config.seed})")
    start = time.perf_counter()
    try:
        result = run_algorithm(config)
    except (DivergenceError, NumericError) as err:
        logger.error(f"run diverged: {err}")
        click.echo(f"Error: {err}", err=True)
        write_json(prefix + ".json",
                   dict(status="diverged", error=str(err),
                        last_valid_step=getattr(err, "last_valid_step", None),
                        last_valid_time=getattr(err, "last_valid_time", None),
                        wall_time=time.perf_counter() - start),
                   config.to_dict())
        return EXIT_DIVERGENCE
    except Exception as err:
        code = exit_code_for(err)
        logger.error(f"run failed: {err}")
        click.echo(f"Error: {err}", err=True)
        return code

    write_csv(prefix + ".csv", result.trajectory.rows, config.to_dict())
    write_json(prefix + ".json", dict(result.summary(), wall_time=time.perf_counter() - start),
               config.to_dict())
    if snapshots:
        write_snapshots(prefix + ".nc", result.trajectory, config.to_dict())
    logger.info(f"best energy {result.best_energy:.6g} after {result.steps} steps")
    return EXIT_OK


@click.command()
@_options.common_options
@click.option("--snapshots",
              is_flag = True,
              default = False,
              help =
              """
              Also write the recorded ensemble snapshots to
              <output>.nc
              """
)
def run(config, seed, threads, out, overrides, debug, snapshots):
    """Run one algorithm on one objective or inverse problem."""
    # a single run is serial; threads only matter for scale and bench
    sys.exit(cmd_run(config, overrides, seed, out, debug, snapshots))
