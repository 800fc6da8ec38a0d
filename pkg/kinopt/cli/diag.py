import logging
import os
import sys
from typing import Optional, Sequence

import click
import numpy as np

from kinopt.cli import _options
from kinopt.cli.exitcodes import EXIT_OK, EXIT_USAGE, USAGE_ERRORS, exit_code_for
from kinopt.cli.runconfig import RunConfig
from kinopt.cli.writers import write_csv, write_json
from kinopt.diagnostics.entropy import gibbs_density, laplace_functional
from kinopt.diagnostics.measures import (DEFAULT_NODES, EmpiricalMeasure, GridDensity1D,
                                         uniform_grid)
from kinopt.shared.growth import GrowthConstants, verify_growth_conditions
from kinopt.shared.objective import Objective
from kinopt.shared.rng import INIT_STREAM, REFERENCE_STREAM, RngStream
from kinopt.utils import setlogger


logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURES = (1.0, 0.3, 0.1, 0.03)


def uniform_reference(obj: Objective, samples: int, rng: RngStream):
    """Uniform law on the objective's box: a grid density in 1D, samples otherwise."""

    if obj.d == 1:
        nodes = uniform_grid(-obj.half_width, obj.half_width, DEFAULT_NODES)
        return GridDensity1D(nodes, np.full(nodes.size, 0.5 / obj.half_width))
    return EmpiricalMeasure(rng.uniform((samples, obj.d), -obj.half_width, obj.half_width))


def temperature_ladder(obj: Objective, temperatures: Sequence[float], samples: int,
                       rng: RngStream) -> list[dict]:
    """Laplace functional of the uniform law per temperature, with Z_T in 1D."""

    reference = uniform_reference(obj, samples, rng)
    support = reference.nodes if isinstance(reference, GridDensity1D) else reference.support
    support_min = float(np.min(obj.eval(support.reshape(-1, obj.d))))
    rows = []
    for T in temperatures:
        row = dict(temperature=float(T),
                   laplace=laplace_functional(reference, obj, T),
                   support_min=support_min)
        row["gap"] = row["laplace"] - support_min
        if obj.d == 1:
            row["gibbs_normalizer"] = gibbs_density(obj, T, reference.nodes).normalizer
        rows.append(row)
    return rows


def cmd_diag(config_path: Optional[str] = None, overrides: Sequence[str] = (),
             seed: Optional[int] = None, out: str = "./", debug: bool = False,
             temperatures: Sequence[float] = DEFAULT_TEMPERATURES,
             samples: int = 4096) -> int:
    """
    Diagnostics of the configured objective: <output>_diag.csv holds the
    temperature ladder, <output>_diag.json adds the growth-condition report.
    """
    os.makedirs(out, exist_ok=True)
    setlogger.setconfig(out, "diag", debug)

    try:
        config = RunConfig.load(config_path, overrides, seed)
        obj = config.objective_function()
        if not temperatures or any(T <= 0.0 for T in temperatures):
            raise ValueError("temperatures must be a nonempty list of positive values")
        if samples < 1:
            raise ValueError(f"samples must be positive, got {samples}")
    except USAGE_ERRORS as err:
        logger.error(f"invalid diagnostics request: {err}")
        click.echo(f"Error: {err}", err=True)
        return EXIT_USAGE

    rng = RngStream(config.seed)
    try:
        rows = temperature_ladder(obj, sorted(temperatures, reverse=True), samples,
                                  rng.substream(INIT_STREAM))
        growth = None
        if obj.known_min is not None:
            growth = verify_growth_conditions(obj, GrowthConstants(), samples,
                                              rng.substream(REFERENCE_STREAM)).to_dict()
    except Exception as err:
        logger.error(f"diagnostics failed: {err}")
        click.echo(f"Error: {err}", err=True)
        return exit_code_for(err)

    prefix = os.path.join(out, config.output)
    write_csv(prefix + "_diag.csv", rows, config.to_dict())
    write_json(prefix + "_diag.json", dict(objective=obj.name, d=obj.d, ladder=rows,
                                           growth=growth), config.to_dict())
    return EXIT_OK


@click.command()
@_options.common_options
@click.option("--temperature", "-T", "temperatures",
              type = click.FloatRange(min=0.0, min_open=True),
              multiple = True,
              help =
              """
              Temperature of the Laplace ladder, repeatable.
              Defaults to 1, 0.3, 0.1 and 0.03
              """
)
@click.option("--samples",
              type = click.IntRange(min=1),
              default = 4096,
              help =
              """
              Sample count for the growth report and for the
              uniform reference law when d > 1
              """
)
def diag(config, seed, threads, out, overrides, debug, temperatures, samples):
    """Laplace ladder, Gibbs normalisation and growth conditions of an objective."""
    sys.exit(cmd_diag(config, overrides, seed, out, debug,
                      temperatures or DEFAULT_TEMPERATURES, samples))
