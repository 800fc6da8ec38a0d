import logging
import os
import sys
from typing import Optional, Sequence

import click
import numpy as np

from kinopt.cli import _options
from kinopt.cli.exitcodes import EXIT_OK, EXIT_USAGE, USAGE_ERRORS
from kinopt.cli.run import run_algorithm
from kinopt.cli.runconfig import RunConfig, parse_overrides, read_yaml_mapping, resolve_seed
from kinopt.cli.writers import write_csv
from kinopt.shared.errors import DivergenceError, NumericError
from kinopt.shared.kinopt_utils import ordered_map
from kinopt.utils import setlogger


logger = logging.getLogger(__name__)

SUCCESS_RADIUS = 0.25


def repetition_seed(base: int, entry: int, repetition: int) -> int:
    seedseq = np.random.SeedSequence(base, spawn_key=(entry, repetition))
    return int(seedseq.generate_state(1, np.uint64)[0])


def load_suite(filepath: str, overrides: Sequence[str] = (),
               seed: Optional[int] = None) -> tuple[int, list[tuple[RunConfig, int]]]:
    """
    A suite file has an optional base seed and a nonempty list 'runs' of
    run configurations, each with its number of repetitions.
    """
    mapping = read_yaml_mapping(filepath)
    unknown = set(mapping) - {"seed", "runs"}
    if unknown:
        raise ValueError(f"unknown suite keys: {sorted(unknown)}")
    entries = mapping.get("runs") or []
    if not isinstance(entries, list) or not entries:
        raise ValueError(f"{filepath}: the suite lists no runs")
    base = resolve_seed(seed, mapping.get("seed"))
    updates = parse_overrides(overrides)

    suite = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise ValueError(f"{filepath}: every run must be a mapping")
        entry = {**entry, **updates}
        repetitions = entry.pop("repetitions", 1)
        if not isinstance(repetitions, int) or repetitions < 1:
            raise ValueError(f"repetitions must be a positive integer, got {repetitions!r}")
        config = RunConfig.from_mapping(entry)
        config.seed = base
        config.validate()
        if not config.is_inverse and config.objective_function().minimizer is None:
            raise ValueError(f"{config.objective} has no known minimizer to measure success")
        suite.append((config, repetitions))
    return base, suite


def bench_entry(index: int, config: RunConfig, repetitions: int, base: int,
                threads: int) -> dict:
    """Repeats one configuration and reports how often it lands near the minimizer."""

    def repeat(r):
        run_config = RunConfig.from_mapping(dict(config.to_dict(),
                                                 seed=repetition_seed(base, index, r)))
        try:
            return run_algorithm(run_config)
        except (DivergenceError, NumericError) as err:
            logger.warning(f"{config.algorithm} repetition {r} diverged: {err}")
            return None

    results = ordered_map(repeat, range(repetitions), threads)
    finished = [result for result in results if result is not None]
    successes = sum(result.error < SUCCESS_RADIUS for result in finished)
    energies = [result.best_energy for result in finished]
    errors = [result.error for result in finished]
    row = dict(algorithm=config.algorithm, objective=config.objective, d=config.d, N=config.N,
               steps=config.steps, repetitions=repetitions, successes=successes,
               success_rate=successes / repetitions, diverged=repetitions - len(finished),
               mean_best_energy=float(np.mean(energies)) if finished else float("nan"),
               mean_error=float(np.mean(errors)) if finished else float("nan"))
    logger.info(f"bench {config.algorithm} on {config.objective}: "
                f"success rate {row['success_rate']:.3f}")
    return row


def cmd_bench(suite_path: str, overrides: Sequence[str] = (), seed: Optional[int] = None,
              threads: int = 1, out: str = "./", debug: bool = False) -> int:
    """Writes bench.csv with one success-rate row per suite entry."""

    os.makedirs(out, exist_ok=True)
    setlogger.setconfig(out, "bench", debug)

    try:
        base, suite = load_suite(suite_path, overrides, seed)
    except USAGE_ERRORS as err:
        logger.error(f"invalid bench suite: {err}")
        click.echo(f"Error: {err}", err=True)
        return EXIT_USAGE

    rows = [bench_entry(i, config, repetitions, base, threads)
            for i, (config, repetitions) in enumerate(suite)]
    write_csv(os.path.join(out, "bench.csv"), rows,
              dict(suite=suite_path, seed=base, success_radius=SUCCESS_RADIUS))
    return EXIT_OK


@click.command()
@_options.common_options
def bench(config, seed, threads, out, overrides, debug):
    """Success rates of repeated runs listed in a YAML suite."""
    if config is None:
        raise click.UsageError("bench needs --config with a suite file")
    sys.exit(cmd_bench(config, overrides, seed, threads, out, debug))
