import logging
import os
import sys
from typing import Optional, Sequence

import click

from kinopt.cli import _options
from kinopt.cli.exitcodes import EXIT_FAILED, EXIT_OK, EXIT_USAGE, USAGE_ERRORS, exit_code_for
from kinopt.cli.runconfig import parse_overrides, read_yaml_mapping, resolve_seed
from kinopt.cli.writers import write_csv, write_json
from kinopt.scaling_lab.experiment import ExperimentSpec, run_experiment, summarize
from kinopt.utils import setlogger


logger = logging.getLogger(__name__)


def load_specs(filepath: str, overrides: Sequence[str] = (),
               seed: Optional[int] = None) -> list[ExperimentSpec]:
    """
    A spec file holds one experiment mapping or a list under 'experiments'.
    Overrides and the resolved seed apply to every experiment.
    """
    mapping = read_yaml_mapping(filepath)
    entries = mapping["experiments"] if "experiments" in mapping else [mapping]
    if not isinstance(entries, list) or not entries:
        raise ValueError(f"{filepath}: no experiments listed")
    updates = parse_overrides(overrides)
    specs = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise ValueError(f"{filepath}: every experiment must be a mapping")
        entry = {**entry, **updates}
        entry["seed"] = resolve_seed(seed, entry.get("seed"))
        specs.append(ExperimentSpec.from_dict(entry))
    return specs


def cmd_scale(spec_path: str, overrides: Sequence[str] = (), seed: Optional[int] = None,
              threads: int = 1, out: str = "./", debug: bool = False) -> int:
    """
    Runs every experiment of the spec file, writing one JSON report per
    experiment and a summary CSV. Exit 0 only when every experiment passes.
    """
    os.makedirs(out, exist_ok=True)
    setlogger.setconfig(out, "scale", debug)

    try:
        specs = load_specs(spec_path, overrides, seed)
    except USAGE_ERRORS as err:
        logger.error(f"invalid experiment spec: {err}")
        click.echo(f"Error: {err}", err=True)
        return EXIT_USAGE

    reports = []
    for i, spec in enumerate(specs):
        try:
            report = run_experiment(spec, threads)
        except Exception as err:
            logger.error(f"experiment {spec.kind} failed: {err}")
            click.echo(f"Error: {err}", err=True)
            return exit_code_for(err)
        name = f"{spec.kind}_report.json" if len(specs) == 1 else f"{spec.kind}_{i}_report.json"
        write_json(os.path.join(out, name), report.to_dict(), spec.to_dict())
        reports.append(report)

    summary = summarize(reports)
    write_csv(os.path.join(out, "scale_summary.csv"), summary.to_dict("records"),
              dict(spec=spec_path, threads=threads))
    passed = all(report.passed for report in reports)
    logger.info(f"{len(reports)} experiments, all passed: {passed}")
    return EXIT_OK if passed else EXIT_FAILED


@click.command()
@_options.common_options
def scale(config, seed, threads, out, overrides, debug):
    """Run scaling-limit and envelope experiments from a YAML spec."""
    if config is None:
        raise click.UsageError("scale needs --config with an experiment spec")
    sys.exit(cmd_scale(config, overrides, seed, threads, out, debug))
