import click
import functools

def common_options(func):
    @click.option("--config",
                  type = click.Path(exists=True, dir_okay=False),
                  help =
                  """
                  YAML file with the run configuration, a flat
                  mapping of parameter names to values
                  """
    )
    @click.option("--seed",
                  type = click.IntRange(0, 2**64 - 1),
                  help =
                  """
                  Base seed of every random stream.  Overrides the
                  seed in the configuration file and the KINOPT_SEED
                  environment variable
                  """
    )
    @click.option("--threads",
                  type = click.IntRange(min=1),
                  default = 1,
                  help =
                  """
                  Number of worker threads for independent runs,
                  scales or replicates.  Results do not depend on it
                  """
    )
    @click.option("--out",
                  default = "./",
                  type = click.Path(file_okay=False),
                  help =
                  """
                  Directory for the CSV, JSON, netCDF and log files.
                  Created if missing
                  """
    )
    @click.option("--set", "overrides",
                  multiple = True,
                  metavar = "KEY=VALUE",
                  help =
                  """
                  Override one configuration entry, for example
                  --set N=500 --set objective=rastrigin.  Values are
                  parsed as YAML scalars
                  """
    )
    @click.option("--debug", is_flag=True, default=False)
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)
    return wrapper
