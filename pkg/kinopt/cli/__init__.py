from .bench import cmd_bench
from .diag import cmd_diag
from .run import RunResult, cmd_run, run_algorithm
from .runconfig import RunConfig
from .scale import cmd_scale
