import yaml

from kinopt.shared.errors import DivergenceError, NumericError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGENCE = 3

USAGE_ERRORS = (ValueError, yaml.YAMLError, OSError, TypeError)


def exit_code_for(err: Exception) -> int:
    """Stable exit code of an error raised while configuring or running."""

    if isinstance(err, (DivergenceError, NumericError)):
        return EXIT_DIVERGENCE
    if isinstance(err, USAGE_ERRORS):
        return EXIT_USAGE
    raise err
