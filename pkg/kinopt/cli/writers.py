import json
import logging
from typing import Sequence

import numpy as np
import pandas as pd

from kinopt.shared.ensemble import Trajectory
from kinopt.shared.kinopt_utils import get_provenance_attrs


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def to_builtin(value):
    """numpy scalars and arrays to plain python, recursively."""

    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def config_header(config: dict) -> str:
    return "".join(f"# {key}: {json.dumps(to_builtin(config[key]))}\n" for key in sorted(config))


def write_csv(filepath: str, rows: Sequence[dict], config: dict):
    """Resolved configuration as comment lines, then the table."""

    table = pd.DataFrame.from_records(list(rows))
    with open(filepath, "w", newline="") as stream:
        stream.write(config_header(config))
        table.to_csv(stream, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"wrote {len(table)} rows to {filepath}")


def read_csv(filepath: str) -> pd.DataFrame:
    return pd.read_csv(filepath, comment="#")


def write_json(filepath: str, payload: dict, config: dict):
    """payload plus the resolved configuration and provenance."""

    document = dict(to_builtin(payload), config=to_builtin(config),
                    provenance=get_provenance_attrs())
    with open(filepath, "w") as stream:
        json.dump(document, stream, indent=2, sort_keys=True)
        stream.write("\n")
    logger.info(f"wrote {filepath}")


def write_snapshots(filepath: str, trajectory: Trajectory, config: dict):
    # netCDF attributes hold strings and numbers only
    attrs = {key: json.dumps(to_builtin(value)) for key, value in sorted(config.items())}
    trajectory.to_dataset(attrs).to_netcdf(filepath)
    logger.info(f"wrote {len(trajectory.snapshots)} snapshots to {filepath}")
