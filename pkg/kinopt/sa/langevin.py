import logging
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import NumericError, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import STEP_STREAM, RngStream
from kinopt.shared.schedule import Schedule


logger = logging.getLogger(__name__)


def langevin_step(x: npt.ArrayLike, obj: Objective, T: float, dt: float,
                  rng: RngStream) -> npt.NDArray:
    """
    Euler-Maruyama step of the overdamped Langevin dynamics,

        x' = x - grad E(x) dt + sqrt(2 T dt) xi,

    for a single point or an (N, d) batch.
    """
    if T < 0.0:
        raise ValueError(f"temperature must be nonnegative, got {T}")
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")

    x = np.asarray(x, dtype=np.float64)
    drift = obj.grad(x)
    x_new = x - drift * dt
    if T > 0.0:
        x_new = x_new + np.sqrt(2.0 * T * dt) * rng.normal(x.shape)
    if not np.all(np.isfinite(x_new)):
        raise NumericError(f"{obj.name}: Langevin step produced non-finite positions")
    return x_new


def run_langevin_ensemble(initial: Ensemble, horizon: float, dt: float, obj: Objective,
                          temperature: Union[float, Schedule], rng: RngStream,
                          snapshot_times: Optional[Sequence[float]] = None) -> Trajectory:
    """
    Langevin ensemble to time horizon. A Schedule temperature is evaluated
    at the physical time, giving annealed Langevin dynamics.
    """
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    steps = int(round(horizon / dt))
    record = {int(round(t / dt)) for t in snapshot_times} if snapshot_times is not None \
        else {0, steps}

    if not obj.has_gradient:
        logger.debug(f"{obj.name}: Langevin drift from finite differences")

    X = initial.positions.copy()
    trajectory = Trajectory()
    if 0 in record:
        trajectory.record(0.0, Ensemble(X.copy()))
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        T = temperature.value_at(k * dt) if isinstance(temperature, Schedule) else temperature
        with step_guard(f"Langevin ensemble on {obj.name}", k, k * dt):
            X = langevin_step(X, obj, T, dt, step_streams.substream(k))
        if k + 1 in record:
            trajectory.record((k + 1) * dt, Ensemble(X.copy()))

    logger.info(f"Langevin ensemble on {obj.name}: N={initial.N}, {steps} steps of {dt}")
    return trajectory
