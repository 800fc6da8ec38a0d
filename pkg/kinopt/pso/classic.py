import logging

import numpy as np
import numpy.typing as npt

from kinopt.pso.lyapunov import lyapunov_functional
from kinopt.pso.swarm import PSOParams, SwarmState
from kinopt.shared.ensemble import Trajectory
from kinopt.shared.errors import require_finite, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


def pso_classic_step(swarm: SwarmState, params: PSOParams, obj: Objective,
                     rng: RngStream) -> SwarmState:
    """
    Classic PSO: v' = w v + c1 r1 (y - x) + c2 r2 (y_best - x), x' = x + v'
    with w the inertia weight. Personal bests are replaced on strict
    improvement, the global best is the argmin of the personal bests
    (lowest index on ties).
    """
    X, Y = swarm.X, swarm.Y
    r1 = rng.uniform(X.shape)
    r2 = rng.uniform(X.shape)
    V = (params.inertia_weight * swarm.V + params.c1 * r1 * (Y - X)
         + params.c2 * r2 * (swarm.y_best - X))
    X_new = X + V
    require_finite(f"classic PSO on {obj.name}", X_new, V)

    E_X = obj.eval(X_new)
    improved = E_X < swarm.E_Y
    Y_new = np.where(improved[:, None], X_new, Y)
    E_Y = np.where(improved, E_X, swarm.E_Y)
    return SwarmState(X_new, V, Y_new, Y_new[int(np.argmin(E_Y))].copy(), E_Y)


def pso_row(step: int, swarm: SwarmState, params: PSOParams, obj: Objective,
            consensus: npt.NDArray) -> dict:
    row = dict(step=step,
               time=step * params.dt,
               best_energy=float(swarm.E_Y.min()),
               lyapunov=lyapunov_functional(swarm, params),
               variance=float(np.sum(swarm.X.var(axis=0))))
    if obj.known_min is not None:
        row["consensus_error"] = float(np.linalg.norm(consensus - obj.minimizer))
    return row


def run_pso_classic(swarm: SwarmState, params: PSOParams, obj: Objective, steps: int,
                    rng: RngStream) -> tuple[npt.NDArray, float, Trajectory]:
    """Runs classic PSO and returns the global best and its energy."""

    trajectory = Trajectory()
    trajectory.record(0.0, swarm.positions())
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        with step_guard(f"classic PSO on {obj.name}", k, float(k)):
            swarm = pso_classic_step(swarm, params, obj, step_streams.substream(k))
        trajectory.rows.append(pso_row(k + 1, swarm, params, obj, swarm.y_best))
    trajectory.record(float(steps), swarm.positions())

    best_energy = float(swarm.E_Y.min())
    logger.info(f"classic PSO on {obj.name}: N={swarm.N}, {steps} steps, "
                f"global best energy {best_energy:.6g}")
    return swarm.y_best.copy(), best_energy, trajectory
