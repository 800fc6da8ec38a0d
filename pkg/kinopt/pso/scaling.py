import dataclasses
import logging
from typing import Sequence

from kinopt.diagnostics.wasserstein import wasserstein2_1d
from kinopt.pso.memory import cbo_memory_step
from kinopt.pso.sde import pso_sde_step
from kinopt.pso.swarm import PSOParams, SwarmState
from kinopt.shared.errors import UnsupportedComparisonError
from kinopt.shared.objective import Objective
from kinopt.shared.report import DistanceRow
from kinopt.shared.rng import INIT_STREAM, STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


def zero_inertia_experiment(m_list: Sequence[float], params: PSOParams, obj: Objective,
                            horizon: float, N: int, rng: RngStream,
                            initial_mean: float = 0.0,
                            initial_std: float = 1.0) -> list[DistanceRow]:
    """
    For each inertia m, W2 between the X-marginal of the PSO-SDE swarm and
    that of CBO with memory at the horizon. Both start from the same
    positions at rest and draw the same noise at every step.
    """
    if obj.d != 1:
        raise UnsupportedComparisonError(f"{obj.name}: the zero-inertia limit compares 1D "
                                         f"laws, got d={obj.d}")
    if any(not 0.0 < m <= 1.0 for m in m_list):
        raise ValueError(f"inertia values must lie in (0, 1], got {list(m_list)}")

    X0 = initial_mean + initial_std * rng.substream(INIT_STREAM).normal((N, 1))
    steps = int(round(horizon / params.dt))
    step_streams = rng.substream(STEP_STREAM)
    s1, s2 = params.effective_noise

    X, Y = X0.copy(), X0.copy()
    for k in range(steps):
        X, Y = cbo_memory_step(X, Y, params.lam1, params.lam2, s1, s2, params.nu, params.beta,
                               params.alpha, params.dt, obj, step_streams.substream(k),
                               params.printed_heaviside)
    reference = X

    rows = []
    for m in m_list:
        scaled = dataclasses.replace(params, m=float(m))
        swarm = SwarmState.from_positions(X0, obj)
        for k in range(steps):
            swarm = pso_sde_step(swarm, scaled, obj, step_streams.substream(k))
        distance = wasserstein2_1d(swarm.X, reference)
        logger.info(f"PSO zero-inertia m={m}: W2={distance:.6g}")
        rows.append(DistanceRow(scale=float(m), distance=distance, samples=N, seed=rng.seed))
    return rows
