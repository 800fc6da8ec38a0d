import logging
from typing import Sequence

import numpy as np

from kinopt.diagnostics.wasserstein import wasserstein2_1d
from kinopt.sa.annealing import run_sa_ensemble
from kinopt.sa.langevin import run_langevin_ensemble
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.errors import UnsupportedComparisonError
from kinopt.shared.objective import Objective
from kinopt.shared.report import DistanceRow
from kinopt.shared.rng import INIT_STREAM, REFERENCE_STREAM, STEP_STREAM, RngStream
from kinopt.shared.schedule import Schedule


logger = logging.getLogger(__name__)

LANGEVIN_DT = 1e-3


def sa_diffusion_scaling(eps_list: Sequence[float], obj: Objective, T: float,
                         horizon: float, N: int, rng: RngStream,
                         initial_mean: float = 0.0, initial_std: float = 1.0,
                         langevin_dt: float = LANGEVIN_DT) -> list[DistanceRow]:
    """
    Diffusive scaling of SA: for each eps, round(horizon / eps) Metropolis
    steps with proposal scale sqrt(eps) * sqrt(2T), compared in W2 with an
    overdamped Langevin ensemble at the same physical time. Both start
    from the same initial ensemble.
    """
    if obj.d != 1:
        raise UnsupportedComparisonError(f"{obj.name}: diffusion scaling compares 1D laws, "
                                         f"got d={obj.d}")
    if any(not 0.0 < eps <= 1.0 for eps in eps_list):
        raise ValueError(f"scales must lie in (0, 1], got {list(eps_list)}")

    initial = Ensemble.gaussian(N, 1, rng.substream(INIT_STREAM), initial_mean, initial_std)
    reference = run_langevin_ensemble(initial, horizon, langevin_dt, obj, T,
                                      rng.substream(REFERENCE_STREAM)).final

    schedule = Schedule.constant(T)
    rows = []
    scaled_streams = rng.substream(STEP_STREAM)
    for i, eps in enumerate(eps_list):
        steps = int(round(horizon / eps))
        final = run_sa_ensemble(N, steps, obj, schedule, scaled_streams.substream(i),
                                initial=initial, proposal_factor=float(np.sqrt(eps))).final
        distance = wasserstein2_1d(final.positions, reference.positions)
        logger.info(f"SA diffusion scaling eps={eps}: {steps} steps, W2={distance:.6g}")
        rows.append(DistanceRow(scale=float(eps), distance=distance, samples=N, seed=rng.seed))
    return rows
