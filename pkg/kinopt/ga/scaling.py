import logging
from typing import Sequence

import numpy as np
import numpy.typing as npt

from kinopt.diagnostics.wasserstein import wasserstein2_1d
from kinopt.ga.cbo import cbo_step
from kinopt.ga.genetic import GAParams
from kinopt.shared.consensus import gibbs_weights
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.errors import UnsupportedComparisonError
from kinopt.shared.objective import Objective
from kinopt.shared.report import DistanceRow
from kinopt.shared.rng import INIT_STREAM, REFERENCE_STREAM, STEP_STREAM, RngStream


logger = logging.getLogger(__name__)

CBO_DT = 1e-3


def quasi_invariant_ga_step(X: npt.NDArray, eps: float, lam: float, sigma: float,
                            alpha: float, obj: Objective, rng: RngStream) -> npt.NDArray:
    """
    GA generation under the quasi-invariant scaling: every particle is the
    first parent of its own child, the second parent is Gibbs-selected,

        x' = x + eps lam (x* - x) + sqrt(eps) sigma xi.
    """
    if not 0.0 < eps * lam <= 1.0:
        raise ValueError(f"scaled crossover eps * lam must lie in (0, 1], got {eps * lam}")
    N = X.shape[0]
    weights = gibbs_weights(obj.eval(X), alpha)
    second = rng.choice(N, N, p=weights)
    xi = rng.normal(X.shape)
    return X + eps * lam * (X[second] - X) + np.sqrt(eps) * sigma * xi


def ga_quasi_invariant_experiment(eps_list: Sequence[float], params: GAParams, obj: Objective,
                                  horizon: float, N: int, rng: RngStream, lam: float = 1.0,
                                  initial_mean: float = 0.0, initial_std: float = 1.0,
                                  cbo_dt: float = CBO_DT) -> list[DistanceRow]:
    """
    W2 between the eps-scaled GA after round(horizon / eps) generations and
    a consensus-based optimisation ensemble at the same physical time, for
    each eps. The selection strength and mutation come from params.
    """
    if obj.d != 1:
        raise UnsupportedComparisonError(f"{obj.name}: the quasi-invariant limit compares "
                                         f"1D laws, got d={obj.d}")
    alpha = params.selection.alpha
    initial = Ensemble.gaussian(N, 1, rng.substream(INIT_STREAM), initial_mean, initial_std)

    reference = initial
    reference_streams = rng.substream(REFERENCE_STREAM)
    for k in range(int(round(horizon / cbo_dt))):
        reference = cbo_step(reference, lam, params.sigma, alpha, cbo_dt, obj,
                             reference_streams.substream(k))

    rows = []
    scaled_streams = rng.substream(STEP_STREAM)
    for i, eps in enumerate(eps_list):
        streams = scaled_streams.substream(i)
        X = initial.positions.copy()
        steps = int(round(horizon / eps))
        for k in range(steps):
            X = quasi_invariant_ga_step(X, eps, lam, params.sigma, alpha, obj, streams.substream(k))
        distance = wasserstein2_1d(X, reference.positions)
        logger.info(f"GA quasi-invariant eps={eps}: {steps} generations, W2={distance:.6g}")
        rows.append(DistanceRow(scale=float(eps), distance=distance, samples=N, seed=rng.seed))
    return rows
