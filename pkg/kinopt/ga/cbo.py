import logging
from typing import Union

import numpy as np
import numpy.typing as npt

from kinopt.shared.consensus import gibbs_mean
from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import require_finite, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


def cbo_step(ensemble: Ensemble, lam: Union[float, npt.ArrayLike], sigma: float,
             alpha: float, dt: float, obj: Objective, rng: RngStream) -> Ensemble:
    """
    Euler-Maruyama step of consensus-based optimisation with isotropic noise,

        x' = x + lam * (m_alpha - x) dt + sigma sqrt(dt) xi,

    m_alpha taken once from the pre-step ensemble.
    """
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")

    X = ensemble.positions
    consensus = gibbs_mean(X, obj.eval(X), alpha)
    drift = np.asarray(lam, dtype=np.float64) * (consensus - X)
    X_new = X + drift * dt + sigma * np.sqrt(dt) * rng.normal(X.shape)
    require_finite(f"CBO on {obj.name}", X_new)
    return Ensemble(X_new)


def run_cbo(ensemble: Ensemble, lam: Union[float, npt.ArrayLike], sigma: float,
            alpha: float, dt: float, steps: int, obj: Objective,
            rng: RngStream) -> tuple[npt.NDArray, Trajectory]:
    """Runs the consensus dynamics and returns the final consensus point."""

    trajectory = Trajectory()
    trajectory.record(0.0, ensemble)
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        with step_guard(f"CBO on {obj.name}", k, k * dt):
            ensemble = cbo_step(ensemble, lam, sigma, alpha, dt, obj, step_streams.substream(k))
            E = obj.eval(ensemble.positions)
            consensus = gibbs_mean(ensemble.positions, E, alpha)
        row = dict(step=k + 1, time=(k + 1) * dt,
                   consensus_energy=float(obj.eval(consensus)),
                   mean_energy=float(E.mean()),
                   variance=ensemble.variance())
        if obj.known_min is not None:
            row["consensus_error"] = float(np.linalg.norm(consensus - obj.minimizer))
        trajectory.rows.append(row)
    trajectory.record(steps * dt, ensemble)

    consensus = gibbs_mean(ensemble.positions, obj.eval(ensemble.positions), alpha)
    logger.info(f"CBO on {obj.name}: N={ensemble.N}, {steps} steps, "
                f"consensus energy {obj.eval(consensus):.6g}")
    return consensus, trajectory
