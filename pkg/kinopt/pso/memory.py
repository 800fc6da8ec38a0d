import logging

import numpy as np
import numpy.typing as npt

from kinopt.pso.sde import smooth_heaviside
from kinopt.shared.consensus import gibbs_mean
from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import require_finite, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


def cbo_memory_step(X: npt.NDArray, Y: npt.NDArray, lam1: float, lam2: float,
                    sigma1: float, sigma2: float, nu: float, beta: float, alpha: float,
                    dt: float, obj: Objective, rng: RngStream,
                    printed_heaviside: bool = False) -> tuple[npt.NDArray, npt.NDArray]:
    """
    Euler-Maruyama step of consensus-based optimisation with memory and
    anisotropic noise,

        dX = [lam1 (Y - X) + lam2 (m_alpha - X)] dt
             + sigma1 (X - Y) dB1 + sigma2 (m_alpha - X) dB2,
        dY = nu H_beta(E(Y) - E(X)) (X - Y) dt,

    noise taken componentwise, m_alpha from the pre-step memories Y. The
    memory update uses the new positions, as the PSO scheme does, so both
    draw the same noise in the same order.
    """
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")

    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    E_Y = obj.eval(Y)
    consensus = gibbs_mean(Y, E_Y, alpha)
    xi1 = rng.normal(X.shape)
    xi2 = rng.normal(X.shape)

    to_consensus = consensus - X
    drift = lam1 * (Y - X) + lam2 * to_consensus
    noise = sigma1 * (X - Y) * xi1 + sigma2 * to_consensus * xi2
    X_new = X + dt * drift + np.sqrt(dt) * noise
    require_finite(f"CBO with memory on {obj.name}", X_new)

    H = smooth_heaviside(E_Y - obj.eval(X_new), beta, printed_heaviside)
    Y_new = Y + nu * dt * H[:, None] * (X_new - Y)
    return X_new, Y_new


def run_cbo_memory(X: npt.NDArray, Y: npt.NDArray, lam1: float, lam2: float,
                   sigma1: float, sigma2: float, nu: float, beta: float, alpha: float,
                   dt: float, steps: int, obj: Objective,
                   rng: RngStream) -> tuple[npt.NDArray, Trajectory]:
    """Runs CBO with memory and returns the final consensus point of the memories."""

    trajectory = Trajectory()
    trajectory.record(0.0, Ensemble(X))
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        with step_guard(f"CBO with memory on {obj.name}", k, k * dt):
            X, Y = cbo_memory_step(X, Y, lam1, lam2, sigma1, sigma2, nu, beta, alpha, dt, obj,
                                   step_streams.substream(k))
            E_Y = obj.eval(Y)
            consensus = gibbs_mean(Y, E_Y, alpha)
        row = dict(step=k + 1, time=(k + 1) * dt,
                   best_energy=float(E_Y.min()),
                   variance=float(np.sum(X.var(axis=0))))
        if obj.known_min is not None:
            row["consensus_error"] = float(np.linalg.norm(consensus - obj.minimizer))
        trajectory.rows.append(row)
    trajectory.record(steps * dt, Ensemble(X))

    consensus = gibbs_mean(Y, obj.eval(Y), alpha)
    logger.info(f"CBO with memory on {obj.name}: N={X.shape[0]}, {steps} steps")
    return consensus, trajectory
