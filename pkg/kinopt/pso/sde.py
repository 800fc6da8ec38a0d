import logging

import numpy as np
import numpy.typing as npt

from kinopt.pso.classic import pso_row
from kinopt.pso.swarm import PSOParams, SwarmState
from kinopt.shared.consensus import gibbs_mean
from kinopt.shared.ensemble import Trajectory
from kinopt.shared.errors import require_finite, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


def smooth_heaviside(z: npt.ArrayLike, beta: float, printed: bool = False):
    """
    H_beta(z) = (1 + tanh(beta z)) / 2, which tends to the Heaviside step
    as beta grows. printed=True gives 1 + tanh(beta z) / 2.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    t = np.tanh(beta * np.asarray(z, dtype=np.float64))
    value = 1.0 + 0.5 * t if printed else 0.5 * (1.0 + t)
    return float(value) if np.ndim(value) == 0 else value


def pso_sde_step(swarm: SwarmState, params: PSOParams, obj: Objective,
                 rng: RngStream) -> SwarmState:
    """
    Semi-implicit Euler-Maruyama step of the regularised PSO system

        m dV = -gamma V dt + lam1 (Y - X) dt + lam2 (m_alpha - X) dt
               + s1 (Y - X) dB1 + s2 (m_alpha - X) dB2,
        dX = V dt,  dY = nu H_beta(E(Y) - E(X)) (X - Y) dt,

    with s_i = sigma_i / sqrt(3). Friction is taken implicitly, X uses the
    new velocity and Y the new position. m_alpha comes from the pre-step
    personal bests.
    """
    X, Y, V = swarm.X, swarm.Y, swarm.V
    dt, m = params.dt, params.m
    s1, s2 = params.effective_noise

    consensus = gibbs_mean(Y, swarm.E_Y, params.alpha)
    xi1 = rng.normal(X.shape)
    xi2 = rng.normal(X.shape)

    to_best = Y - X
    to_consensus = consensus - X
    drift = params.lam1 * to_best + params.lam2 * to_consensus
    noise = s1 * to_best * xi1 + s2 * to_consensus * xi2
    V_new = (V + (dt * drift + np.sqrt(dt) * noise) / m) / (1.0 + dt * params.gamma / m)
    X_new = X + dt * V_new

    E_X = obj.eval(X_new)
    H = smooth_heaviside(swarm.E_Y - E_X, params.beta, params.printed_heaviside)
    Y_new = Y + params.nu * dt * H[:, None] * (X_new - Y)
    E_Y = obj.eval(Y_new)
    return SwarmState(X_new, V_new, Y_new, Y_new[int(np.argmin(E_Y))].copy(), E_Y)


def run_pso_sde(swarm: SwarmState, params: PSOParams, obj: Objective, steps: int,
                rng: RngStream) -> tuple[npt.NDArray, float, Trajectory]:
    """Runs the SDE scheme and returns the final consensus point m_alpha and its energy."""

    trajectory = Trajectory()
    trajectory.record(0.0, swarm.positions())
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        with step_guard(f"PSO-SDE on {obj.name}", k, k * params.dt):
            swarm = pso_sde_step(swarm, params, obj, step_streams.substream(k))
            require_finite("swarm", swarm.X, swarm.V)
            consensus = gibbs_mean(swarm.Y, swarm.E_Y, params.alpha)
        trajectory.rows.append(pso_row(k + 1, swarm, params, obj, consensus))
    trajectory.record(steps * params.dt, swarm.positions())

    consensus = gibbs_mean(swarm.Y, swarm.E_Y, params.alpha)
    energy = float(obj.eval(consensus))
    logger.info(f"PSO-SDE on {obj.name}: N={swarm.N}, {steps} steps, m={params.m}, "
                f"consensus energy {energy:.6g}")
    return consensus, energy, trajectory
