import dataclasses
import logging
import math
from typing import Optional

import numpy as np
import numpy.typing as npt

from kinopt.ga.selection import SelectionKind, selection_weights
from kinopt.shared.ensemble import Ensemble, Trajectory
from kinopt.shared.errors import require_finite, step_guard
from kinopt.shared.objective import Objective
from kinopt.shared.rng import STEP_STREAM, RngStream


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class GAParams:
    """
    N particles, mutation strength sigma and fraction nu of new particles
    per generation. weighted_retention keeps survivors by fitness weights
    (elitist strategy); otherwise survivors are drawn uniformly.
    """
    N: int = 100
    sigma: float = 0.1
    nu: float = 0.5
    selection: SelectionKind = SelectionKind.boltzmann_gibbs(10.0)
    weighted_retention: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"a genetic algorithm needs N >= 2, got {self.N}")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {self.nu}")
        if self.sigma < 0.0:
            raise ValueError(f"mutation strength must be nonnegative, got {self.sigma}")

    @property
    def n_children(self) -> int:
        # floor(nu N), guarded against nu * N landing just below an integer
        return min(self.N, math.floor(self.nu * self.N + 1e-9))


def crossover_mutation(x: npt.ArrayLike, x_star: npt.ArrayLike, gamma: npt.ArrayLike,
                       sigma: float, xi: npt.ArrayLike) -> npt.NDArray:
    """child = (1 - gamma) * x + gamma * x_star + sigma * xi, componentwise."""

    x = np.asarray(x, dtype=np.float64)
    x_star = np.asarray(x_star, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if x.shape != x_star.shape:
        raise ValueError(f"parent shapes differ: {x.shape} and {x_star.shape}")
    if np.any(gamma < 0.0) or np.any(gamma > 1.0):
        raise ValueError("crossover vector must lie in [0, 1]^d")
    return (1.0 - gamma) * x + gamma * x_star + sigma * xi


def ga_step(ensemble: Ensemble, params: GAParams, obj: Objective, rng: RngStream,
            energies: Optional[npt.NDArray] = None) -> Ensemble:
    """
    One GA generation: floor(nu N) children from parent pairs
    drawn by fitness, the remaining slots filled from the previous ensemble.
    """
    X = ensemble.positions
    N, d = X.shape
    if N < 2:
        raise ValueError("ga_step needs at least two particles")
    E = obj.eval(X) if energies is None else energies
    weights = selection_weights(E, params.selection)

    n_children = params.n_children
    first = rng.choice(N, n_children, p=weights)
    second = rng.choice(N, n_children, p=weights)
    gamma = rng.uniform((n_children, d))
    xi = rng.normal((n_children, d))
    children = crossover_mutation(X[first], X[second], gamma, params.sigma, xi)

    survivors = rng.choice(N, N - n_children,
                           p=weights if params.weighted_retention else None)
    require_finite(f"GA on {obj.name}", children)
    return Ensemble(np.concatenate([children, X[survivors]]))


def ga_row(step: int, X: npt.NDArray, E: npt.NDArray, obj: Objective) -> dict:
    row = dict(step=step,
               best_energy=float(E.min()),
               mean_energy=float(E.mean()),
               variance=float(np.sum(X.var(axis=0))))
    if obj.known_min is not None:
        row["mean_error"] = float(np.linalg.norm(X.mean(axis=0) - obj.minimizer))
    return row


def run_ga(ensemble: Ensemble, params: GAParams, obj: Objective, steps: int,
           rng: RngStream) -> tuple[npt.NDArray, float, Trajectory]:
    """Runs the genetic algorithm and returns the best particle of the last generation."""

    if ensemble.N != params.N:
        raise ValueError(f"ensemble has {ensemble.N} particles, params expect {params.N}")
    trajectory = Trajectory()
    trajectory.record(0.0, ensemble)
    E = obj.eval(ensemble.positions)
    step_streams = rng.substream(STEP_STREAM)
    for k in range(steps):
        with step_guard(f"GA on {obj.name}", k, float(k)):
            ensemble = ga_step(ensemble, params, obj, step_streams.substream(k), energies=E)
            E = obj.eval(ensemble.positions)
            require_finite("energies", E)
        trajectory.rows.append(ga_row(k + 1, ensemble.positions, E, obj))
        logger.debug(f"GA generation {k + 1}: best energy {E.min():.6g}")
    trajectory.record(float(steps), ensemble)

    best = int(np.argmin(E))
    logger.info(f"GA on {obj.name}: N={params.N}, {steps} generations, best energy {E[best]:.6g}")
    return ensemble.positions[best].copy(), float(E[best]), trajectory
