import logging

import numpy as np

from kinopt.diagnostics.measures import EmpiricalMeasure
from kinopt.ga.genetic import GAParams, crossover_mutation
from kinopt.ga.selection import ParentMeasure
from kinopt.shared.objective import Objective
from kinopt.shared.rng import RngStream


logger = logging.getLogger(__name__)


def kinetic_ga_step(measure: EmpiricalMeasure, params: GAParams, obj: Objective,
                    rng: RngStream, dt: float = 1.0) -> EmpiricalMeasure:
    """
    Nanbu-style sample of the kinetic GA update

        f' = dt (nu Q_c[f] + (1 - nu) P[f]) + (1 - dt) f.

    Every output particle independently refreshes with probability dt;
    a refreshed particle is, with probability nu, the child of two parents
    drawn from P[f], and otherwise a draw from P[f]. dt = 1 is the
    time-discrete update.
    """
    if measure.N < 2:
        raise ValueError("kinetic_ga_step needs at least two support points")
    if not 0.0 < dt <= 1.0:
        raise ValueError(f"dt must lie in (0, 1], got {dt}")

    N, d = measure.support.shape
    parents = ParentMeasure.from_points(measure.support, obj.eval(measure.support),
                                        params.selection, measure.weights)

    is_child = rng.uniform(N) < params.nu
    first = rng.choice(N, N, p=parents.weights)
    second = rng.choice(N, N, p=parents.weights)
    gamma = rng.uniform((N, d))
    xi = rng.normal((N, d))
    refresh = rng.uniform(N) < dt
    unchanged = rng.choice(N, N, p=measure.weights)

    children = crossover_mutation(measure.support[first], measure.support[second],
                                  gamma, params.sigma, xi)
    updated = np.where(is_child[:, None], children, measure.support[first])
    out = np.where(refresh[:, None], updated, measure.support[unchanged])
    logger.debug(f"kinetic GA step: {int(is_child.sum())} children of {N} samples")
    return EmpiricalMeasure(out)
