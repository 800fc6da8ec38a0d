import dataclasses
import logging
from typing import Optional

import numpy as np
import numpy.typing as npt

from kinopt.pso.swarm import PSOParams, SwarmState
from kinopt.shared.errors import NumericError
from kinopt.shared.objective import FD_STEP, Objective


logger = logging.getLogger(__name__)

# bound on the left-hand side of the well-preparation inequality
WELL_PREPARED_BOUND = 3.0 / 32.0
HESSIAN_SAMPLE = 64


def lyapunov_functional(swarm: SwarmState, params: PSOParams) -> float:
    """
    Ensemble average of

        (g/2m)^2 |X - E[X]|^2 + 3/2 |V|^2 + 1/2 (3 lam1/m - g^2/m^2) |X - Y|^2
        + g/2m <X - E[X], V> + g/m <X - Y, V>

    with g = 1 - m the friction and E[X] the ensemble mean.
    """
    m, g = params.m, params.gamma
    centred = swarm.X - swarm.X.mean(axis=0)
    gap = swarm.X - swarm.Y
    V = swarm.V

    def sq(a):
        return np.sum(a * a, axis=1)

    def dot(a, b):
        return np.sum(a * b, axis=1)

    H = ((g / (2.0 * m))**2 * sq(centred)
         + 1.5 * sq(V)
         + 0.5 * (3.0 * params.lam1 / m - g**2 / m**2) * sq(gap)
         + g / (2.0 * m) * dot(centred, V)
         + g / m * dot(gap, V))
    return float(H.mean())


def estimate_hessian_bound(obj: Objective, points: npt.NDArray,
                           rel_step: float = FD_STEP) -> float:
    """Largest spectral norm of a finite-difference Hessian over the given points."""

    points = np.atleast_2d(points)[:HESSIAN_SAMPLE]
    bound = 0.0
    for x in points:
        hess = np.empty((obj.d, obj.d))
        for i in range(obj.d):
            h = rel_step * (1.0 + abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            hess[:, i] = (obj.grad(xp) - obj.grad(xm)) / (2.0 * h)
        bound = max(bound, float(np.linalg.norm(0.5 * (hess + hess.T), 2)))
    return bound


def _ratio(num: float, den: float) -> float:
    # x / 0 is infinite unless x vanishes, as for the friction-free m = 1 case
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return np.inf
    return num / den


@dataclasses.dataclass(frozen=True)
class WellPreparedness:
    mu1: float
    mu2: float
    chi: float
    lhs: float
    hessian_bound: float
    gibbs_mass: float
    min_energy_estimated: bool

    @property
    def satisfied(self) -> bool:
        return self.mu1 > 0.0 and self.mu2 > 0.0 and self.chi > 0.0 \
            and self.lhs < WELL_PREPARED_BOUND

    def to_dict(self) -> dict:
        return dict(dataclasses.asdict(self), satisfied=self.satisfied)


def well_preparedness(params: PSOParams, swarm: SwarmState, obj: Objective,
                      hessian_bound: Optional[float] = None) -> WellPreparedness:
    """
    Evaluates the PSO convergence rates mu1, mu2 and chi and the
    well-preparation inequality for an initial swarm. Expectations over
    the initial law are replaced by ensemble averages, and min E by the
    best personal best when the objective has no known minimum. The
    diffusion coefficients are the effective ones, sigma_i / sqrt(3).
    """
    m, g = params.m, params.gamma
    lam1, lam2, nu, beta, alpha = params.lam1, params.lam2, params.nu, params.beta, params.alpha
    s2 = params.effective_noise[1]

    estimated = obj.min_energy is None
    emin = float(swarm.E_Y.min()) if estimated else obj.min_energy
    gibbs_mass = float(np.mean(np.exp(-alpha * (swarm.E_Y - emin))))
    if not (np.isfinite(gibbs_mass) and gibbs_mass > 0.0):
        raise NumericError("zero Gibbs normalisation for the initial personal bests")
    inv_mass = 1.0 / gibbs_mass

    common = _ratio(9.0 * lam2**2, g * m) + 3.0 * s2**2 / m**2
    mu1 = (lam1 + 2.0 * lam2) * g / (2.0 * m)**2 \
        - (common + 3.0 * lam1 * g / (4.0 * m**2)) * 12.0 * inv_mass
    mu2 = (lam1 + lam2) * g / m**2 \
        + nu * beta * (3.0 * lam1 / m + g**2 / m**2) \
        - 8.0 * nu**2 * g / m \
        - _ratio(lam2**2 * g, 2.0 * m**2 * lam1) \
        - 3.0 * s2**2 / (2.0 * m**2) \
        - common \
        - (common + 3.0 * lam1 * g / (2.0 * m)**2) * 24.0 * inv_mass
    chi = 0.4 * min(g / (2.0 * m), mu1, mu2) \
        / ((g / (2.0 * m))**2 + 1.0 + 3.0 * lam1 / m + 2.0 * (g / m)**2)

    C = obj.hessian_bound if hessian_bound is None else hessian_bound
    if C is None:
        C = estimate_hessian_bound(obj, swarm.X)

    if chi > 0.0:
        H0 = lyapunov_functional(swarm, params)
        grad_sq = float(np.mean(np.sum(obj.grad(swarm.X)**2, axis=1)))
        lhs = (_ratio(alpha * nu * m, lam1 * chi) * (C + 2.0 * alpha**2)
               + _ratio(24.0 * C**2 * nu, alpha * chi**3)) * H0 * inv_mass \
            + _ratio(6.0 * nu, alpha * chi) * grad_sq * inv_mass
    else:
        lhs = np.inf

    report = WellPreparedness(float(mu1), float(mu2), float(chi), float(lhs), float(C),
                              gibbs_mass, estimated)
    logger.info(f"well-preparedness on {obj.name}: mu1={mu1:.4g} mu2={mu2:.4g} chi={chi:.4g} "
                f"lhs={lhs:.4g} satisfied={report.satisfied}")
    return report
