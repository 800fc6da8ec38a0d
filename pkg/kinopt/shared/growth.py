import dataclasses
import logging

import numpy as np

from kinopt.shared.errors import PreconditionError
from kinopt.shared.objective import Objective
from kinopt.shared.rng import RngStream


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class GrowthConstants:
    L_E: float = 1.0
    c_u: float = 1.0
    c_l: float = 0.5
    R_l: float = 1.0
    c_p: float = 0.5
    p: float = 2.0
    R_p: float = 1.0
    E_inf: float = 0.1

    def __post_init__(self):
        for field in dataclasses.fields(self):
            if not getattr(self, field.name) > 0:
                raise ValueError(f"growth constant {field.name} must be strictly positive")


@dataclasses.dataclass
class GrowthReport:
    """Fraction of sampled points satisfying each inequality, with sample counts."""
    fractions: dict
    counts: dict

    @property
    def satisfied(self) -> bool:
        return all(frac == 1.0 for frac in self.fractions.values())

    def to_dict(self) -> dict:
        return dict(fractions=dict(self.fractions), counts=dict(self.counts),
                    satisfied=self.satisfied)


def _fraction(mask) -> float:
    # an inequality with no sampled points in its region holds vacuously
    return float(np.mean(mask)) if mask.size else 1.0


def verify_growth_conditions(obj: Objective, constants: GrowthConstants,
                             n_samples: int, rng: RngStream,
                             radius: float = None) -> GrowthReport:

    if obj.known_min is None:
        raise PreconditionError(f"{obj.name}: growth conditions need a known minimizer")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")

    radius = 2.0 * obj.half_width if radius is None else radius
    xstar, estar = obj.minimizer, obj.min_energy
    c = constants

    X = xstar + rng.uniform((n_samples, obj.d), -radius, radius)
    Y = xstar + rng.uniform((n_samples, obj.d), -radius, radius)
    EX = obj.eval(X) - estar
    EY = obj.eval(Y) - estar
    nx = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(Y, axis=1)
    dist = np.linalg.norm(X - xstar, axis=1)
    # relative slack absorbs rounding in exact-equality cases
    tol = 1e-12 * (1.0 + np.abs(EX))

    lipschitz = np.abs(EX - EY) <= c.L_E * (1.0 + nx + ny) * np.linalg.norm(X - Y, axis=1) + tol
    upper = EX <= c.c_u * (1.0 + nx**2) + tol
    far_l = nx > c.R_l
    lower = EX[far_l] >= c.c_l * nx[far_l]**2 - tol[far_l]
    near_p = dist <= c.R_p
    inverse_local = c.c_p * dist[near_p]**c.p <= EX[near_p] + tol[near_p]
    inverse_far = c.E_inf < EX[~near_p]

    fractions = {
        "lipschitz": _fraction(lipschitz),
        "upper_growth": _fraction(upper),
        "lower_growth": _fraction(lower),
        "inverse_continuity_local": _fraction(inverse_local),
        "inverse_continuity_far": _fraction(inverse_far),
    }
    counts = {
        "lipschitz": int(lipschitz.size),
        "upper_growth": int(upper.size),
        "lower_growth": int(lower.size),
        "inverse_continuity_local": int(inverse_local.size),
        "inverse_continuity_far": int(inverse_far.size),
    }
    logger.info(f"growth conditions for {obj.name}: {fractions}")
    return GrowthReport(fractions=fractions, counts=counts)
