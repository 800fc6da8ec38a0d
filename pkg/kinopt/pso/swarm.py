import dataclasses

import numpy as np
import numpy.typing as npt

from kinopt.shared.ensemble import Ensemble
from kinopt.shared.objective import Objective
from kinopt.shared.rng import RngStream


CONSTRICTED_INERTIA = 0.7298
CONSTRICTED_C = 1.49618


"""
SwarmState:

Positions X, velocities V and personal bests Y of N particles, the
global best y_best and the cached personal-best energies E_Y.
"""
@dataclasses.dataclass
class SwarmState:
    X: npt.NDArray
    V: npt.NDArray
    Y: npt.NDArray
    y_best: npt.NDArray
    E_Y: npt.NDArray

    def __post_init__(self):
        self.X = np.array(self.X, dtype=np.float64, ndmin=2)
        self.V = np.array(self.V, dtype=np.float64, ndmin=2)
        self.Y = np.array(self.Y, dtype=np.float64, ndmin=2)
        self.y_best = np.asarray(self.y_best, dtype=np.float64)
        self.E_Y = np.asarray(self.E_Y, dtype=np.float64)
        if not (self.X.shape == self.V.shape == self.Y.shape):
            raise ValueError("X, V and Y must share the same (N, d) shape")
        if self.E_Y.shape != (self.X.shape[0],) or self.y_best.shape != (self.X.shape[1],):
            raise ValueError("E_Y needs one energy per particle and y_best one point")

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_positions(cls, X: npt.ArrayLike, obj: Objective,
                       V: npt.ArrayLike = None) -> "SwarmState":
        X = np.array(X, dtype=np.float64, ndmin=2)
        V = np.zeros_like(X) if V is None else V
        E = obj.eval(X)
        return cls(X, V, X.copy(), X[int(np.argmin(E))].copy(), E)

    @classmethod
    def initialize(cls, N: int, obj: Objective, rng: RngStream, mean: float = 0.0,
                   std: float = 1.0, velocity_std: float = 0.0) -> "SwarmState":
        X = mean + std * rng.normal((N, obj.d))
        V = velocity_std * rng.normal((N, obj.d))
        return cls.from_positions(X, obj, V)

    @classmethod
    def consensus(cls, point: npt.ArrayLike, N: int, obj: Objective) -> "SwarmState":
        X = np.tile(np.asarray(point, dtype=np.float64), (N, 1))
        return cls.from_positions(X, obj)

    def copy(self) -> "SwarmState":
        return SwarmState(self.X.copy(), self.V.copy(), self.Y.copy(),
                          self.y_best.copy(), self.E_Y.copy())

    def positions(self) -> Ensemble:
        return Ensemble(self.X.copy())


@dataclasses.dataclass(frozen=True)
class PSOParams:
    """
    c1, c2 drive the classic update, whose previous velocity is scaled by
    inertia_weight. With inertia_weight = 1 and c1 = c2 = 2 (the original
    coefficients) the classic iteration is undamped and its velocities grow
    without bound on most objectives; constricted() gives a convergent set.
    The SDE scheme uses lam1, lam2, sigma1, sigma2, inertia m with friction
    gamma = 1 - m, personal-best speed nu, Heaviside smoothness beta, Gibbs
    strength alpha and step dt.
    printed_heaviside switches H to the form 1 + tanh(beta z) / 2.
    """
    c1: float = 2.0
    c2: float = 2.0
    inertia_weight: float = 1.0
    lam1: float = 1.0
    lam2: float = 1.0
    sigma1: float = 0.7
    sigma2: float = 0.7
    m: float = 0.5
    nu: float = 1.0
    beta: float = 30.0
    alpha: float = 50.0
    dt: float = 0.01
    printed_heaviside: bool = False

    def __post_init__(self):
        if not 0.0 < self.m <= 1.0:
            raise ValueError(f"inertia m must lie in (0, 1], got {self.m}")
        if not 0.0 <= self.inertia_weight <= 1.0:
            raise ValueError(f"inertia_weight must lie in [0, 1], got {self.inertia_weight}")
        if not 0.0 < self.dt <= 1.0:
            raise ValueError(f"time step must lie in (0, 1], got {self.dt}")
        for name in ("c1", "c2", "lam1", "lam2", "sigma1", "sigma2", "nu", "alpha"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def gamma(self) -> float:
        return 1.0 - self.m

    @property
    def effective_noise(self) -> tuple[float, float]:
        # uniform weights r ~ 1 + xi / sqrt(3) keep mean and variance
        return self.sigma1 / np.sqrt(3.0), self.sigma2 / np.sqrt(3.0)

    @classmethod
    def classic_sde(cls, c1: float = 2.0, c2: float = 2.0, **kwargs) -> "PSOParams":
        """Coefficients of the scheme obtained directly from classic PSO: m = 1, no friction."""
        return cls(c1=c1, c2=c2, lam1=c1, lam2=c2, sigma1=c1, sigma2=c2, m=1.0, **kwargs)

    @classmethod
    def constricted(cls, **kwargs) -> "PSOParams":
        """Classic coefficients with Clerc-Kennedy constriction, stable on quadratic objectives."""
        return cls(c1=CONSTRICTED_C, c2=CONSTRICTED_C, inertia_weight=CONSTRICTED_INERTIA, **kwargs)
