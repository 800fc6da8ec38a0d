import dataclasses
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy.integrate import trapezoid

from kinopt.shared.ensemble import Ensemble
from kinopt.shared.rng import RngStream


WEIGHT_TOL = 1e-12
DEFAULT_NODES = 256


"""
EmpiricalMeasure:

Weighted point masses sum_i w_i delta_{x_i}. Weights are normalised on
construction; a zero or negative total is rejected.
"""
@dataclasses.dataclass
class EmpiricalMeasure:
    support: npt.NDArray
    weights: Optional[npt.NDArray] = None

    def __post_init__(self):
        self.support = np.array(self.support, dtype=np.float64, ndmin=2)
        if self.support.shape[0] < 1:
            raise ValueError("an empirical measure needs at least one support point")
        if self.weights is None:
            self.weights = np.full(self.support.shape[0], 1.0 / self.support.shape[0])
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != (self.support.shape[0],):
                raise ValueError("one weight per support point is required")
            if np.any(self.weights < 0.0):
                raise ValueError("measure weights must be nonnegative")
            total = self.weights.sum()
            if not total > 0.0:
                raise ValueError("measure weights have zero total mass")
            self.weights = self.weights / total

    @property
    def N(self) -> int:
        return self.support.shape[0]

    @property
    def d(self) -> int:
        return self.support.shape[1]

    @classmethod
    def from_ensemble(cls, ensemble: Ensemble) -> "EmpiricalMeasure":
        return cls(ensemble.positions.copy())

    @classmethod
    def dirac(cls, point: npt.ArrayLike) -> "EmpiricalMeasure":
        return cls(np.atleast_2d(np.asarray(point, dtype=np.float64)))

    def mean(self) -> npt.NDArray:
        return self.weights @ self.support

    def second_moment(self) -> npt.NDArray:
        return np.einsum("i,ij,ik->jk", self.weights, self.support, self.support)

    def sample(self, n: int, rng: RngStream) -> npt.NDArray:
        return self.support[rng.choice(self.N, n, p=self.weights)]

    def to_ensemble(self) -> Ensemble:
        return Ensemble(self.support.copy())


def uniform_grid(a: float, b: float, n: int = DEFAULT_NODES) -> npt.NDArray:
    if not b > a:
        raise ValueError(f"grid needs a < b, got [{a}, {b}]")
    if n < 2:
        raise ValueError("a grid needs at least two nodes")
    return np.linspace(a, b, n)


"""
GridDensity1D:

Density samples on a uniform 1D grid, integrated with the trapezoid rule.
log_normalizer is set for Gibbs densities and holds log Z_T.
"""
@dataclasses.dataclass
class GridDensity1D:
    nodes: npt.NDArray
    values: npt.NDArray
    log_normalizer: Optional[float] = None

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise ValueError("grid densities need a 1D grid with at least two nodes")
        if self.values.shape != self.nodes.shape:
            raise ValueError("one density value per grid node is required")
        spacing = np.diff(self.nodes)
        if not np.all(spacing > 0.0) or not np.allclose(spacing, spacing[0], rtol=1e-9):
            raise ValueError("grid nodes must be uniform and increasing")
        if np.any(self.values < 0.0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite and nonnegative")

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def integral(self) -> float:
        return float(trapezoid(self.values, self.nodes))

    def normalized(self) -> "GridDensity1D":
        mass = self.integral()
        if not mass > 0.0:
            raise ValueError("cannot normalise a density with zero mass")
        return GridDensity1D(self.nodes, self.values / mass, self.log_normalizer)

    @property
    def normalizer(self) -> Optional[float]:
        return None if self.log_normalizer is None else float(np.exp(self.log_normalizer))

    def same_grid(self, other: "GridDensity1D") -> bool:
        return self.nodes.shape == other.nodes.shape and np.array_equal(self.nodes, other.nodes)
