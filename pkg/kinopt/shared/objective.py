import dataclasses
import logging
from typing import Callable, Optional

import numpy as np
import numpy.typing as npt

from kinopt.shared.errors import CorpusError, NumericError


logger = logging.getLogger(__name__)

BENCHMARK_NAMES = ("quadratic", "doublewell1d", "rastrigin", "ackley")

# relative central-difference step: h_i = FD_STEP * (1 + |x_i|)
FD_STEP = 1e-5


def numerical_gradient(func: Callable[[npt.NDArray], npt.NDArray],
                       x: npt.NDArray,
                       rel_step: float = FD_STEP) -> npt.NDArray:

    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    grad = np.empty_like(X)
    for i in range(X.shape[1]):
        h = rel_step * (1.0 + np.abs(X[:, i]))
        xp = X.copy()
        xm = X.copy()
        xp[:, i] += h
        xm[:, i] -= h
        grad[:, i] = (func(xp) - func(xm)) / (2.0 * h)
    return grad.reshape(np.shape(x))


"""
Objective:

Energy E on R^d. The callables take an (N, d) array and return N energies;
eval/grad also accept a single point.
"""
@dataclasses.dataclass(frozen=True)
class Objective:
    name: str
    d: int
    energy: Callable[[npt.NDArray], npt.NDArray]
    gradient: Optional[Callable[[npt.NDArray], npt.NDArray]] = None
    known_min: Optional[tuple] = None
    hessian_bound: Optional[float] = None
    half_width: float = 5.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"objective dimension must be positive, got {self.d}")

    def _as_batch(self, x: npt.ArrayLike) -> tuple[npt.NDArray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim <= 1
        X = x.reshape(1, -1) if single else x
        if X.shape[-1] != self.d:
            raise ValueError(f"{self.name}: expected points of dimension {self.d}, "
                             f"got {X.shape[-1]}")
        return X, single

    def eval(self, x: npt.ArrayLike):
        X, single = self._as_batch(x)
        energies = self.energy(X)
        return float(energies[0]) if single else energies

    def __call__(self, x: npt.ArrayLike):
        return self.eval(x)

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None

    def grad(self, x: npt.ArrayLike) -> npt.NDArray:
        X, single = self._as_batch(x)
        if self.gradient is not None:
            g = self.gradient(X)
        else:
            g = numerical_gradient(self.energy, X)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"{self.name}: non-finite gradient")
        return g[0] if single else g

    @property
    def minimizer(self) -> Optional[npt.NDArray]:
        if self.known_min is None:
            return None
        return np.asarray(self.known_min[0], dtype=np.float64)

    @property
    def min_energy(self) -> Optional[float]:
        if self.known_min is None:
            return None
        return float(self.known_min[1])


def _quadratic(X):
    return 0.5 * np.sum(X**2, axis=-1)


def _doublewell(X):
    return (X[:, 0]**2 - 1.0)**2


def _doublewell_grad(X):
    return 4.0 * X * (X**2 - 1.0)


def _rastrigin(X, A=10.0):
    return A * X.shape[-1] + np.sum(X**2 - A * np.cos(2.0 * np.pi * X), axis=-1)


def _rastrigin_grad(X, A=10.0):
    return 2.0 * X + 2.0 * np.pi * A * np.sin(2.0 * np.pi * X)


def _ackley(X):
    d = X.shape[-1]
    r = np.sqrt(np.sum(X**2, axis=-1) / d)
    c = np.sum(np.cos(2.0 * np.pi * X), axis=-1) / d
    return -20.0 * np.exp(-0.2 * r) - np.exp(c) + 20.0 + np.e


def _ackley_grad(X):
    d = X.shape[-1]
    r = np.sqrt(np.sum(X**2, axis=-1) / d)
    c = np.sum(np.cos(2.0 * np.pi * X), axis=-1) / d
    safe_r = np.where(r > 0.0, r, 1.0)
    # the cone at the origin has no gradient; take 0 there
    g1 = np.where(r[:, None] > 0.0,
                  4.0 * np.exp(-0.2 * r)[:, None] * X / (d * safe_r[:, None]), 0.0)
    g2 = np.exp(c)[:, None] * 2.0 * np.pi * np.sin(2.0 * np.pi * X) / d
    return g1 + g2


def make_benchmark(name: str, d: int) -> Objective:

    if d < 1:
        raise CorpusError(f"benchmark dimension must be positive, got {d}")

    logger.debug(f"benchmark {name} in d={d}")
    origin = np.zeros(d)
    if name == "quadratic":
        return Objective(name, d, _quadratic, lambda X: X.copy(),
                         known_min=(origin, 0.0), hessian_bound=1.0, half_width=5.0)
    if name == "doublewell1d":
        if d != 1:
            raise CorpusError("doublewell1d is only defined for d = 1")
        return Objective(name, 1, _doublewell, _doublewell_grad,
                         known_min=(np.ones(1), 0.0), hessian_bound=None, half_width=2.5)
    if name == "rastrigin":
        return Objective(name, d, _rastrigin, _rastrigin_grad,
                         known_min=(origin, 0.0),
                         hessian_bound=2.0 + 40.0 * np.pi**2, half_width=5.12)
    if name == "ackley":
        return Objective(name, d, _ackley, _ackley_grad,
                         known_min=(origin, 0.0), hessian_bound=None, half_width=5.0)

    raise CorpusError(f"unknown benchmark '{name}', expected one of {BENCHMARK_NAMES}")


def constant_objective(d: int, value: float = 1.0) -> Objective:

    return Objective("constant", d, lambda X: np.full(X.shape[0], float(value)),
                     lambda X: np.zeros_like(X), known_min=(np.zeros(d), float(value)))
