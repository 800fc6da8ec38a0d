import dataclasses
import logging
from typing import Callable, Optional

import numpy as np
import numpy.typing as npt
from scipy.linalg import cho_factor, cho_solve

from kinopt.shared.objective import Objective, numerical_gradient
from kinopt.shared.rng import RngStream


logger = logging.getLogger(__name__)

PROBLEM_KINDS = ("identity", "random", "tanh")


"""
InverseProblem:

Recover x from y = F(x) + eta with eta ~ N(0, Gamma). F is either a
matrix (linear problem) or a map from an (N, d) batch to (N, m) images.
"""
@dataclasses.dataclass
class InverseProblem:
    y: npt.NDArray
    Gamma: npt.NDArray
    matrix: Optional[npt.NDArray] = None
    forward: Optional[Callable[[npt.NDArray], npt.NDArray]] = None
    d: Optional[int] = None
    x_star: Optional[npt.NDArray] = None
    name: str = "inverse_problem"

    def __post_init__(self):
        self.y = np.atleast_1d(np.asarray(self.y, dtype=np.float64))
        self.Gamma = np.atleast_2d(np.asarray(self.Gamma, dtype=np.float64))
        m = self.y.size
        if self.Gamma.shape != (m, m):
            raise ValueError(f"noise covariance must be {m}x{m}, got {self.Gamma.shape}")
        if not np.allclose(self.Gamma, self.Gamma.T, rtol=1e-12, atol=1e-14):
            raise ValueError("noise covariance must be symmetric")
        if np.linalg.eigvalsh(self.Gamma).min() <= 0.0:
            raise ValueError("noise covariance must be positive definite")

        if self.matrix is not None:
            self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=np.float64))
            if self.matrix.shape[0] != m:
                raise ValueError(f"forward matrix has {self.matrix.shape[0]} rows, data has {m}")
            self.d = self.matrix.shape[1]
        elif self.forward is None or self.d is None:
            raise ValueError("give either a forward matrix or a forward map with its dimension d")
        if self.x_star is not None:
            self.x_star = np.atleast_1d(np.asarray(self.x_star, dtype=np.float64))

        self._gamma_factor = cho_factor(self.Gamma)

    @property
    def m(self) -> int:
        return self.y.size

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None

    def forward_images(self, X: npt.ArrayLike) -> npt.NDArray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.is_linear:
            return X @ self.matrix.T
        return np.atleast_2d(self.forward(X))

    def gamma_solve(self, R: npt.NDArray) -> npt.NDArray:
        """Gamma^{-1} applied to each row of R."""
        return cho_solve(self._gamma_factor, np.atleast_2d(R).T, check_finite=False).T

    def gamma_inverse(self) -> npt.NDArray:
        return cho_solve(self._gamma_factor, np.eye(self.m))

    def residuals(self, X: npt.ArrayLike) -> npt.NDArray:
        return self.y - self.forward_images(X)

    def misfit(self, X: npt.ArrayLike):
        """E(x) = 1/2 |Gamma^{-1/2} (y - F(x))|^2, per row of a batch."""
        X = np.asarray(X, dtype=np.float64)
        R = self.residuals(X)
        E = 0.5 * np.sum(R * self.gamma_solve(R), axis=1)
        return float(E[0]) if X.ndim <= 1 else E

    def misfit_gradient(self, X: npt.ArrayLike) -> npt.NDArray:
        """Analytic -F^T Gamma^{-1} (y - F x) for linear F, central differences otherwise."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.is_linear:
            return -self.gamma_solve(self.residuals(X)) @ self.matrix
        return numerical_gradient(self.misfit, X)

    def as_objective(self) -> Objective:
        known_min = None
        if self.x_star is not None and np.allclose(self.forward_images(self.x_star)[0], self.y,
                                                   rtol=1e-12, atol=1e-12):
            known_min = (self.x_star, 0.0)
        return Objective(self.name, self.d, self.misfit, self.misfit_gradient,
                         known_min=known_min)


def make_inverse_problem(kind: str, d: int, rng: RngStream, m: Optional[int] = None,
                         noise_scale: float = 1.0,
                         x_star: Optional[npt.ArrayLike] = None) -> InverseProblem:
    """
    Test problems with exact data y = F(x*): identity F, a random Gaussian
    matrix (m x d), or the nonlinear map tanh(A x). Gamma is noise_scale * I.
    """
    if kind not in PROBLEM_KINDS:
        raise ValueError(f"unknown inverse problem '{kind}', expected one of {PROBLEM_KINDS}")
    if d < 1:
        raise ValueError("problem dimension must be positive")
    m = d if m is None or kind == "identity" else m
    x_star = rng.normal(d) if x_star is None else np.atleast_1d(np.asarray(x_star, float))
    Gamma = noise_scale * np.eye(m)
    logger.debug(f"inverse problem {kind}: d={d}, m={m}, noise scale {noise_scale}")

    if kind == "identity":
        return InverseProblem(y=x_star.copy(), Gamma=Gamma, matrix=np.eye(d), x_star=x_star,
                              name="identity")
    A = rng.normal((m, d)) / np.sqrt(d)
    if kind == "random":
        return InverseProblem(y=A @ x_star, Gamma=Gamma, matrix=A, x_star=x_star, name="random")

    def forward(X):
        return np.tanh(X @ A.T)

    return InverseProblem(y=np.tanh(A @ x_star), Gamma=Gamma, forward=forward, d=d,
                          x_star=x_star, name="tanh")
