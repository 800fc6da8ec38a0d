import dataclasses

import numpy as np
import numpy.typing as npt

from kinopt.diagnostics.measures import EmpiricalMeasure
from kinopt.enkf.problem import InverseProblem
from kinopt.shared.ensemble import Ensemble


def _is_consensus(X: npt.NDArray) -> bool:
    return bool(np.all(X == X[0]))


@dataclasses.dataclass(frozen=True)
class EnsembleStats:
    """Ensemble means and (1/N) cross-covariances of particles and forward images."""
    x_bar: npt.NDArray
    F_bar: npt.NDArray
    C: npt.NDArray
    D: npt.NDArray
    images: npt.NDArray


def ensemble_stats(ensemble: Ensemble, problem: InverseProblem) -> EnsembleStats:
    return stats_from_positions(ensemble.positions, problem)


def stats_from_positions(X: npt.NDArray, problem: InverseProblem) -> EnsembleStats:
    """
    C = 1/N sum (x - x_bar)(F(x) - F_bar)^T and D = 1/N sum (F(x) - F_bar)(F(x) - F_bar)^T.
    A consensus ensemble gives exact zeros.
    """
    if X.shape[1] != problem.d:
        raise ValueError(f"ensemble dimension {X.shape[1]} does not match problem d={problem.d}")
    images = problem.forward_images(X)
    N = X.shape[0]
    if _is_consensus(X):
        return EnsembleStats(X[0].copy(), images[0].copy(),
                             np.zeros((problem.d, problem.m)), np.zeros((problem.m, problem.m)),
                             images)
    x_bar = X.mean(axis=0)
    F_bar = images.mean(axis=0)
    eX = X - x_bar
    eF = images - F_bar
    return EnsembleStats(x_bar, F_bar, eX.T @ eF / N, eF.T @ eF / N, images)


@dataclasses.dataclass(frozen=True)
class MomentFields:
    mean: npt.NDArray
    forward_mean: npt.NDArray
    cross_covariance: npt.NDArray
    second_moment: npt.NDArray


def moment_fields(measure: EmpiricalMeasure, problem: InverseProblem) -> MomentFields:
    """
    First moment m, forward moment m_F, cross-covariance
    sum_i w_i (x_i - m)(F(x_i) - m_F)^T and second moment of a weighted measure.
    """
    images = problem.forward_images(measure.support)
    mean = measure.mean()
    forward_mean = measure.weights @ images
    centered = (measure.support - mean) * measure.weights[:, None]
    return MomentFields(mean=mean,
                        forward_mean=forward_mean,
                        cross_covariance=centered.T @ (images - forward_mean),
                        second_moment=measure.second_moment())


"""
SpreadMatrix:

The N x N matrix of pairwise spreads
E[k, l] = <F e^l, Gamma F e^k> with e = x - x_bar (forward image deviations
when F is nonlinear), and its operator norm.
"""
@dataclasses.dataclass(frozen=True)
class SpreadMatrix:
    matrix: npt.NDArray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def spread_matrix(ensemble: Ensemble, problem: InverseProblem,
                  use_inverse: bool = False) -> SpreadMatrix:
    """use_inverse weights with Gamma^{-1} instead of Gamma."""

    X = ensemble.positions
    if _is_consensus(X):
        return SpreadMatrix(np.zeros((X.shape[0], X.shape[0])))
    if problem.is_linear:
        images = problem.forward_images(X - X.mean(axis=0))
    else:
        images = problem.forward_images(X)
        images = images - images.mean(axis=0)
    weighted = problem.gamma_solve(images) if use_inverse else images @ problem.Gamma
    return SpreadMatrix(weighted @ images.T)
