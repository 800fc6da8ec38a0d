import dataclasses
import logging
from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy.optimize import nnls

from kinopt.enkf.problem import InverseProblem
from kinopt.enkf.update import eki_integrate
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.rng import INIT_STREAM, RngStream


logger = logging.getLogger(__name__)

HULL_TOL = 1e-8


def affine_hull_residual(points: npt.ArrayLike, hull_points: npt.ArrayLike) -> npt.NDArray:
    """Distance of every point to the affine hull of hull_points, by least-squares projection."""

    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    hull_points = np.atleast_2d(np.asarray(hull_points, dtype=np.float64))
    offsets = points - hull_points[0]
    basis = (hull_points[1:] - hull_points[0]).T
    if basis.shape[1] == 0:
        return np.linalg.norm(offsets, axis=1)
    coeffs = np.linalg.lstsq(basis, offsets.T, rcond=None)[0]
    return np.linalg.norm(offsets.T - basis @ coeffs, axis=0)


def convex_hull_member(point: npt.ArrayLike, hull_points: npt.ArrayLike,
                       tol: float = HULL_TOL) -> bool:
    """
    Whether point is a convex combination of hull_points: nonnegative
    least squares with the sum-to-one row weighted by the data scale.
    """
    point = np.atleast_1d(np.asarray(point, dtype=np.float64))
    hull_points = np.atleast_2d(np.asarray(hull_points, dtype=np.float64))
    scale = max(1.0, float(np.abs(hull_points).max()))
    A = np.vstack([hull_points.T, scale * np.ones(hull_points.shape[0])])
    b = np.append(point, scale)
    _, residual = nnls(A, b)
    return residual <= tol * scale * np.sqrt(b.size)


def collapse_slope(times: npt.ArrayLike, norms: npt.ArrayLike, decades: float = 1.0) -> float:
    """Least-squares slope of log norm against log time over the last decades of the run."""

    times = np.asarray(times, dtype=np.float64)
    norms = np.asarray(norms, dtype=np.float64)
    if times.size == 0:
        raise ValueError("collapse slope needs a nonempty series")
    window = (times >= times.max() / 10.0**decades) & (times > 0.0) & (norms > 0.0)
    if window.sum() < 2:
        raise ValueError("fewer than two positive points in the fitting window")
    return float(np.polyfit(np.log(times[window]), np.log(norms[window]), 1)[0])


@dataclasses.dataclass(frozen=True)
class CollapseRow:
    scale: float
    slope: float
    final_norm: float
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def enkf_collapse_experiment(h_list: Sequence[float], problem: InverseProblem, N: int,
                             horizon: float, rng: RngStream, initial_mean: float = 0.0,
                             initial_std: float = 1.0,
                             method: str = "euler") -> list[CollapseRow]:
    """
    For each step size h, integrates the ensemble flow from one common
    initial ensemble and fits the decay rate of the spread norm.
    """
    initial = Ensemble.gaussian(N, problem.d, rng.substream(INIT_STREAM),
                                mean=initial_mean, std=initial_std)
    rows = []
    for h in h_list:
        trajectory = eki_integrate(initial, problem, horizon, h, method=method)
        times = [row["time"] for row in trajectory.rows]
        norms = [row["spread_norm"] for row in trajectory.rows]
        slope = collapse_slope(times, norms)
        logger.info(f"EKI collapse h={h}: slope {slope:.4f}, final spread {norms[-1]:.3e}")
        rows.append(CollapseRow(scale=float(h), slope=slope, final_norm=float(norms[-1]),
                                samples=N, seed=rng.seed))
    return rows
