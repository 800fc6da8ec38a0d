import numpy as np
import numpy.typing as npt

from kinopt.shared.errors import NumericError


def gibbs_weights(energies: npt.ArrayLike, alpha: float) -> npt.NDArray:
    """Normalised weights proportional to exp(-alpha * E), shifted by min E."""

    energies = np.asarray(energies, dtype=np.float64)
    if energies.size == 0:
        raise ValueError("gibbs weights need at least one energy")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if not np.all(np.isfinite(energies)):
        raise NumericError("non-finite energy in Gibbs weights")

    w = np.exp(-alpha * (energies - energies.min()))
    total = w.sum()
    if not total > 0.0:
        raise NumericError("zero Gibbs normalisation")
    return w / total


def gibbs_mean(points: npt.ArrayLike, energies: npt.ArrayLike, alpha: float) -> npt.NDArray:
    """
    Consensus point m^alpha: the Boltzmann-Gibbs weighted average of the
    points. Tends to the lowest-energy point as alpha grows.
    """
    points = np.asarray(points, dtype=np.float64)
    energies = np.asarray(energies, dtype=np.float64)
    if points.shape[0] == 0:
        raise ValueError("gibbs_mean needs at least one point")
    if points.shape[0] != energies.shape[0]:
        raise ValueError(f"got {points.shape[0]} points but {energies.shape[0]} energies")

    w = gibbs_weights(energies, alpha)
    # consensus maps to itself bit for bit
    if np.all(points == points[0]):
        return points[0].copy() if points.ndim > 1 else float(points[0])
    if points.ndim == 1:
        return np.dot(w, points)
    return w @ points
