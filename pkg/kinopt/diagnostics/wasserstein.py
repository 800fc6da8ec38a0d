import logging

import numpy as np
import numpy.typing as npt

from kinopt.shared.rng import RngStream


logger = logging.getLogger(__name__)


def _quantile_pieces(n: int, m: int) -> tuple[npt.NDArray, npt.NDArray]:
    # common refinement of the two empirical quantile step functions on [0, 1]
    breaks = np.union1d(np.arange(n + 1) / n, np.arange(m + 1) / m)
    lengths = np.diff(breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    return mids, lengths


def wasserstein2_1d(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """
    Exact W2 between the empirical measures of two 1D sample sets, by the
    sorted-quantile coupling. Unequal sizes are compared on the common
    refinement of both quantile functions.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("wasserstein2_1d needs nonempty sample sets")

    if a.size == b.size:
        return float(np.sqrt(np.mean((a - b)**2)))

    mids, lengths = _quantile_pieces(a.size, b.size)
    qa = a[np.minimum((mids * a.size).astype(int), a.size - 1)]
    qb = b[np.minimum((mids * b.size).astype(int), b.size - 1)]
    return float(np.sqrt(np.sum(lengths * (qa - qb)**2)))


def sliced_w2(a: npt.ArrayLike, b: npt.ArrayLike, n_projections: int,
              rng: RngStream) -> float:
    """
    Sliced W2 over random unit directions, scaled by sqrt(d) so that a pure
    translation by v measures |v|.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError("sliced_w2 needs two (n, d) sample arrays of the same dimension")
    d = a.shape[1]
    if d < 2:
        raise ValueError("sliced_w2 is for d >= 2, use wasserstein2_1d in 1D")
    if n_projections < 1:
        raise ValueError("n_projections must be positive")

    directions = rng.normal((n_projections, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    squares = np.array([wasserstein2_1d(a @ theta, b @ theta)**2 for theta in directions])
    logger.debug(f"sliced W2 over {n_projections} projections in d={d}")
    return float(np.sqrt(d * np.mean(squares)))
