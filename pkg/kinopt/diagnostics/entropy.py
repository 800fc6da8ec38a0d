import logging
from typing import Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from kinopt.diagnostics.measures import EmpiricalMeasure, GridDensity1D
from kinopt.shared.errors import NumericError, UnsupportedComparisonError
from kinopt.shared.ensemble import Ensemble
from kinopt.shared.objective import Objective


logger = logging.getLogger(__name__)

DENSITY_FLOOR = 1e-300


def _check_temperature(T: float):
    if not T > 0.0:
        raise ValueError(f"temperature must be positive, got {T}")


def _energies_on(obj: Objective, nodes: npt.NDArray) -> npt.NDArray:
    if obj.d != 1:
        raise UnsupportedComparisonError(f"{obj.name}: grid densities are 1D only, d={obj.d}")
    return obj.eval(nodes.reshape(-1, 1))


def _trapezoid_weights(nodes: npt.NDArray) -> npt.NDArray:
    w = np.full(nodes.size, nodes[1] - nodes[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def gibbs_density(obj: Objective, T: float, nodes: npt.ArrayLike) -> GridDensity1D:
    """
    Boltzmann-Gibbs density exp(-E/T) / Z_T on the grid, Z_T by the
    trapezoid rule with energies shifted by their minimum.
    """
    _check_temperature(T)
    nodes = np.asarray(nodes, dtype=np.float64)
    energies = _energies_on(obj, nodes)
    emin = energies.min()
    shifted = np.exp(-(energies - emin) / T)
    # a single surviving node means the density is narrower than the grid spacing
    if np.count_nonzero(shifted > DENSITY_FLOOR) < 2:
        raise NumericError(f"{obj.name}: Gibbs density underflows on the grid at T={T}, "
                           "use a narrower grid or a higher temperature")
    mass = trapezoid(shifted, nodes)
    log_z = float(np.log(mass) - emin / T)
    return GridDensity1D(nodes, shifted / mass, log_normalizer=log_z)


def kl_divergence(g: GridDensity1D, f: GridDensity1D, printed_orientation: bool = False) -> float:
    """
    Relative entropy int g log(g / f). printed_orientation integrates
    f log(g / f) instead.
    """
    if not g.same_grid(f):
        raise ValueError("kl_divergence needs both densities on the same grid")

    gv = np.maximum(g.values, DENSITY_FLOOR)
    fv = np.maximum(f.values, DENSITY_FLOOR)
    log_ratio = np.log(gv) - np.log(fv)
    if printed_orientation:
        return float(trapezoid(fv * log_ratio, g.nodes))
    # nonnegative up to rounding for densities normalised on the same grid
    return max(float(trapezoid(gv * log_ratio, g.nodes)), 0.0)


def histogram_density(samples: npt.ArrayLike, nodes: npt.ArrayLike) -> GridDensity1D:
    """Histogram of 1D samples with one bin centred on each grid node."""

    samples = np.asarray(samples, dtype=np.float64).ravel()
    nodes = np.asarray(nodes, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("histogram_density needs at least one sample")
    h = nodes[1] - nodes[0]
    edges = np.concatenate([nodes - 0.5 * h, [nodes[-1] + 0.5 * h]])
    counts, _ = np.histogram(samples, bins=edges)
    inside = counts.sum()
    if inside == 0:
        raise ValueError("no samples fall inside the histogram grid")
    if inside < samples.size:
        logger.debug(f"{samples.size - inside} of {samples.size} samples fall outside the grid")
    return GridDensity1D(nodes, counts / (inside * h)).normalized()


def entropy_trace(snapshots: Sequence[Ensemble], obj: Objective, T: float,
                  nodes: npt.ArrayLike) -> list[float]:
    """KL(histogram || Gibbs density) for each ensemble snapshot."""

    gibbs = gibbs_density(obj, T, nodes)
    trace = []
    for snapshot in snapshots:
        trace.append(kl_divergence(histogram_density(snapshot.positions[:, 0], gibbs.nodes),
                                   gibbs))
    return trace


def laplace_functional(measure: Union[EmpiricalMeasure, GridDensity1D],
                       obj: Objective, T: float) -> float:
    """-T log int exp(-E/T) dmeasure, computed with the minimum energy factored out."""

    _check_temperature(T)
    if isinstance(measure, EmpiricalMeasure):
        energies = obj.eval(measure.support)
        mask = measure.weights > 0.0
        return float(-T * logsumexp(-energies[mask] / T, b=measure.weights[mask]))

    energies = _energies_on(obj, measure.nodes)
    support = measure.values > 0.0
    emin = energies[support].min()
    integral = trapezoid(np.exp(-(energies - emin) / T) * measure.values, measure.nodes)
    return float(emin - T * np.log(integral))


def dissipation_functional(g: GridDensity1D, obj: Objective, T: float, sigma: float,
                           proposal_weighting: bool = True) -> float:
    """
    Entropy dissipation I[g] on the grid:

        1/2 sum_ij w_i w_j K(x_i, x_j) exp(-max(E_i, E_j)/T) / Z_T h(r_j, r_i)

    with r = g / f_T the ratio to the Gibbs density, h(u, v) = (u - v)(log u - log v)
    and K the Gaussian proposal density of scale sigma (K = 1 when
    proposal_weighting is off). exp(-max(E_i, E_j)/T) / Z_T equals min(f_i, f_j).
    """
    _check_temperature(T)
    if proposal_weighting and not sigma > 0.0:
        raise ValueError(f"proposal scale must be positive, got {sigma}")

    f = gibbs_density(obj, T, g.nodes)
    gv = np.maximum(g.values, DENSITY_FLOOR)
    fv = np.maximum(f.values, DENSITY_FLOOR)
    log_r = np.log(gv) - np.log(fv)
    r = np.exp(log_r)

    h = (r[None, :] - r[:, None]) * (log_r[None, :] - log_r[:, None])
    weight = np.minimum(fv[:, None], fv[None, :])
    if proposal_weighting:
        diff = g.nodes[None, :] - g.nodes[:, None]
        weight = weight * np.exp(-0.5 * (diff / sigma)**2) / (np.sqrt(2.0 * np.pi) * sigma)
    w = _trapezoid_weights(g.nodes)
    return float(0.5 * np.einsum("i,j,ij->", w, w, weight * h))
