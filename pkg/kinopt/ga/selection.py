import dataclasses
from typing import Optional

import numpy as np
import numpy.typing as npt

from kinopt.diagnostics.measures import EmpiricalMeasure
from kinopt.shared.consensus import gibbs_weights
from kinopt.shared.errors import NumericError


SELECTION_NAMES = ("boltzmann_gibbs", "random_wheel", "rank")


@dataclasses.dataclass(frozen=True)
class SelectionKind:
    """Fitness rule for choosing parents; alpha only matters for boltzmann_gibbs."""
    name: str = "boltzmann_gibbs"
    alpha: float = 1.0

    def __post_init__(self):
        if self.name not in SELECTION_NAMES:
            raise ValueError(f"unknown selection '{self.name}', expected one of {SELECTION_NAMES}")
        if self.alpha < 0.0:
            raise ValueError(f"selection strength alpha must be nonnegative, got {self.alpha}")

    @classmethod
    def boltzmann_gibbs(cls, alpha: float) -> "SelectionKind":
        return cls("boltzmann_gibbs", alpha)

    @classmethod
    def random_wheel(cls) -> "SelectionKind":
        return cls("random_wheel")

    @classmethod
    def rank_based(cls) -> "SelectionKind":
        return cls("rank")


def selection_weights(energies: npt.ArrayLike, kind: SelectionKind,
                      base_weights: Optional[npt.ArrayLike] = None) -> npt.NDArray:
    """
    Normalised parent probabilities. base_weights are the masses of a
    weighted empirical measure (uniform for a plain ensemble); the rank of
    a point is the mass of points with energy at least its own.
    """
    energies = np.asarray(energies, dtype=np.float64)
    N = energies.size
    if N == 0:
        raise ValueError("selection needs at least one energy")
    if not np.all(np.isfinite(energies)):
        raise NumericError("non-finite energy in selection weights")
    base = np.full(N, 1.0 / N) if base_weights is None \
        else np.asarray(base_weights, dtype=np.float64)

    if kind.name == "boltzmann_gibbs":
        w = base * gibbs_weights(energies, kind.alpha)
    elif kind.name == "random_wheel":
        w = base * (energies.max() - energies)
    else:
        order = np.argsort(energies, kind="stable")
        # mass of strictly better points, so ties share the same rank
        strictly_better = np.concatenate([[0.0], np.cumsum(base[order])])
        better = strictly_better[np.searchsorted(energies[order], energies, side="left")]
        w = base * (1.0 - better)

    total = w.sum()
    if not total > 0.0:
        # all-equal energies under the random wheel
        return base / base.sum()
    return w / total


"""
ParentMeasure:

The ensemble re-weighted by its selection probabilities P^1 ... P^N.
"""
@dataclasses.dataclass
class ParentMeasure(EmpiricalMeasure):

    @classmethod
    def from_points(cls, points: npt.ArrayLike, energies: npt.ArrayLike, kind: SelectionKind,
                    base_weights: Optional[npt.ArrayLike] = None) -> "ParentMeasure":
        return cls(np.asarray(points, dtype=np.float64),
                   selection_weights(energies, kind, base_weights))
