import dataclasses
from typing import Sequence

import numpy as np
import numpy.typing as npt
import xarray as xr

from kinopt.shared.kinopt_utils import check_file_is_there
from kinopt.shared.rng import RngStream


"""
Ensemble:

N particles in d dimensions, stored as an (N, d) float64 array.
"""
@dataclasses.dataclass
class Ensemble:
    positions: npt.NDArray

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=np.float64, ndmin=2)
        if self.positions.ndim != 2 or self.positions.shape[0] < 1:
            raise ValueError("an ensemble needs an (N, d) array with N >= 1")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("ensemble coordinates must be finite")

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    @classmethod
    def gaussian(cls, N: int, d: int, rng: RngStream,
                 mean: float | npt.ArrayLike = 0.0, std: float = 1.0) -> "Ensemble":
        return cls(np.asarray(mean, dtype=np.float64) + std * rng.normal((N, d)))

    @classmethod
    def consensus(cls, point: npt.ArrayLike, N: int) -> "Ensemble":
        return cls(np.tile(np.asarray(point, dtype=np.float64), (N, 1)))

    def copy(self) -> "Ensemble":
        return Ensemble(self.positions.copy())

    def mean(self) -> npt.NDArray:
        return self.positions.mean(axis=0)

    def variance(self) -> float:
        # trace of the (1/N) covariance
        return float(np.sum(self.positions.var(axis=0)))

    def to_dataset(self) -> xr.Dataset:
        return xr.Dataset(
            data_vars=dict(
                positions=xr.DataArray(
                    data=self.positions,
                    dims=["particle", "dim"],
                    attrs=dict(standard_name="particle positions"),
                )
            )
        )

    def write(self, filepath: str):
        self.to_dataset().to_netcdf(filepath)

    @classmethod
    def read(cls, filepath: str) -> "Ensemble":
        check_file_is_there(filepath)
        with xr.open_dataset(filepath) as dataset:
            return cls(dataset["positions"].values)


def snapshots_to_dataset(snapshots: Sequence[Ensemble],
                         times: Sequence[float],
                         attrs: dict = None) -> xr.Dataset:

    data = np.stack([snap.positions for snap in snapshots])
    return xr.Dataset(
        data_vars=dict(
            positions=xr.DataArray(
                data=data,
                dims=["time", "particle", "dim"],
                attrs=dict(standard_name="ensemble snapshots"),
            )
        ),
        coords=dict(time=np.asarray(times, dtype=np.float64)),
        attrs=attrs or {},
    )


"""
Trajectory:

Snapshots of an ensemble at recorded times plus one diagnostics row per
step. Drivers of every algorithm return one.
"""
@dataclasses.dataclass
class Trajectory:
    times: list = dataclasses.field(default_factory=list)
    snapshots: list = dataclasses.field(default_factory=list)
    rows: list = dataclasses.field(default_factory=list)

    def record(self, time: float, ensemble: Ensemble):
        self.times.append(float(time))
        self.snapshots.append(ensemble)

    @property
    def final(self) -> Ensemble:
        if not self.snapshots:
            raise ValueError("trajectory has no snapshots")
        return self.snapshots[-1]

    def snapshot_at(self, time: float) -> Ensemble:
        return self.snapshots[int(np.argmin(np.abs(np.asarray(self.times) - time)))]

    def to_dataset(self, attrs: dict = None) -> xr.Dataset:
        return snapshots_to_dataset(self.snapshots, self.times, attrs)
