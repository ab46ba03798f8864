"""Voxel grids, received-power maps, traffic weights, and coverage stats.

The space is tiled with equally spaced voxels; a radio map stores received
power at each voxel center, a weight map stores how much anyone cares about
that voxel.  The planner's objective is the weighted sum of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tracing
from .geometry import point_to_segment_distance
from .scene import Aabb, Scene
from .tracing import AntennaConfig, TraceParams

__all__ = [
    "GridSpec",
    "RadioMap",
    "WeightMap",
    "WeightPolicy",
    "MapSlice",
    "build_radio_map",
    "build_weight_map",
    "utility",
    "coverage_cdf",
    "horizontal_slice",
]


@dataclass(frozen=True)
class GridSpec:
    """Equally spaced voxel tiling of an axis-aligned box.

    Voxels have edge `resolution_m`; the last voxel along an axis is clipped
    when the extent is not an exact multiple.  Values are always sampled at
    voxel centers (center of the clipped cell for clipped voxels).
    """

    bounds: Aabb
    resolution_m: float = 0.5

    def __post_init__(self):
        if self.resolution_m <= 0:
            raise ValueError("resolution_m must be > 0")

    @property
    def dims(self) -> tuple[int, int, int]:
        ext = self.bounds.extent
        return tuple(
            max(1, math.ceil(e / self.resolution_m - 1e-9)) for e in ext
        )

    def axis_centers(self, axis: int) -> np.ndarray:
        lo = self.bounds.lo[axis]
        hi = self.bounds.hi[axis]
        n = self.dims[axis]
        res = self.resolution_m
        cell_lo = lo + res * np.arange(n)
        cell_hi = np.minimum(cell_lo + res, hi)
        return (cell_lo + cell_hi) / 2.0

    def centers(self) -> np.ndarray:
        """All voxel centers, shape (nx*ny*nz, 3), C order (k fastest)."""
        xs, ys, zs = (self.axis_centers(a) for a in range(3))
        gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
        return np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)

    def voxel_index(self, point) -> tuple[int, int, int]:
        p = np.asarray(point, dtype=float)
        idx = []
        for a in range(3):
            i = int(math.floor((p[a] - self.bounds.lo[a]) / self.resolution_m))
            idx.append(min(max(i, 0), self.dims[a] - 1))
        return tuple(idx)

    def layer_for_z(self, z_height_m: float) -> int:
        if not (self.bounds.lo[2] <= z_height_m <= self.bounds.hi[2]):
            raise ValueError(
                f"z={z_height_m} outside grid bounds "
                f"[{self.bounds.lo[2]}, {self.bounds.hi[2]}]"
            )
        k = int(math.floor((z_height_m - self.bounds.lo[2]) / self.resolution_m))
        return min(k, self.dims[2] - 1)


@dataclass(frozen=True)
class RadioMap:
    """Received power (dBm) at every voxel center for one antenna position."""

    grid: GridSpec
    antenna: AntennaConfig
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != self.grid.dims:
            raise ValueError(
                f"values shape {self.values.shape} != grid dims {self.grid.dims}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("radio map contains non-finite entries")


@dataclass(frozen=True)
class WeightMap:
    """Non-negative per-voxel importance weights."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != self.grid.dims:
            raise ValueError(
                f"values shape {self.values.shape} != grid dims {self.grid.dims}"
            )
        if np.any(self.values < 0):
            raise ValueError("weights must be >= 0")

    def scaled(self, s: float) -> "WeightMap":
        return WeightMap(self.grid, self.values * float(s))


@dataclass(frozen=True)
class WeightPolicy:
    """How scene traffic annotations become voxel weights.

    Every voxel starts at `w_base`; voxels within `r_m` meters of a machine
    gain that machine's traffic weight, and voxels within `r_m` of any
    segment of a trajectory gain that trajectory's weight (once per
    trajectory, however many of its segments pass nearby).
    """

    w_base: float = 1.0
    r_m: float = 1.0

    def __post_init__(self):
        if self.w_base < 0 or self.r_m <= 0:
            raise ValueError("w_base must be >= 0 and r_m > 0")


@dataclass(frozen=True)
class MapSlice:
    """One horizontal voxel layer of a map with its grid coordinates."""

    values: np.ndarray
    layer_index: int
    z_center_m: float
    x_centers: np.ndarray = field(repr=False)
    y_centers: np.ndarray = field(repr=False)


def build_radio_map(
    scene: Scene,
    antenna: AntennaConfig,
    grid: GridSpec,
    params: TraceParams = TraceParams(),
    workers: int = 1,
    near_field_m: float = tracing.DEFAULT_NEAR_FIELD_M,
) -> RadioMap:
    """Received power at every voxel center of `grid`.

    Deterministic: results depend only on inputs, not on `workers`.
    """
    a = np.asarray(antenna.position, dtype=float)
    if not scene.bounds.contains(a):
        raise ValueError(f"antenna position {antenna.position} outside scene bounds")
    dbm = tracing.received_power_at_points(
        scene, antenna, grid.centers(), params, near_field_m=near_field_m, workers=workers
    )
    return RadioMap(grid=grid, antenna=antenna, values=dbm.reshape(grid.dims))


def build_weight_map(scene: Scene, grid: GridSpec, policy: WeightPolicy) -> WeightMap:
    centers = grid.centers()
    values = np.full(centers.shape[0], policy.w_base)
    for m in scene.machines:
        pos = np.asarray(m.position, dtype=float)
        near = np.linalg.norm(centers - pos[None, :], axis=1) <= policy.r_m
        values[near] += m.traffic_weight
    for traj in scene.trajectories:
        wps = np.asarray(traj.waypoints, dtype=float)
        near = np.zeros(centers.shape[0], dtype=bool)
        for a, b in zip(wps[:-1], wps[1:]):
            near |= point_to_segment_distance(centers, a, b) <= policy.r_m
        values[near] += traj.traffic_weight
    return WeightMap(grid=grid, values=values.reshape(grid.dims))


def utility(radio_map: RadioMap, weights: WeightMap, scale: str = "dbm") -> float:
    """Weighted sum of the map over all voxels.

    `scale` selects what gets summed: "dbm" weights the dBm values directly,
    "linear" weights linear milliwatts instead.
    """
    if radio_map.grid != weights.grid:
        raise ValueError("radio map and weight map use different grids")
    if scale == "dbm":
        return float(np.sum(weights.values * radio_map.values))
    if scale == "linear":
        return float(np.sum(weights.values * 10.0 ** (radio_map.values / 10.0)))
    raise ValueError(f"unknown utility scale {scale!r} (expected 'dbm' or 'linear')")


def coverage_cdf(
    radio_map: RadioMap, mask: WeightMap | None = None
) -> list[tuple[float, float]]:
    """Empirical CDF of received power over voxels.

    With `mask`, only voxels where the mask is positive are counted.  Returns
    (value_dbm, cumulative_fraction) pairs sorted ascending; the final
    fraction is exactly 1.
    """
    values = radio_map.values.ravel()
    if mask is not None:
        if mask.grid != radio_map.grid:
            raise ValueError("mask uses a different grid")
        values = values[mask.values.ravel() > 0]
    if values.size == 0:
        raise ValueError("no voxels selected for CDF")
    uniq, counts = np.unique(values, return_counts=True)
    fractions = np.cumsum(counts) / values.size
    fractions[-1] = 1.0
    return [(float(v), float(f)) for v, f in zip(uniq, fractions)]


def horizontal_slice(radio_map: RadioMap, z_height_m: float) -> MapSlice:
    """The (i, j) voxel layer containing height z_height_m."""
    grid = radio_map.grid
    k = grid.layer_for_z(z_height_m)
    return MapSlice(
        values=radio_map.values[:, :, k].copy(),
        layer_index=k,
        z_center_m=float(grid.axis_centers(2)[k]),
        x_centers=grid.axis_centers(0),
        y_centers=grid.axis_centers(1),
    )
