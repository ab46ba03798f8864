"""Antenna-placement search: maximize weighted received power over a region.

The objective (weighted map sum) is piecewise constant in the antenna
position — voxel sampling and the discrete path set make it non-smooth — so
the local ascent is a derivative-free compass search with step halving
rather than an analytic gradient step.  Multiple instances start from
Gaussian perturbations of the traffic center and the best converged result
wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mapping import GridSpec, RadioMap, WeightMap, build_radio_map, utility
from .scene import Aabb, Point3, Scene, geometric_center
from .tracing import AntennaConfig, TraceParams

__all__ = [
    "DeploymentRegion",
    "PlannerParams",
    "SearchInstance",
    "PlanResult",
    "sample_initial_positions",
    "local_search",
    "plan",
    "region_from_dict",
    "region_to_dict",
]

_REGION_KINDS = ("full", "box", "ceiling")


@dataclass(frozen=True)
class DeploymentRegion:
    """Where the antenna is allowed to go.

    kind "full" is the whole scene volume, "box" an axis-aligned sub-volume,
    "ceiling" a horizontal rectangle at a fixed height (the usual mounting
    constraint).  A ceiling region leaves two free axes, the others three.
    """

    kind: str
    lo: Point3 | None = None
    hi: Point3 | None = None

    def __post_init__(self):
        if self.kind not in _REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "full":
            if self.lo is not None or self.hi is not None:
                raise ValueError("full region takes no extent")
            return
        if self.lo is None or self.hi is None:
            raise ValueError(f"{self.kind} region needs lo and hi corners")
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError(f"region corners out of order: {lo} > {hi}")
        if self.kind == "ceiling" and lo[2] != hi[2]:
            raise ValueError("ceiling region must have a single z")

    @staticmethod
    def full() -> "DeploymentRegion":
        return DeploymentRegion(kind="full")

    @staticmethod
    def box(a, b) -> "DeploymentRegion":
        lo = tuple(min(x, y) for x, y in zip(a, b))
        hi = tuple(max(x, y) for x, y in zip(a, b))
        return DeploymentRegion(kind="box", lo=lo, hi=hi)

    @staticmethod
    def ceiling(z: float, x0: float, y0: float, x1: float, y1: float) -> "DeploymentRegion":
        lo = (min(x0, x1), min(y0, y1), z)
        hi = (max(x0, x1), max(y0, y1), z)
        return DeploymentRegion(kind="ceiling", lo=lo, hi=hi)

    def resolve(self, bounds: Aabb | None) -> tuple[np.ndarray, np.ndarray]:
        """Region intersected with scene bounds as (lo, hi) arrays."""
        if self.kind == "full":
            if bounds is None:
                raise ValueError("full region needs scene bounds to resolve")
            return np.array(bounds.lo), np.array(bounds.hi)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        if bounds is not None:
            lo = np.maximum(lo, bounds.lo)
            hi = np.minimum(hi, bounds.hi)
        if np.any(lo > hi):
            raise ValueError("region does not intersect scene bounds")
        return lo, hi

    def project(self, point, bounds: Aabb | None = None) -> np.ndarray:
        lo, hi = self.resolve(bounds)
        return np.clip(np.asarray(point, dtype=float), lo, hi)

    def contains(self, point, bounds: Aabb | None = None, tol: float = 1e-9) -> bool:
        lo, hi = self.resolve(bounds)
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= lo - tol) and np.all(p <= hi + tol))


@dataclass(frozen=True)
class PlannerParams:
    n_instances: int = 8
    init_spread_m: float = 2.0
    step_init_m: float = 2.0
    step_min_m: float = 0.1
    max_iters: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.n_instances < 1:
            raise ValueError("n_instances must be >= 1")
        if not (0 < self.step_min_m < self.step_init_m):
            raise ValueError("need 0 < step_min_m < step_init_m")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.init_spread_m < 0:
            raise ValueError("init_spread_m must be >= 0")


@dataclass(frozen=True)
class SearchInstance:
    """One local search run: where it started, where it ended, how."""

    init_position: Point3
    final_position: Point3
    final_utility: float
    iterations: int
    utility_trace: tuple[float, ...]


@dataclass(frozen=True)
class PlanResult:
    best_position: Point3
    best_utility: float
    instances: tuple[SearchInstance, ...]
    radio_map: RadioMap

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "best_position": list(self.best_position),
            "best_utility": self.best_utility,
            "instances": [
                {
                    "init_position": list(i.init_position),
                    "final_position": list(i.final_position),
                    "final_utility": i.final_utility,
                    "iterations": i.iterations,
                    "utility_trace": list(i.utility_trace),
                }
                for i in self.instances
            ],
        }


def sample_initial_positions(
    center,
    region: DeploymentRegion,
    params: PlannerParams,
    bounds: Aabb | None = None,
) -> list[np.ndarray]:
    """N starting points: the projected center first, Gaussian spread after.

    Deterministic for a given seed.
    """
    c = np.asarray(center, dtype=float)
    rng = np.random.default_rng(params.seed)
    positions = [region.project(c, bounds)]
    for _ in range(params.n_instances - 1):
        offset = rng.normal(0.0, params.init_spread_m, size=3)
        positions.append(region.project(c + offset, bounds))
    return positions


_NEIGHBOR_ORDER = ((0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0))


def local_search(
    init,
    region: DeploymentRegion,
    objective: Callable[[np.ndarray], float],
    params: PlannerParams,
    bounds: Aabb | None = None,
) -> SearchInstance:
    """Compass search over the region's free axes.

    Each round evaluates +/- step along every free axis (moves clamped to
    the region), takes the first best strictly improving neighbor, and
    halves the step when no neighbor improves.  Stops when the step drops
    below step_min_m or after max_iters rounds.  The returned trace holds
    the initial utility followed by each accepted move's utility, so it is
    non-decreasing by construction.
    """
    lo, hi = region.resolve(bounds)
    free = [a for a in range(3) if hi[a] - lo[a] > 1e-12]
    x = region.project(init, bounds)
    u = float(objective(x))
    trace = [u]
    step = params.step_init_m
    iters = 0
    while step >= params.step_min_m and iters < params.max_iters:
        iters += 1
        best_u = u
        best_x = None
        for axis, sign in _NEIGHBOR_ORDER:
            if axis not in free:
                continue
            cand = x.copy()
            cand[axis] += sign * step
            cand = np.clip(cand, lo, hi)
            if np.array_equal(cand, x):
                continue
            cu = float(objective(cand))
            if cu > best_u:
                best_u = cu
                best_x = cand
        if best_x is None:
            step /= 2.0
        else:
            x = best_x
            u = best_u
            trace.append(u)
    return SearchInstance(
        init_position=tuple(float(v) for v in region.project(init, bounds)),
        final_position=tuple(float(v) for v in x),
        final_utility=u,
        iterations=iters,
        utility_trace=tuple(trace),
    )


def _cache_key(pos: np.ndarray) -> tuple[int, int, int]:
    # 1 mm quantization: close-enough revisits reuse the traced map
    return tuple(int(round(v * 1000.0)) for v in pos)


def plan(
    scene: Scene,
    region: DeploymentRegion,
    weights: WeightMap,
    grid: GridSpec,
    antenna_template: AntennaConfig,
    trace: TraceParams = TraceParams(),
    params: PlannerParams = PlannerParams(),
    workers: int = 1,
    utility_scale: str = "dbm",
    progress: Callable[[int, int], None] | None = None,
) -> PlanResult:
    """Multi-start placement search; returns the best converged instance.

    The search center is the mean machine position (scene bounds center if
    the scene has no machines).  Radio maps are cached by antenna position
    quantized to 1 mm, so instances that revisit a position pay once.
    """
    if weights.grid != grid:
        raise ValueError("weight map grid differs from planning grid")
    if not np.any(weights.values > 0):
        raise ValueError("weight map is all zeros; the objective is constant")
    lo, hi = region.resolve(scene.bounds)  # raises if empty
    del lo, hi

    if scene.machines:
        center = geometric_center(scene)
    else:
        center = (np.array(scene.bounds.lo) + np.array(scene.bounds.hi)) / 2.0

    cache: dict[tuple[int, int, int], float] = {}

    def objective(pos: np.ndarray) -> float:
        key = _cache_key(pos)
        if key not in cache:
            rmap = build_radio_map(
                scene, antenna_template.moved_to(pos), grid, trace, workers=workers
            )
            cache[key] = utility(rmap, weights, scale=utility_scale)
        return cache[key]

    inits = sample_initial_positions(center, region, params, bounds=scene.bounds)
    instances = []
    for i, init in enumerate(inits):
        instances.append(local_search(init, region, objective, params, bounds=scene.bounds))
        if progress is not None:
            progress(i + 1, len(inits))

    best = max(instances, key=lambda inst: inst.final_utility)
    best_map = build_radio_map(
        scene, antenna_template.moved_to(best.final_position), grid, trace, workers=workers
    )
    return PlanResult(
        best_position=best.final_position,
        best_utility=best.final_utility,
        instances=tuple(instances),
        radio_map=best_map,
    )


def region_from_dict(doc: dict) -> DeploymentRegion:
    """Parse the JSON form: {"kind": "full" | "box" | "ceiling", ...}."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError("region must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "full":
        return DeploymentRegion.full()
    if kind == "box":
        try:
            return DeploymentRegion.box(doc["min"], doc["max"])
        except KeyError as e:
            raise ValueError(f"box region missing field {e}") from e
    if kind == "ceiling":
        try:
            x0, y0, x1, y1 = doc["rect"]
            return DeploymentRegion.ceiling(float(doc["z"]), x0, y0, x1, y1)
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"bad ceiling region: {e}") from e
    raise ValueError(f"unknown region kind {kind!r}")


def region_to_dict(region: DeploymentRegion) -> dict:
    if region.kind == "full":
        return {"kind": "full"}
    if region.kind == "box":
        return {"kind": "box", "min": list(region.lo), "max": list(region.hi)}
    return {
        "kind": "ceiling",
        "z": region.lo[2],
        "rect": [region.lo[0], region.lo[1], region.hi[0], region.hi[1]],
    }
