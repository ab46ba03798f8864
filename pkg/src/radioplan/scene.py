"""Scene model: obstacles, materials, machines, and AGV trajectories.

A :class:`Scene` is the output format of an object-aware reconstruction
pipeline: a bounded 3D space populated with axis-aligned box obstacles and
finite rectangular planes, each carrying a surface material with scalar
per-interaction dB losses.  Machines and trajectories mark the
traffic-relevant regions that the planner weights.

Scenes are immutable after construction and safe to share read-only across
parallel workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Point3 = tuple[float, float, float]

PLANE_COPLANARITY_TOL_M = 1e-6


class SceneParseError(ValueError):
    """Malformed scene document (not valid JSON / wrong top-level shape)."""


class SceneValidationError(ValueError):
    """A scene invariant is violated; `path` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _as_point(value, path: str) -> Point3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise SceneValidationError(path, "expected a 3-element [x, y, z] list")
    try:
        p = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SceneValidationError(path, "coordinates must be numbers") from None
    if not all(math.isfinite(v) for v in p):
        raise SceneValidationError(path, "coordinates must be finite")
    return p  # type: ignore[return-value]


@dataclass(frozen=True)
class Material:
    """Surface material with scalar power losses per ray interaction."""

    name: str
    reflection_loss_db: float
    transmission_loss_db: float

    def __post_init__(self):
        for attr in ("reflection_loss_db", "transmission_loss_db"):
            v = getattr(self, attr)
            if not (math.isfinite(v) and v >= 0.0):
                raise SceneValidationError(
                    f"material[{self.name}].{attr}", "loss must be finite and >= 0 dB"
                )


#: Materials usable without declaring them in the scene file.
BUILTIN_MATERIALS = {
    "metal": Material("metal", reflection_loss_db=3.0, transmission_loss_db=30.0),
    "concrete": Material("concrete", reflection_loss_db=6.0, transmission_loss_db=10.0),
    "drywall": Material("drywall", reflection_loss_db=8.0, transmission_loss_db=3.0),
}


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box given by two opposite corners (meters)."""

    lo: Point3
    hi: Point3

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))

    @property
    def extent(self) -> Point3:
        return tuple(h - l for l, h in zip(self.lo, self.hi))  # type: ignore[return-value]

    def contains(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        return all(
            self.lo[i] - tol <= point[i] <= self.hi[i] + tol for i in range(3)
        )


@dataclass(frozen=True)
class Box:
    """Solid axis-aligned box obstacle: center and edge lengths in meters."""

    center: Point3
    size: Point3

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))

    @property
    def lo(self) -> Point3:
        return tuple(c - s / 2.0 for c, s in zip(self.center, self.size))  # type: ignore[return-value]

    @property
    def hi(self) -> Point3:
        return tuple(c + s / 2.0 for c, s in zip(self.center, self.size))  # type: ignore[return-value]


@dataclass(frozen=True)
class PlaneRect:
    """Finite rectangular plane given by its 4 corners in perimeter order."""

    corners: tuple[Point3, Point3, Point3, Point3]

    def __post_init__(self):
        object.__setattr__(
            self, "corners", tuple(tuple(float(v) for v in c) for c in self.corners)
        )


@dataclass(frozen=True)
class Obstacle:
    id: str
    class_label: str
    shape: Box | PlaneRect
    material: Material


@dataclass(frozen=True)
class Machine:
    """Network-traffic source at a fixed position."""

    id: str
    position: Point3
    traffic_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))


@dataclass(frozen=True)
class Trajectory:
    """Waypoint polyline of a mobile traffic source (e.g. an AGV)."""

    id: str
    waypoints: tuple[Point3, ...]
    traffic_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "waypoints", tuple(tuple(float(v) for v in w) for w in self.waypoints)
        )


@dataclass(frozen=True)
class Scene:
    """Bounded 3D space with obstacles, machines, and trajectories.

    The room boundary (floor/ceiling/walls) is synthesized from `bounds` as
    six reflecting planes with `boundary_material` unless
    `boundary_enabled=False`.
    """

    bounds: Aabb
    obstacles: tuple[Obstacle, ...] = ()
    machines: tuple[Machine, ...] = ()
    trajectories: tuple[Trajectory, ...] = ()
    name: str = ""
    boundary_enabled: bool = True
    boundary_material: Material = field(
        default_factory=lambda: BUILTIN_MATERIALS["concrete"]
    )

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        validate_scene(self)


def _validate_plane(rect: PlaneRect, path: str) -> None:
    c = np.asarray(rect.corners, dtype=float)
    if c.shape != (4, 3):
        raise SceneValidationError(path, "plane needs exactly 4 corner points")
    e1 = c[1] - c[0]
    e2 = c[3] - c[0]
    n = np.cross(e1, e2)
    norm = np.linalg.norm(n)
    if norm < 1e-12:
        raise SceneValidationError(path, "degenerate plane (collinear corners)")
    n = n / norm
    # all corners on the plane through c0 within the coplanarity tolerance
    d = np.abs((c - c[0]) @ n)
    if d.max() > PLANE_COPLANARITY_TOL_M:
        raise SceneValidationError(
            path, f"corners not coplanar within {PLANE_COPLANARITY_TOL_M} m"
        )
    # perimeter order rectangle: c2 == c1 + (c3 - c0), adjacent edges orthogonal
    if np.linalg.norm(c[2] - (c[1] + e2)) > 1e-6:
        raise SceneValidationError(path, "corners do not form a rectangle")
    if abs(float(e1 @ e2)) > 1e-6 * float(np.linalg.norm(e1) * np.linalg.norm(e2)):
        raise SceneValidationError(path, "adjacent edges are not orthogonal")


def validate_scene(scene: Scene) -> None:
    """Raise :class:`SceneValidationError` if any scene invariant is violated."""
    ext = scene.bounds.extent
    if any(e <= 0 for e in ext):
        raise SceneValidationError("bounds", "extent must be strictly positive on all axes")
    for idx, ob in enumerate(scene.obstacles):
        path = f"obstacles[{idx}]"
        if isinstance(ob.shape, Box):
            if any(s <= 0 for s in ob.shape.size):
                raise SceneValidationError(f"{path}.shape.size", "box size must be strictly positive")
            if not (scene.bounds.contains(ob.shape.lo) and scene.bounds.contains(ob.shape.hi)):
                raise SceneValidationError(f"{path}.shape", "box extends outside scene bounds")
        elif isinstance(ob.shape, PlaneRect):
            _validate_plane(ob.shape, f"{path}.shape")
            for ci, corner in enumerate(ob.shape.corners):
                if not scene.bounds.contains(corner):
                    raise SceneValidationError(
                        f"{path}.shape.corners[{ci}]", "corner outside scene bounds"
                    )
        else:
            raise SceneValidationError(f"{path}.shape", f"unknown shape type {type(ob.shape)!r}")
    for idx, m in enumerate(scene.machines):
        if m.traffic_weight < 0:
            raise SceneValidationError(f"machines[{idx}].traffic_weight", "must be >= 0")
        if not scene.bounds.contains(m.position):
            raise SceneValidationError(f"machines[{idx}].position", "outside scene bounds")
    for idx, t in enumerate(scene.trajectories):
        if len(t.waypoints) < 2:
            raise SceneValidationError(f"trajectories[{idx}].waypoints", "need at least 2 waypoints")
        if t.traffic_weight < 0:
            raise SceneValidationError(f"trajectories[{idx}].traffic_weight", "must be >= 0")
        for wi, w in enumerate(t.waypoints):
            if not scene.bounds.contains(w):
                raise SceneValidationError(
                    f"trajectories[{idx}].waypoints[{wi}]", "outside scene bounds"
                )


# ---------------------------------------------------------------------------
# JSON document format (schema v1, see docs/scene_schema.md)
# ---------------------------------------------------------------------------

SCHEMA_VERSION = 1


def scene_from_dict(doc: dict) -> Scene:
    """Build a validated Scene from a parsed schema-v1 document."""
    if not isinstance(doc, dict):
        raise SceneParseError("scene document must be a JSON object")
    v = doc.get("v", SCHEMA_VERSION)
    if v != SCHEMA_VERSION:
        raise SceneParseError(f"unsupported scene schema version {v!r}")

    bounds_doc = doc.get("bounds")
    if not isinstance(bounds_doc, dict) or "min" not in bounds_doc or "max" not in bounds_doc:
        raise SceneValidationError("bounds", "expected an object with 'min' and 'max'")
    bounds = Aabb(
        _as_point(bounds_doc["min"], "bounds.min"),
        _as_point(bounds_doc["max"], "bounds.max"),
    )

    materials = dict(BUILTIN_MATERIALS)
    for name, m in (doc.get("materials") or {}).items():
        if not isinstance(m, dict):
            raise SceneValidationError(f"materials.{name}", "expected an object")
        materials[name] = Material(
            name=name,
            reflection_loss_db=float(m.get("reflection_loss_db", 0.0)),
            transmission_loss_db=float(m.get("transmission_loss_db", 0.0)),
        )

    def resolve_material(name, path):
        if name not in materials:
            raise SceneValidationError(path, f"unknown material {name!r}")
        return materials[name]

    obstacles = []
    for idx, ob in enumerate(doc.get("obstacles") or []):
        path = f"obstacles[{idx}]"
        shape_doc = ob.get("shape")
        if not isinstance(shape_doc, dict) or "type" not in shape_doc:
            raise SceneValidationError(f"{path}.shape", "expected an object with a 'type'")
        if shape_doc["type"] == "box":
            shape = Box(
                center=_as_point(shape_doc.get("center"), f"{path}.shape.center"),
                size=_as_point(shape_doc.get("size"), f"{path}.shape.size"),
            )
        elif shape_doc["type"] == "plane":
            corners_doc = shape_doc.get("corners")
            if not isinstance(corners_doc, list) or len(corners_doc) != 4:
                raise SceneValidationError(f"{path}.shape.corners", "expected 4 corner points")
            shape = PlaneRect(
                corners=tuple(
                    _as_point(c, f"{path}.shape.corners[{ci}]")
                    for ci, c in enumerate(corners_doc)
                )
            )
        else:
            raise SceneValidationError(
                f"{path}.shape.type", f"unknown shape type {shape_doc['type']!r}"
            )
        obstacles.append(
            Obstacle(
                id=str(ob.get("id", f"obstacle-{idx}")),
                class_label=str(ob.get("class", "")),
                shape=shape,
                material=resolve_material(ob.get("material", "concrete"), f"{path}.material"),
            )
        )

    machines = [
        Machine(
            id=str(m.get("id", f"machine-{idx}")),
            position=_as_point(m.get("position"), f"machines[{idx}].position"),
            traffic_weight=float(m.get("traffic_weight", 1.0)),
        )
        for idx, m in enumerate(doc.get("machines") or [])
    ]
    trajectories = [
        Trajectory(
            id=str(t.get("id", f"trajectory-{idx}")),
            waypoints=tuple(
                _as_point(w, f"trajectories[{idx}].waypoints[{wi}]")
                for wi, w in enumerate(t.get("waypoints") or [])
            ),
            traffic_weight=float(t.get("traffic_weight", 1.0)),
        )
        for idx, t in enumerate(doc.get("trajectories") or [])
    ]

    boundary = doc.get("boundary") or {}
    boundary_enabled = bool(boundary.get("enabled", True))
    boundary_material = resolve_material(boundary.get("material", "concrete"), "boundary.material")

    return Scene(
        bounds=bounds,
        obstacles=tuple(obstacles),
        machines=tuple(machines),
        trajectories=tuple(trajectories),
        name=str(doc.get("name", "")),
        boundary_enabled=boundary_enabled,
        boundary_material=boundary_material,
    )


def scene_to_dict(scene: Scene) -> dict:
    """Serialize a Scene back to the schema-v1 document form."""
    materials: dict[str, Material] = {}
    for ob in scene.obstacles:
        materials[ob.material.name] = ob.material
    materials[scene.boundary_material.name] = scene.boundary_material

    def shape_doc(shape):
        if isinstance(shape, Box):
            return {"type": "box", "center": list(shape.center), "size": list(shape.size)}
        return {"type": "plane", "corners": [list(c) for c in shape.corners]}

    return {
        "v": SCHEMA_VERSION,
        "name": scene.name,
        "bounds": {"min": list(scene.bounds.lo), "max": list(scene.bounds.hi)},
        "materials": {
            name: {
                "reflection_loss_db": m.reflection_loss_db,
                "transmission_loss_db": m.transmission_loss_db,
            }
            for name, m in sorted(materials.items())
        },
        "obstacles": [
            {
                "id": ob.id,
                "class": ob.class_label,
                "shape": shape_doc(ob.shape),
                "material": ob.material.name,
            }
            for ob in scene.obstacles
        ],
        "machines": [
            {"id": m.id, "position": list(m.position), "traffic_weight": m.traffic_weight}
            for m in scene.machines
        ],
        "trajectories": [
            {
                "id": t.id,
                "waypoints": [list(w) for w in t.waypoints],
                "traffic_weight": t.traffic_weight,
            }
            for t in scene.trajectories
        ],
        "boundary": {
            "enabled": scene.boundary_enabled,
            "material": scene.boundary_material.name,
        },
    }


def load_scene(source: str | Path) -> Scene:
    """Load and validate a scene from a JSON file (or a JSON string)."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"malformed scene document: {exc}") from exc
    return scene_from_dict(doc)


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(scene_to_dict(scene), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------


def geometric_center(scene: Scene) -> np.ndarray:
    """Arithmetic mean of all machine positions (the planner's initial point)."""
    if not scene.machines:
        raise ValueError("geometric_center requires at least one machine")
    return np.mean([m.position for m in scene.machines], axis=0)


def object_position_rmse(
    ground_truth: Iterable[Sequence[float]], estimated: Iterable[Sequence[float]]
) -> float:
    """Average per-object position RMSE in meters.

    For each of the K matched objects the RMSE over the three axes is
    sqrt(sum_i (p_i - p̂_i)^2 / 3); the returned value is the mean of these
    per-object RMSEs.
    """
    gt = np.asarray(list(ground_truth), dtype=float)
    est = np.asarray(list(estimated), dtype=float)
    if gt.shape != est.shape:
        raise ValueError(f"length/shape mismatch: {gt.shape} vs {est.shape}")
    if gt.size == 0:
        raise ValueError("need at least one object pair")
    if gt.ndim != 2 or gt.shape[1] != 3:
        raise ValueError("expected lists of 3D points")
    per_object = np.sqrt(np.sum((gt - est) ** 2, axis=1) / 3.0)
    return float(np.mean(per_object))
